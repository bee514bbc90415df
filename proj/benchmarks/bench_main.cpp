#include <benchmark/benchmark.h>

#include <vector>

#include "ice/agents.hpp"
#include "ice/entropy.hpp"
#include "ice/environments.hpp"
#include "ice/experiments.hpp"
#include "ice/latent_hash.hpp"

namespace {

// A 400-step random episode on the 40x40 grid, recorded once.
const std::vector<ice::Observation>& random_episode() {
  static const std::vector<ice::Observation> episode = [] {
    ice::GridWorld env(40, 400);
    ice::Rng rng(1);
    std::vector<ice::Observation> out{env.reset()};
    while (!env.done()) out.push_back(env.step(ice::uniform_random_policy(4, rng)).next_state);
    return out;
  }();
  return episode;
}

void BM_IceEpisode(benchmark::State& state) {
  const auto& episode = random_episode();
  ice::CountTable table(1600, 2);
  for (auto _ : state) {
    table.reset();
    table.absorb(episode.front().plane);
    double sum = 0.0;
    for (std::size_t i = 1; i < episode.size(); ++i) sum += table.ice_step(episode[i].plane).value_bits;
    benchmark::DoNotOptimize(sum);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(episode.size() - 1));
}
BENCHMARK(BM_IceEpisode);

void BM_PolicyForward(benchmark::State& state) {
  ice::GridWorld env(40, 400);
  ice::Rng rng(2);
  ice::PolicyValueNet net(env.input_size(), 4, static_cast<std::size_t>(state.range(0)), rng);
  const auto features = env.features(random_episode().back());
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(features));
}
BENCHMARK(BM_PolicyForward)->Arg(128)->Arg(256);

void BM_ActorCriticUpdate(benchmark::State& state) {
  ice::GridWorld env(40, 400);
  ice::Rng rng(3);
  ice::PolicyValueNet net(env.input_size(), 4, 128, rng);
  const auto& episode = random_episode();
  ice::Segment segment;
  for (std::size_t i = 0; i < 20; ++i) {
    segment.observations.push_back(env.features(episode[200 + i]));
    segment.actions.push_back(static_cast<int>(i % 4));
    segment.rewards.push_back(0.01 * static_cast<double>(i));
  }
  segment.bootstrap_observation = env.features(episode[220]);
  ice::LossWeights weights;
  auto grads = net.make_grads();
  for (auto _ : state) {
    grads.zero();
    benchmark::DoNotOptimize(ice::actor_critic_losses(segment, net, weights, grads));
  }
}
BENCHMARK(BM_ActorCriticUpdate);

void BM_SimHash(benchmark::State& state) {
  ice::Rng rng(4);
  ice::AutoencoderConfig config;
  config.observation_size = 1600;
  ice::Autoencoder ae(config, rng);
  const auto scheme = ice::HashScheme::create(16, 128, 0.0, 5);
  std::vector<double> input(1600);
  for (std::size_t i = 0; i < 1600; ++i) input[i] = random_episode().back().plane[i];
  for (auto _ : state) benchmark::DoNotOptimize(ice::simhash(ae.encode_logits(input), scheme, rng));
}
BENCHMARK(BM_SimHash);

}  // namespace

BENCHMARK_MAIN();
