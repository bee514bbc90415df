#include <doctest.h>

#include <cmath>
#include <random>

#include "gradcheck.hpp"
#include "ice/environments.hpp"
#include "ice/errors.hpp"
#include "ice/latent_hash.hpp"

using namespace ice;

namespace {

std::vector<double> gaussian(std::size_t n, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  std::vector<double> v(n);
  for (double& x : v) x = normal(rng);
  return v;
}

// Adds a perturbation of exactly the given Euclidean length in a random direction.
std::vector<double> displaced(const std::vector<double>& x, double length, Rng& rng) {
  auto d = gaussian(x.size(), rng);
  double norm = 0.0;
  for (double v : d) norm += v * v;
  norm = std::sqrt(norm);
  auto y = x;
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += d[i] * length / norm;
  return y;
}

double agreement(const LatentCode& a, const LatentCode& b) {
  std::size_t same = 0;
  for (std::size_t j = 0; j < a.bits.size(); ++j) same += a.bits[j] == b.bits[j];
  return static_cast<double>(same) / a.bits.size();
}

AutoencoderConfig small_config(std::size_t obs) {
  AutoencoderConfig cfg;
  cfg.observation_size = obs;
  cfg.hidden = 32;
  cfg.dense_dim = 16;
  cfg.latent_dim = 8;
  return cfg;
}

}  // namespace

TEST_CASE("hash scheme construction") {
  const auto a = HashScheme::create(16, 128, 0.0, 5);
  const auto b = HashScheme::create(16, 128, 0.0, 5);
  CHECK(a.projection().size() == 16 * 128);
  CHECK(std::equal(a.projection().begin(), a.projection().end(), b.projection().begin()));
  CHECK(a.seed() == 5);
  CHECK_THROWS_AS(HashScheme::create(129, 128, 0.0, 1), ConfigError);
  CHECK_THROWS_AS(HashScheme::create(4, 8, -0.1, 1), ConfigError);
  CHECK_THROWS_AS(HashScheme(2, 3, std::vector<double>(5), 0.0, 0), ConfigError);
}

TEST_CASE("simhash without noise is deterministic and consumes no randomness") {
  const auto scheme = HashScheme::create(16, 128, 0.0, 3);
  Rng rng(1), untouched(1);
  const auto x = gaussian(128, rng);
  Rng hash_rng(7), reference(7);
  const auto c1 = simhash(x, scheme, hash_rng);
  const auto c2 = simhash(x, scheme, hash_rng);
  CHECK(c1.bits == c2.bits);
  CHECK(hash_rng() == reference());
  for (auto b : c1.bits) CHECK((b == 1 || b == -1));
  CHECK_THROWS_AS(simhash(std::vector<double>(127), scheme, hash_rng), DataError);
}

TEST_CASE("simhash with noise draws fresh noise per call") {
  const auto scheme = HashScheme::create(16, 128, 5.0, 3);
  Rng rng(2);
  const std::vector<double> x(128, 0.0);
  bool differs = false;
  const auto first = simhash(x, scheme, rng);
  for (int i = 0; i < 20 && !differs; ++i) differs = simhash(x, scheme, rng).bits != first.bits;
  CHECK(differs);
}

TEST_CASE("negating a projection row flips exactly that bit") {
  Rng rng(4);
  const auto base = HashScheme::create(8, 32, 0.0, 9);
  for (std::size_t j = 0; j < 8; ++j) {
    std::vector<double> proj(base.projection().begin(), base.projection().end());
    for (std::size_t i = 0; i < 32; ++i) proj[j * 32 + i] = -proj[j * 32 + i];
    const HashScheme flipped(8, 32, proj, 0.0, 9);
    for (int trial = 0; trial < 20; ++trial) {
      const auto x = gaussian(32, rng, 3.0);
      const auto a = simhash(x, base, rng);
      const auto b = simhash(x, flipped, rng);
      for (std::size_t k = 0; k < 8; ++k) CHECK((a.bits[k] == b.bits[k]) == (k != j));
    }
  }
}

TEST_CASE("sgn(0) is +1") {
  const HashScheme zero(2, 3, std::vector<double>(6, 0.0), 0.0, 0);
  Rng rng(0);
  const auto code = simhash(std::vector<double>{1.0, -2.0, 0.0}, zero, rng);
  CHECK(code.bits == std::vector<std::int8_t>{1, 1});
  CHECK(code.symbols() == std::vector<Symbol>{1, 1});
  LatentCode mixed{{-1, 1, -1}};
  CHECK(mixed.symbols() == std::vector<Symbol>{0, 1, 0});
}

TEST_CASE("nearby dense vectors agree on more bits than distant ones") {
  const auto scheme = HashScheme::create(16, 128, 0.0, 21);
  Rng rng(22);
  double near = 0.0, far = 0.0;
  const int pairs = 10000;
  for (int i = 0; i < pairs; ++i) {
    const auto x = gaussian(128, rng);
    near += agreement(simhash(x, scheme, rng), simhash(displaced(x, 0.1, rng), scheme, rng));
    far += agreement(simhash(x, scheme, rng), simhash(displaced(x, 10.0, rng), scheme, rng));
  }
  CHECK(near / pairs > far / pairs);
}

TEST_CASE("encoder outputs lie in (0, 1) and are pure") {
  Rng rng(3);
  Autoencoder ae(small_config(20), rng);
  const auto x = gradcheck::random_input(20, rng);
  const auto e1 = ae.encode(x);
  const auto e2 = ae.encode(x);
  CHECK(e1 == e2);
  CHECK(e1.size() == 16);
  for (double v : e1) CHECK((v > 0.0 && v < 1.0));
  CHECK_THROWS_AS(ae.encode(std::vector<double>(19)), DataError);

  ae.encoder().zero_layer(1);
  for (double v : ae.encode(x)) CHECK(v == 0.5);
}

TEST_CASE("auxiliary term at e = 0.5 everywhere") {
  Rng rng(3);
  auto cfg = small_config(10);
  cfg.aux_weight = 0.5;
  Autoencoder ae(cfg, rng);
  ae.encoder().zero_layer(1);
  const std::vector<std::vector<double>> batch(3, std::vector<double>(10, 1.0));
  const auto r = reconstruction_loss(batch, ae);
  const double expected = cfg.aux_weight * cfg.dense_dim / (2.0 * cfg.latent_dim);
  CHECK(std::abs(r.auxiliary - expected) < 1e-12);
  CHECK(std::abs(r.loss - (-r.log_likelihood + r.auxiliary)) < 1e-12);
}

TEST_CASE("perfect reconstruction with saturated codes has near-zero loss") {
  Rng rng(8);
  auto cfg = small_config(6);
  Autoencoder ae(cfg, rng);
  const std::vector<double> x{1, 0, 0, 1, 1, 0};
  auto& enc_out = ae.encoder().layers()[1];
  std::fill(enc_out.weights.begin(), enc_out.weights.end(), 0.0);
  for (std::size_t j = 0; j < enc_out.bias.size(); ++j) enc_out.bias[j] = j % 2 ? 60.0 : -60.0;
  auto& dec_out = ae.decoder().layers()[1];
  std::fill(dec_out.weights.begin(), dec_out.weights.end(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) dec_out.bias[i] = x[i] > 0.5 ? 60.0 : -60.0;
  const auto r = reconstruction_loss({x}, ae);
  CHECK(r.loss >= 0.0);
  CHECK(r.loss < 1e-4);
  // The clamp holds the log-likelihood finite.
  CHECK(std::abs(r.log_likelihood - 6.0 * std::log(1.0 - 1e-6)) < 1e-12);
}

TEST_CASE("reconstruction loss rejects an empty batch") {
  Rng rng(1);
  Autoencoder ae(small_config(4), rng);
  CHECK_THROWS_AS(reconstruction_loss({}, ae), DataError);
}

TEST_CASE("autoencoder gradients match finite differences") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) CHECK(gradcheck::autoencoder(seed) < 1e-4);
}

TEST_CASE("reconstruction buffer evicts oldest first") {
  ReconstructionBuffer buf(3);
  for (Symbol s = 0; s < 5; ++s) buf.push({{s}, {}, {}});
  CHECK(buf.size() == 3);
  CHECK(buf[0].state[0] == 2);
  CHECK(buf[2].state[0] == 4);
  CHECK_THROWS_AS(ReconstructionBuffer(0), ConfigError);
}

TEST_CASE("autoencoder cadence") {
  Rng rng(5);
  Autoencoder ae(small_config(4), rng);
  Optimizer enc(OptimizerKind::kSgd, 0.01), dec(OptimizerKind::kSgd, 0.01);
  ReconstructionBuffer empty(8);
  const auto before = ae.encoder().flatten();
  CHECK(maybe_update_autoencoder(empty, ae, enc, dec, 3, 2, rng) == AeUpdate::kEmptyBuffer);
  CHECK(ae.encoder().flatten() == before);

  ReconstructionBuffer buf(8);
  buf.push({{1, 0, 1, 0}, {}, {}});
  CHECK(maybe_update_autoencoder(buf, ae, enc, dec, 1, 2, rng) == AeUpdate::kSkipped);
  CHECK(maybe_update_autoencoder(buf, ae, enc, dec, 2, 2, rng) == AeUpdate::kSkipped);
  CHECK(ae.encoder().flatten() == before);
  CHECK(maybe_update_autoencoder(buf, ae, enc, dec, 3, 2, rng) == AeUpdate::kUpdated);
  CHECK(ae.encoder().flatten() != before);
}

TEST_CASE("held-out reconstruction loss falls with training on grid data") {
  Rng rng(31);
  GridWorld env(20, 200);
  ReconstructionBuffer buf(4096);
  std::vector<std::vector<double>> held_out;
  for (int episode = 0; episode < 12; ++episode) {
    auto obs = env.reset();
    while (!env.done()) {
      obs = env.step(static_cast<int>(rng() % 4)).next_state;
      if (episode < 10) {
        buf.push({obs.plane, {}, {}});
      } else if (env.step_count() % 20 == 0) {
        held_out.emplace_back(obs.plane.begin(), obs.plane.end());
      }
    }
  }
  AutoencoderConfig cfg;
  cfg.observation_size = 400;
  cfg.hidden = 64;
  cfg.dense_dim = 32;
  cfg.latent_dim = 16;
  Autoencoder ae(cfg, rng);
  Optimizer enc(OptimizerKind::kSgd, 0.05), dec(OptimizerKind::kSgd, 0.05);
  const double before = reconstruction_loss(held_out, ae).loss;
  for (std::size_t firing = 1; firing <= 200; ++firing)
    REQUIRE(maybe_update_autoencoder(buf, ae, enc, dec, 3 * firing, 2, rng) == AeUpdate::kUpdated);
  const double after = reconstruction_loss(held_out, ae).loss;
  CHECK(after < before);
}

TEST_CASE("latent ICE on a constant state earns nothing after the first step") {
  Rng rng(6);
  Autoencoder ae(small_config(9), rng);
  const auto scheme = HashScheme::create(8, 16, 0.0, 1);
  CountTable table(8, 2);
  ReconstructionBuffer buf(100);
  const std::vector<Symbol> s{1, 0, 1, 1, 0, 0, 1, 0, 1};
  CHECK(latent_ice_step(s, 2, table, scheme, ae, buf, rng).value_bits == 0.0);
  for (int i = 0; i < 10; ++i)
    CHECK(std::abs(latent_ice_step(s, 2, table, scheme, ae, buf, rng).value_bits) < 1e-12);
  CHECK(buf.size() == 11);
  CHECK(buf[0].reconstruction.size() == 9);
  CHECK(buf[0].code.bits.size() == 8);

  ReconstructionBuffer lean(10);
  latent_ice_step(s, 2, table, scheme, ae, lean, rng, false);
  CHECK(lean[0].reconstruction.empty());

  CountTable wrong(7, 2);
  CHECK_THROWS_AS(latent_ice_step(s, 2, wrong, scheme, ae, buf, rng), ConfigError);
}

TEST_CASE("alternating complementary codes reach the capacity bound") {
  CountTable table(16, 2);
  const std::vector<Symbol> zeros(16, 0), ones(16, 1);
  for (int t = 0; t < 100; ++t) table.absorb(t % 2 ? ones : zeros);
  CHECK(std::abs(table.trajectory_entropy().total_bits - 16.0) < 1e-12);
}

TEST_CASE("latent ICE reproduces raw ICE when codes copy the state") {
  // Encoder logits are s_j - 1/2 plus one constant coordinate at logit 0, so
  // sigmoid(e_j) - sigmoid(0) has the sign of s_j - 1/2. Projection rows
  // e_j - e_k read exactly that difference, making each bit equal to s_j.
  const std::size_t k = 6;
  AutoencoderConfig cfg;
  cfg.observation_size = k;
  cfg.hidden = k;
  cfg.dense_dim = k + 1;
  cfg.latent_dim = k;
  Rng rng(2);
  Autoencoder ae(cfg, rng);
  auto& l0 = ae.encoder().layers()[0];
  std::fill(l0.weights.begin(), l0.weights.end(), 0.0);
  std::fill(l0.bias.begin(), l0.bias.end(), 0.0);
  for (std::size_t i = 0; i < k; ++i) l0.weights[i * k + i] = 1.0;
  auto& l1 = ae.encoder().layers()[1];
  std::fill(l1.weights.begin(), l1.weights.end(), 0.0);
  std::fill(l1.bias.begin(), l1.bias.end(), -0.5);
  l1.bias[k] = 0.0;
  for (std::size_t i = 0; i < k; ++i) l1.weights[i * (k + 1) + i] = 1.0;

  std::vector<double> proj(k * (k + 1), 0.0);
  for (std::size_t j = 0; j < k; ++j) {
    proj[j * (k + 1) + j] = 1.0;
    proj[j * (k + 1) + k] = -1.0;
  }
  const HashScheme scheme(k, k + 1, proj, 0.0, 0);

  CountTable latent(k, 2), raw(k, 2);
  ReconstructionBuffer buf(64);
  std::mt19937_64 gen(13);
  for (int t = 0; t < 200; ++t) {
    const auto s = oracle::random_state(k, 2, gen);
    const double r_latent = latent_ice_step(s, 2, latent, scheme, ae, buf, rng).value_bits;
    CHECK(buf[buf.size() - 1].code.symbols() == s);
    if (t == 0) {
      raw.absorb(s);
      continue;
    }
    CHECK(std::abs(raw.ice_step(s).value_bits - r_latent) < 1e-12);
  }
}
