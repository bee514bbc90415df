#include "ice/experiments.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <unordered_set>

#include "ice/checkpoint.hpp"
#include "ice/errors.hpp"

namespace ice {

namespace fs = std::filesystem;

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  return out;
}

// Mixes a run seed with a per-purpose salt so independent streams stay independent.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}


}  // namespace

std::string MetricsRow::to_csv() const {
  return std::to_string(episode) + "," + std::to_string(steps) + "," + num(extrinsic_return) +
         "," + num(intrinsic_return_bits) + "," + num(trajectory_entropy_bits) + "," +
         std::to_string(distinct_states) + "," + num(loss_value) + "," + num(loss_policy) + "," +
         num(loss_entropy) + "," + num(wallclock_ms);
}

// ----- intrinsic sources -----

void IceSource::begin(const Observation& first, const std::vector<double>&) {
  table_.reset();
  table_.absorb(first.plane);
}

double IceSource::reward(const Observation& next, const std::vector<double>&) {
  return table_.ice_step(next.plane).value_bits;
}

LatentIceSource::LatentIceSource(const RunConfig& config, std::size_t observation_size,
                                 std::size_t alphabet_size, Rng& rng)
    : alphabet_(alphabet_size),
      scheme_(HashScheme::create(config.latent_dim, config.dense_dim, 0.0,
                                 derive_seed(config.seed, 11))),
      buffer_(config.buffer_capacity),
      table_(config.latent_dim, 2),
      enc_opt_(config.optimizer, config.ae_learning_rate),
      dec_opt_(config.optimizer, config.ae_learning_rate),
      rng_(derive_seed(config.seed, 12)),
      store_reconstructions_(config.store_reconstructions) {
  AutoencoderConfig ae;
  ae.observation_size = observation_size;
  ae.hidden = config.ae_hidden;
  ae.dense_dim = config.dense_dim;
  ae.latent_dim = config.latent_dim;
  ae.aux_weight = config.aux_weight;
  ae.update_period = config.ae_update_period;
  ae.training_noise = config.noise_halfwidth;
  ae.batch_size = config.ae_batch;
  live_ = Autoencoder(ae, rng);
  hashing_ = live_;
}

void LatentIceSource::begin(const Observation& first, const std::vector<double>&) {
  if (stale_) {
    hashing_ = live_;
    stale_ = false;
  }
  table_.reset();
  latent_ice_step(first.plane, alphabet_, table_, scheme_, hashing_, buffer_, rng_,
                  store_reconstructions_);
}

double LatentIceSource::reward(const Observation& next, const std::vector<double>&) {
  return latent_ice_step(next.plane, alphabet_, table_, scheme_, hashing_, buffer_, rng_,
                         store_reconstructions_)
      .value_bits;
}

void LatentIceSource::on_policy_update(std::size_t update_index) {
  switch (maybe_update_autoencoder(buffer_, live_, enc_opt_, dec_opt_, update_index, alphabet_,
                                   rng_)) {
    case AeUpdate::kUpdated:
      ++ae_updates_;
      stale_ = true;
      break;
    case AeUpdate::kEmptyBuffer:
      ++empty_warnings_;
      break;
    case AeUpdate::kSkipped:
      break;
  }
}

RndSource::RndSource(const RunConfig& config, std::size_t input_size, Rng& rng)
    : rnd_(RndParams::create(input_size, config.hidden, config.rnd_features,
                             config.rnd_alpha_encode, rng)),
      opt_(config.optimizer, config.rnd_learning_rate),
      target_checksum_(checksum(rnd_.target)) {}

void RndSource::begin(const Observation&, const std::vector<double>&) {}

double RndSource::reward(const Observation&, const std::vector<double>& features) {
  RndResult r = rnd_intrinsic(features, rnd_);
  opt_.step(rnd_.predictor, r.predictor_grads);
  return r.reward;
}

std::unique_ptr<Environment> make_environment(const RunConfig& config) {
  if (config.env == EnvKind::kGrid)
    return std::make_unique<GridWorld>(config.grid_size, config.horizon);
  WallLayout layout = config.layout.empty() ? parse_layout(default_wall_layout_text())
                                            : load_layout(config.layout);
  return std::make_unique<WallGridWorld>(std::move(layout), config.horizon, config.goal_reward);
}

// ----- trainer -----

struct Trainer::Learner {
  PolicyValueNet net;
  PolicyOptimizer optimizer;
  PolicyValueGrads grads;
};

Trainer::Trainer(RunConfig config) : config_(std::move(config)), rng_(config_.seed) {
  config_.validate();
  env_ = make_environment(config_);
  const std::size_t input = env_->input_size();
  if (config_.agent != AgentKind::kRandom) {
    learner_ = std::make_unique<Learner>();
    learner_->net = PolicyValueNet(input, env_->action_count(), config_.hidden, rng_);
    learner_->optimizer = PolicyOptimizer(config_.optimizer, config_.loss.learning_rate);
    learner_->grads = learner_->net.make_grads();
  }
  switch (config_.agent) {
    case AgentKind::kIce:
      source_ = std::make_unique<IceSource>(env_->plane_size(), env_->alphabet_size());
      break;
    case AgentKind::kLatentIce:
      source_ = std::make_unique<LatentIceSource>(config_, env_->plane_size(),
                                                  env_->alphabet_size(), rng_);
      break;
    case AgentKind::kRnd:
      source_ = std::make_unique<RndSource>(config_, input, rng_);
      break;
    case AgentKind::kRandom:
    case AgentKind::kNoIntrinsic:
      source_ = std::make_unique<NoIntrinsic>();
      break;
  }
}

Trainer::~Trainer() = default;

const PolicyValueNet* Trainer::policy() const { return learner_ ? &learner_->net : nullptr; }

std::pair<Trajectory, MetricsRow> Trainer::run_episode(bool keep_planes) {
  const auto started = std::chrono::steady_clock::now();
  Environment& env = *env_;
  Observation obs = env.reset();
  std::vector<double> features = env.features(obs);

  CountTable raw(env.plane_size(), env.alphabet_size());
  raw.absorb(obs.plane);
  source_->begin(obs, features);

  Trajectory traj;
  traj.positions.push_back(obs.position);
  if (keep_planes) traj.planes.push_back(obs.plane);

  MetricsRow row;
  row.episode = episode_;
  Segment segment;
  LossReport loss_sum;
  std::size_t episode_updates = 0;

  while (!env.done()) {
    int action;
    if (learner_) {
      const PolicyOutput out = learner_->net.forward(features);
      action = sample_action(out.probabilities, rng_);
    } else {
      action = uniform_random_policy(env.action_count(), rng_);
    }
    Transition t = env.step(action);
    std::vector<double> next_features = env.features(t.next_state);
    const double intrinsic = source_->reward(t.next_state, next_features);
    raw.absorb(t.next_state.plane);

    row.extrinsic_return += t.extrinsic_reward;
    row.intrinsic_return_bits += intrinsic;
    if (t.extrinsic_reward > 0.0) traj.reached_goal = true;
    traj.positions.push_back(t.next_state.position);
    if (keep_planes) traj.planes.push_back(t.next_state.plane);

    if (learner_) {
      segment.observations.push_back(std::move(features));
      segment.actions.push_back(action);
      segment.rewards.push_back(mix_reward(t.extrinsic_reward, intrinsic, config_.loss.beta));
      if (segment.observations.size() >= config_.loss.k_steps || t.done) {
        segment.bootstrap_observation = next_features;
        segment.done_at_end = t.done;
        learner_->grads.zero();
        const LossReport report =
            actor_critic_losses(segment, learner_->net, config_.loss, learner_->grads);
        if (config_.max_grad_norm > 0.0) {
          const double norm = std::sqrt(learner_->grads.squared_norm());
          if (norm > config_.max_grad_norm) learner_->grads.scale(config_.max_grad_norm / norm);
        }
        learner_->optimizer.step(learner_->net, learner_->grads);
        ++updates_;
        ++episode_updates;
        source_->on_policy_update(updates_);
        loss_sum.value += report.value;
        loss_sum.policy += report.policy;
        loss_sum.entropy += report.entropy;
        segment = Segment{};
      }
    }
    features = std::move(next_features);
  }

  row.steps = env.step_count();
  row.trajectory_entropy_bits = raw.trajectory_entropy().total_bits;
  row.distinct_states = distinct_positions(traj.positions);
  if (episode_updates > 0) {
    row.loss_value = loss_sum.value / episode_updates;
    row.loss_policy = loss_sum.policy / episode_updates;
    row.loss_entropy = loss_sum.entropy / episode_updates;
  }
  if (config_.record_wallclock)
    row.wallclock_ms = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - started)
                           .count();
  ++episode_;
  return {std::move(traj), row};
}

void Trainer::write_checkpoints(const std::string& dir) const {
  if (learner_) {
    CheckpointMeta meta{config_.seed, updates_, {{"agent", agent_name(config_.agent)}}};
    save_checkpoint((fs::path(dir) / "checkpoint.bin").string(), meta,
                    {{"trunk", &learner_->net.trunk()},
                     {"policy", &learner_->net.policy_head()},
                     {"value", &learner_->net.value_head()}});
  }
  if (const auto* latent = dynamic_cast<const LatentIceSource*>(source_.get())) {
    CheckpointMeta meta{config_.seed, latent->ae_updates(),
                        {{"projection_seed", std::to_string(latent->scheme().seed())},
                         {"latent_dim", std::to_string(latent->scheme().latent_dim())},
                         {"dense_dim", std::to_string(latent->scheme().dense_dim())}}};
    save_checkpoint((fs::path(dir) / "ae_checkpoint.bin").string(), meta,
                    {{"encoder", &latent->autoencoder().encoder()},
                     {"decoder", &latent->autoencoder().decoder()}});
  }
}

TrainResult train(const RunConfig& config) {
  Trainer trainer(config);
  TrainResult result;
  const RunConfig& cfg = trainer.config();
  std::ofstream metrics;
  if (!cfg.out_dir.empty()) {
    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    if (ec) throw Error("cannot create run directory " + cfg.out_dir + ": " + ec.message());
    result.run_dir = cfg.out_dir;
    auto copy = open_output((fs::path(cfg.out_dir) / "config.copy").string());
    copy << serialize_config(cfg);
    metrics = open_output((fs::path(cfg.out_dir) / "metrics.csv").string());
    metrics << kMetricsHeader << '\n';
  }

  const std::size_t cells = trainer.environment().position_count();
  std::vector<double> visits(cells, 0.0);
  const std::size_t window_start =
      cfg.episodes > cfg.heatmap_window ? cfg.episodes - cfg.heatmap_window : 0;
  for (std::size_t e = 0; e < cfg.episodes; ++e) {
    auto [traj, row] = trainer.run_episode();
    if (traj.reached_goal) {
      if (!result.first_goal_episode) result.first_goal_episode = e;
      ++result.goal_episodes;
    }
    if (e >= window_start) {
      for (std::size_t p : traj.positions) visits[p] += 1.0;
      result.final_trajectories.push_back(Trajectory{std::move(traj.positions), {}, traj.reached_goal});
    }
    if (metrics.is_open()) metrics << row.to_csv() << '\n' << std::flush;
    result.rows.push_back(row);
  }

  double total = 0.0;
  for (double v : visits) total += v;
  for (double& v : visits) v /= total;
  result.heatmap = std::move(visits);
  const auto* grid = dynamic_cast<const GridWorld*>(&trainer.environment());
  const auto* wall = dynamic_cast<const WallGridWorld*>(&trainer.environment());
  result.heatmap_side = grid ? grid->size() : wall->layout().cols;

  if (auto* rnd = dynamic_cast<RndSource*>(&trainer.intrinsic()); rnd && !rnd->target_intact())
    throw NumericError("RND target network changed during training");

  if (!cfg.out_dir.empty()) {
    auto heat = open_output((fs::path(cfg.out_dir) / "heatmap.csv").string());
    for (std::size_t i = 0; i < result.heatmap.size(); ++i) {
      heat << num(result.heatmap[i]);
      heat << ((i + 1) % result.heatmap_side == 0 ? '\n' : ',');
    }
    if (cfg.write_checkpoints) trainer.write_checkpoints(cfg.out_dir);
  }
  return result;
}

std::pair<Trajectory, MetricsRow> run_random_episode(Environment& env, IntrinsicSource& source, Rng& rng,
                                                     bool keep_planes) {
  Observation obs = env.reset();
  std::vector<double> features = env.features(obs);
  CountTable raw(env.plane_size(), env.alphabet_size());
  raw.absorb(obs.plane);
  source.begin(obs, features);
  Trajectory traj;
  traj.positions.push_back(obs.position);
  if (keep_planes) traj.planes.push_back(obs.plane);
  MetricsRow row;
  while (!env.done()) {
    Transition t = env.step(uniform_random_policy(env.action_count(), rng));
    features = env.features(t.next_state);
    const double intrinsic = source.reward(t.next_state, features);
    raw.absorb(t.next_state.plane);
    row.extrinsic_return += t.extrinsic_reward;
    row.intrinsic_return_bits += intrinsic;
    if (t.extrinsic_reward > 0.0) traj.reached_goal = true;
    traj.positions.push_back(t.next_state.position);
    if (keep_planes) traj.planes.push_back(t.next_state.plane);
  }
  row.steps = env.step_count();
  row.trajectory_entropy_bits = raw.trajectory_entropy().total_bits;
  row.distinct_states = distinct_positions(traj.positions);
  return {std::move(traj), row};
}

// ----- analyses -----

std::vector<double> visitation_heatmap(const std::vector<std::vector<std::size_t>>& trajectories,
                                       std::size_t side) {
  std::vector<double> heat(side * side, 0.0);
  double total = 0.0;
  for (const auto& traj : trajectories) {
    for (std::size_t p : traj) {
      if (p >= heat.size())
        throw DataError("position " + std::to_string(p) + " outside a " + std::to_string(side) +
                        "x" + std::to_string(side) + " grid");
      heat[p] += 1.0;
      total += 1.0;
    }
  }
  if (total == 0.0) throw DataError("heatmap of no visits");
  for (double& h : heat) h /= total;
  return heat;
}

double heatmap_entropy_bits(const std::vector<double>& heatmap) { return shannon_bits(heatmap); }

std::size_t distinct_states(const std::vector<std::vector<Symbol>>& trajectory) {
  std::set<std::vector<Symbol>> seen(trajectory.begin(), trajectory.end());
  return seen.size();
}

std::size_t distinct_positions(const std::vector<std::size_t>& positions) {
  std::unordered_set<std::size_t> seen(positions.begin(), positions.end());
  return seen.size();
}

namespace {

std::vector<double> log_factorials(std::size_t n) {
  std::vector<double> lf(n + 1, 0.0);
  for (std::size_t i = 2; i <= n; ++i) lf[i] = lf[i - 1] + std::log(static_cast<double>(i));
  return lf;
}

double stirling_log_factorial(std::size_t n) {
  if (n == 0) return 0.0;
  const double x = static_cast<double>(n);
  return x * std::log(x) - x + 0.5 * std::log(2.0 * M_PI * x);
}

// log-sum-exp of log C(n, i) - n log 2 for i in [first, n].
template <typename LogFact>
double binomial_tail(std::size_t n, std::size_t k, LogFact log_fact) {
  if (k > n) return 0.0;
  const std::size_t first = (k + n + 1) / 2;
  const double log_half_n = static_cast<double>(n) * std::log(0.5);
  std::vector<double> terms;
  for (std::size_t i = first; i <= n; ++i)
    terms.push_back(log_fact(n) - log_fact(i) - log_fact(n - i) + log_half_n);
  const double top = *std::max_element(terms.begin(), terms.end());
  double s = 0.0;
  for (double t : terms) s += std::exp(t - top);
  return std::min(1.0, std::exp(top + std::log(s)));
}

}  // namespace

double random_walk_tail_exact(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  const auto lf = log_factorials(n);
  return binomial_tail(n, k, [&](std::size_t m) { return lf[m]; });
}

StirlingTail random_walk_tail_stirling(std::size_t n, std::size_t k) {
  return {binomial_tail(n, k, stirling_log_factorial), n >= 50};
}

MonteCarloTail random_walk_monte_carlo(std::size_t n, std::size_t k, std::size_t trials,
                                       std::uint64_t seed) {
  if (trials < 1000) throw ConfigError("Monte Carlo needs at least 1000 trials");
  Rng rng(seed);
  std::size_t hits = 0;
  const long target = static_cast<long>(k);
  for (std::size_t t = 0; t < trials; ++t) {
    // Each random bit is one step; a set bit moves right.
    long right = 0;
    std::size_t remaining = n;
    while (remaining > 0) {
      const std::size_t take = std::min<std::size_t>(remaining, 64);
      std::uint64_t bits = rng();
      if (take < 64) bits &= (std::uint64_t{1} << take) - 1;
      right += std::popcount(bits);
      remaining -= take;
    }
    if (2 * right - static_cast<long>(n) >= target) ++hits;
  }
  const double p = static_cast<double>(hits) / static_cast<double>(trials);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(trials))};
}

std::vector<WalkRow> random_walk_table(std::size_t n, std::size_t k_max, std::size_t trials,
                                       std::uint64_t seed) {
  std::vector<WalkRow> rows;
  for (std::size_t k = 0; k <= k_max; ++k) {
    const auto mc = random_walk_monte_carlo(n, k, trials, derive_seed(seed, k));
    rows.push_back({n, k, random_walk_tail_exact(n, k), random_walk_tail_stirling(n, k).probability,
                    mc.estimate, mc.standard_error});
  }
  return rows;
}

void write_walk_csv(const std::string& path, const std::vector<WalkRow>& rows) {
  auto out = open_output(path);
  out << "N,K,exact,stirling,monte_carlo,mc_stderr\n";
  for (const auto& r : rows)
    out << r.n << ',' << r.k << ',' << num(r.exact) << ',' << num(r.stirling) << ','
        << num(r.monte_carlo) << ',' << num(r.mc_stderr) << '\n';
}

double mean_distinct_last(const std::vector<MetricsRow>& rows, std::size_t window) {
  if (rows.empty()) return 0.0;
  const std::size_t start = rows.size() > window ? rows.size() - window : 0;
  double s = 0.0;
  for (std::size_t i = start; i < rows.size(); ++i) s += static_cast<double>(rows[i].distinct_states);
  return s / static_cast<double>(rows.size() - start);
}

std::vector<SweepResult> tradeoff_sweep(const RunConfig& base, const std::vector<SweepCell>& cells,
                                        bool allow_single) {
  if (cells.empty() || (cells.size() < 2 && !allow_single))
    throw ConfigError("a trade-off sweep needs at least two configurations");
  std::vector<SweepResult> results;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    SweepResult r{cells[i], std::nullopt, 0.0, {}};
    try {
      RunConfig cfg = base;
      cfg.loss.alpha_entropy = cells[i].alpha_entropy;
      cfg.loss.beta = cells[i].beta;
      if (!base.out_dir.empty())
        cfg.out_dir = (fs::path(base.out_dir) / ("cell" + std::to_string(i))).string();
      const TrainResult run = train(cfg);
      for (const auto& row : run.rows) {
        if (row.distinct_states >= cfg.coverage_target) {
          r.episodes_to_target = row.episode + 1;
          break;
        }
      }
      r.final_mean_distinct = mean_distinct_last(run.rows, cfg.heatmap_window);
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    results.push_back(std::move(r));
  }
  return results;
}

void write_sweep_csv(const std::string& path, const std::vector<SweepResult>& results) {
  auto out = open_output(path);
  out << "alpha_entropy,beta,episodes_to_target,reached,final_mean_distinct,error\n";
  for (const auto& r : results) {
    out << num(r.cell.alpha_entropy) << ',' << num(r.cell.beta) << ','
        << (r.episodes_to_target ? std::to_string(*r.episodes_to_target) : "") << ','
        << (r.episodes_to_target ? "true" : "false") << ',' << num(r.final_mean_distinct) << ','
        << '"' << r.error << '"' << '\n';
  }
}

std::vector<WallRun> wall_study(const RunConfig& base, const std::vector<std::uint64_t>& seeds) {
  struct Variant {
    const char* name;
    double alpha_entropy;
    double beta;
  };
  const double beta = base.loss.beta > 0.0 ? base.loss.beta : 0.5;
  const double alpha = base.loss.alpha_entropy > 0.0 ? base.loss.alpha_entropy : 0.01;
  const Variant variants[] = {
      {"ice-only", 0.0, beta}, {"entropy-only", alpha, 0.0}, {"combined", alpha, beta}};

  std::vector<WallRun> runs;
  for (const auto& v : variants) {
    for (std::uint64_t seed : seeds) {
      RunConfig cfg = base;
      cfg.env = EnvKind::kWall;
      cfg.agent = AgentKind::kIce;
      cfg.seed = seed;
      cfg.loss.alpha_entropy = v.alpha_entropy;
      cfg.loss.beta = v.beta;
      cfg.out_dir.clear();
      Trainer trainer(cfg);
      const auto& layout = dynamic_cast<WallGridWorld&>(trainer.environment()).layout();
      std::size_t observable = 0;
      std::size_t hidden = 0;
      for (std::size_t i = 0; i < layout.cells.size(); ++i) {
        if (layout.observable(i)) ++observable;
        else if (layout.cells[i] == CellKind::kUnobservable) ++hidden;
      }
      WallRun run{v.name, seed, std::nullopt, 0, 0.0, 0.0};
      for (std::size_t e = 0; e < cfg.episodes; ++e) {
        auto [traj, row] = trainer.run_episode();
        if (traj.reached_goal) {
          if (!run.first_goal_episode) run.first_goal_episode = e;
          ++run.goal_episodes;
        }
        std::unordered_set<std::size_t> cells(traj.positions.begin(), traj.positions.end());
        std::size_t seen_obs = 0;
        std::size_t seen_hidden = 0;
        for (std::size_t c : cells) {
          if (layout.observable(c)) ++seen_obs;
          else if (layout.cells[c] == CellKind::kUnobservable) ++seen_hidden;
        }
        if (observable) run.observable_coverage += static_cast<double>(seen_obs) / observable;
        if (hidden) run.unobservable_coverage += static_cast<double>(seen_hidden) / hidden;
      }
      if (cfg.episodes > 0) {
        run.observable_coverage /= static_cast<double>(cfg.episodes);
        run.unobservable_coverage /= static_cast<double>(cfg.episodes);
      }
      runs.push_back(run);
    }
  }
  return runs;
}

void write_wall_csv(const std::string& path, const std::vector<WallRun>& runs) {
  auto out = open_output(path);
  out << "agent,seed,first_goal_episode,goal_episodes,observable_coverage,unobservable_coverage\n";
  for (const auto& r : runs)
    out << r.agent << ',' << r.seed << ','
        << (r.first_goal_episode ? std::to_string(*r.first_goal_episode) : "") << ','
        << r.goal_episodes << ',' << num(r.observable_coverage) << ','
        << num(r.unobservable_coverage) << '\n';
}

}  // namespace ice
