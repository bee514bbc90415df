#pragma once

// Training orchestration and the analyses built on top of it.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ice/agents.hpp"
#include "ice/config.hpp"
#include "ice/entropy.hpp"
#include "ice/environments.hpp"
#include "ice/latent_hash.hpp"

namespace ice {

// Exact column order of metrics.csv.
inline constexpr const char* kMetricsHeader =
    "episode,steps,extrinsic_return,intrinsic_return_bits,trajectory_entropy_bits,"
    "distinct_states,loss_value,loss_policy,loss_entropy,wallclock_ms";

struct MetricsRow {
  std::size_t episode = 0;
  std::size_t steps = 0;
  double extrinsic_return = 0.0;
  double intrinsic_return_bits = 0.0;
  double trajectory_entropy_bits = 0.0;
  std::size_t distinct_states = 0;
  double loss_value = 0.0;
  double loss_policy = 0.0;
  double loss_entropy = 0.0;
  double wallclock_ms = 0.0;

  std::string to_csv() const;
};

struct Trajectory {
  std::vector<std::size_t> positions;          // s_0 .. s_T
  std::vector<std::vector<Symbol>> planes;     // filled only when requested
  bool reached_goal = false;
};

// Per-step intrinsic reward producer. begin() sees s_0; reward() sees each
// subsequent state.
class IntrinsicSource {
 public:
  virtual ~IntrinsicSource() = default;
  virtual void begin(const Observation& first, const std::vector<double>& features) = 0;
  virtual double reward(const Observation& next, const std::vector<double>& features) = 0;
  virtual void on_policy_update(std::size_t /*update_index*/) {}
};

class NoIntrinsic : public IntrinsicSource {
 public:
  void begin(const Observation&, const std::vector<double>&) override {}
  double reward(const Observation&, const std::vector<double>&) override { return 0.0; }
};

// ICE on the raw observation plane.
class IceSource : public IntrinsicSource {
 public:
  IceSource(std::size_t dims, std::size_t alphabet_size) : table_(dims, alphabet_size) {}
  void begin(const Observation& first, const std::vector<double>& features) override;
  double reward(const Observation& next, const std::vector<double>& features) override;
  const CountTable& table() const { return table_; }

 private:
  CountTable table_;
};

// ICE on SimHash codes of a periodically trained autoencoder.
class LatentIceSource : public IntrinsicSource {
 public:
  LatentIceSource(const RunConfig& config, std::size_t observation_size,
                  std::size_t alphabet_size, Rng& rng);
  void begin(const Observation& first, const std::vector<double>& features) override;
  double reward(const Observation& next, const std::vector<double>& features) override;
  void on_policy_update(std::size_t update_index) override;

  const Autoencoder& autoencoder() const { return live_; }
  const HashScheme& scheme() const { return scheme_; }
  const ReconstructionBuffer& buffer() const { return buffer_; }
  std::size_t ae_updates() const { return ae_updates_; }
  std::size_t empty_buffer_warnings() const { return empty_warnings_; }

 private:
  std::size_t alphabet_;
  HashScheme scheme_;
  Autoencoder live_;
  Autoencoder hashing_;  // lagged copy, refreshed at episode boundaries
  bool stale_ = false;
  ReconstructionBuffer buffer_;
  CountTable table_;
  Optimizer enc_opt_;
  Optimizer dec_opt_;
  Rng rng_;
  bool store_reconstructions_;
  std::size_t ae_updates_ = 0;
  std::size_t empty_warnings_ = 0;
};

class RndSource : public IntrinsicSource {
 public:
  RndSource(const RunConfig& config, std::size_t input_size, Rng& rng);
  void begin(const Observation& first, const std::vector<double>& features) override;
  double reward(const Observation& next, const std::vector<double>& features) override;

  const RndParams& params() const { return rnd_; }
  std::uint64_t target_checksum() const { return target_checksum_; }
  bool target_intact() const { return checksum(rnd_.target) == target_checksum_; }

 private:
  RndParams rnd_;
  Optimizer opt_;
  std::uint64_t target_checksum_;
};

std::unique_ptr<Environment> make_environment(const RunConfig& config);

struct TrainResult {
  std::vector<MetricsRow> rows;
  std::vector<double> heatmap;  // normalized, over the final heatmap_window episodes
  std::size_t heatmap_side = 0;
  std::vector<Trajectory> final_trajectories;  // positions only, final window
  std::optional<std::size_t> first_goal_episode;
  std::size_t goal_episodes = 0;
  std::string run_dir;
};

// One training run: environment, actor-critic (or random) policy, and an
// intrinsic reward source, all seeded from the config.
class Trainer {
 public:
  explicit Trainer(RunConfig config);
  ~Trainer();

  // Steps one episode to termination, updating the policy every k_steps.
  std::pair<Trajectory, MetricsRow> run_episode(bool keep_planes = false);

  Environment& environment() { return *env_; }
  const RunConfig& config() const { return config_; }
  const PolicyValueNet* policy() const;
  IntrinsicSource& intrinsic() { return *source_; }
  std::size_t policy_updates() const { return updates_; }

  // Writes checkpoint.bin (and ae_checkpoint.bin for latent runs) to dir.
  void write_checkpoints(const std::string& dir) const;

 private:
  struct Learner;
  RunConfig config_;
  Rng rng_;
  std::unique_ptr<Environment> env_;
  std::unique_ptr<IntrinsicSource> source_;
  std::unique_ptr<Learner> learner_;
  std::size_t episode_ = 0;
  std::size_t updates_ = 0;
};

// Runs the full episode budget. When config.out_dir is set, writes
// config.copy, metrics.csv, heatmap.csv and checkpoints there.
TrainResult train(const RunConfig& config);

// Runs one episode of an already-constructed environment with the given
// intrinsic source under a uniform random policy.
std::pair<Trajectory, MetricsRow> run_random_episode(Environment& env, IntrinsicSource& source, Rng& rng,
                                                     bool keep_planes = true);

// Normalized visit frequencies over a side x side grid. Throws DataError on
// empty input or out-of-range positions.
std::vector<double> visitation_heatmap(const std::vector<std::vector<std::size_t>>& trajectories,
                                       std::size_t side);
double heatmap_entropy_bits(const std::vector<double>& heatmap);

std::size_t distinct_states(const std::vector<std::vector<Symbol>>& trajectory);
std::size_t distinct_positions(const std::vector<std::size_t>& positions);

// P(displacement >= K after N fair +-1 steps).
double random_walk_tail_exact(std::size_t n, std::size_t k);

struct StirlingTail {
  double probability = 0.0;
  bool in_validity_regime = false;  // N >= 50
};
StirlingTail random_walk_tail_stirling(std::size_t n, std::size_t k);

struct MonteCarloTail {
  double estimate = 0.0;
  double standard_error = 0.0;
};
// Throws ConfigError when trials < 1000.
MonteCarloTail random_walk_monte_carlo(std::size_t n, std::size_t k, std::size_t trials,
                                       std::uint64_t seed);

struct WalkRow {
  std::size_t n, k;
  double exact, stirling, monte_carlo, mc_stderr;
};
std::vector<WalkRow> random_walk_table(std::size_t n, std::size_t k_max, std::size_t trials,
                                       std::uint64_t seed);
void write_walk_csv(const std::string& path, const std::vector<WalkRow>& rows);

struct SweepCell {
  double alpha_entropy = 0.0;
  double beta = 0.0;
};

struct SweepResult {
  SweepCell cell;
  std::optional<std::size_t> episodes_to_target;  // 1-based episode count
  double final_mean_distinct = 0.0;               // mean over the last heatmap_window
  std::string error;                              // non-empty if the cell failed
};

// Throws ConfigError with fewer than two cells unless allow_single is set.
std::vector<SweepResult> tradeoff_sweep(const RunConfig& base, const std::vector<SweepCell>& cells,
                                        bool allow_single = false);
void write_sweep_csv(const std::string& path, const std::vector<SweepResult>& results);

struct WallRun {
  std::string agent;  // "ice-only", "entropy-only", "combined"
  std::uint64_t seed = 0;
  std::optional<std::size_t> first_goal_episode;
  std::size_t goal_episodes = 0;
  double observable_coverage = 0.0;    // mean per-episode fraction of observable cells
  double unobservable_coverage = 0.0;  // same for unobservable cells
};

// Paired wall-world runs: ICE only (alpha_entropy = 0), entropy only
// (beta = 0) and both signals, one run per seed each.
std::vector<WallRun> wall_study(const RunConfig& base, const std::vector<std::uint64_t>& seeds);
void write_wall_csv(const std::string& path, const std::vector<WallRun>& runs);

double mean_distinct_last(const std::vector<MetricsRow>& rows, std::size_t window);

}  // namespace ice
