#pragma once

// Declarative run configuration and its flat key = value file format.
//
//   # comment
//   agent = ice
//   beta = 0.5
//
// Unknown keys and malformed values are errors that cite the line. Keys
// absent from the file keep their defaults (the grid-world hyperparameters).

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ice/agents.hpp"
#include "ice/nn.hpp"

namespace ice {

enum class EnvKind { kGrid, kWall };
enum class AgentKind { kIce, kRnd, kRandom, kNoIntrinsic, kLatentIce };

const char* env_name(EnvKind kind);
const char* agent_name(AgentKind kind);
EnvKind parse_env(const std::string& name);
AgentKind parse_agent(const std::string& name);

struct RunConfig {
  EnvKind env = EnvKind::kGrid;
  std::size_t grid_size = 40;
  std::size_t horizon = 400;
  std::string layout;  // wall layout file; empty selects the built-in layout
  double goal_reward = 1.0;

  AgentKind agent = AgentKind::kIce;
  LossWeights loss;
  OptimizerKind optimizer = OptimizerKind::kSgd;
  std::size_t hidden = 128;
  double max_grad_norm = 0.0;  // 0 disables clipping

  // Latent ICE.
  std::size_t latent_dim = 16;
  std::size_t dense_dim = 128;
  std::size_t ae_hidden = 256;
  double aux_weight = 0.5;
  std::size_t ae_update_period = 3;
  double noise_halfwidth = 0.3;
  std::size_t buffer_capacity = 4096;
  std::size_t ae_batch = 32;
  double ae_learning_rate = 1e-3;
  bool store_reconstructions = true;

  // RND.
  double rnd_alpha_encode = 1.0;
  double rnd_learning_rate = 1e-4;
  std::size_t rnd_features = 64;

  std::size_t episodes = 100;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::size_t heatmap_window = 100;
  std::size_t coverage_target = 250;
  bool record_wallclock = false;
  bool write_checkpoints = true;

  // Throws ConfigError describing the first inconsistent field.
  void validate() const;
};

// Sets one key; throws ParseError citing line on unknown keys or bad values.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value,
                   std::size_t line = 0);
RunConfig parse_config(const std::string& text, RunConfig base = {});
RunConfig load_config(const std::string& path, RunConfig base = {});
// Round-trips through parse_config.
std::string serialize_config(const RunConfig& config);

std::vector<std::string> config_keys();

}  // namespace ice
