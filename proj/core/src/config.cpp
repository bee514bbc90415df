#include "ice/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "ice/errors.hpp"

namespace ice {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_double(const std::string& v) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out))
    throw DataError("'" + v + "' is not a finite number");
  return out;
}

std::uint64_t to_unsigned(const std::string& v) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty())
    throw DataError("'" + v + "' is not a non-negative integer");
  return out;
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw DataError("'" + v + "' is not a boolean");
}

std::string fmt_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

struct Field {
  const char* key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename T>
Field real(const char* key, T RunConfig::*member) {
  return {key, [member](RunConfig& c, const std::string& v) { c.*member = to_double(v); },
          [member](const RunConfig& c) { return fmt_double(c.*member); }};
}

template <typename T>
Field integer(const char* key, T RunConfig::*member) {
  return {key,
          [member](RunConfig& c, const std::string& v) { c.*member = static_cast<T>(to_unsigned(v)); },
          [member](const RunConfig& c) { return std::to_string(c.*member); }};
}

Field boolean(const char* key, bool RunConfig::*member) {
  return {key, [member](RunConfig& c, const std::string& v) { c.*member = to_bool(v); },
          [member](const RunConfig& c) { return std::string(c.*member ? "true" : "false"); }};
}

Field loss_real(const char* key, double LossWeights::*member) {
  return {key, [member](RunConfig& c, const std::string& v) { c.loss.*member = to_double(v); },
          [member](const RunConfig& c) { return fmt_double(c.loss.*member); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"env", [](RunConfig& c, const std::string& v) { c.env = parse_env(v); },
       [](const RunConfig& c) { return std::string(env_name(c.env)); }},
      integer("grid_size", &RunConfig::grid_size),
      integer("horizon", &RunConfig::horizon),
      {"layout", [](RunConfig& c, const std::string& v) { c.layout = v; },
       [](const RunConfig& c) { return c.layout; }},
      real("goal_reward", &RunConfig::goal_reward),
      {"agent", [](RunConfig& c, const std::string& v) { c.agent = parse_agent(v); },
       [](const RunConfig& c) { return std::string(agent_name(c.agent)); }},
      loss_real("lr", &LossWeights::learning_rate),
      loss_real("gamma", &LossWeights::gamma),
      loss_real("alpha_value", &LossWeights::alpha_value),
      loss_real("alpha_policy", &LossWeights::alpha_policy),
      loss_real("alpha_entropy", &LossWeights::alpha_entropy),
      loss_real("beta", &LossWeights::beta),
      {"k_steps",
       [](RunConfig& c, const std::string& v) { c.loss.k_steps = to_unsigned(v); },
       [](const RunConfig& c) { return std::to_string(c.loss.k_steps); }},
      {"optimizer", [](RunConfig& c, const std::string& v) { c.optimizer = parse_optimizer(v); },
       [](const RunConfig& c) { return std::string(optimizer_name(c.optimizer)); }},
      integer("hidden", &RunConfig::hidden),
      real("max_grad_norm", &RunConfig::max_grad_norm),
      integer("latent_dim", &RunConfig::latent_dim),
      integer("dense_dim", &RunConfig::dense_dim),
      integer("ae_hidden", &RunConfig::ae_hidden),
      real("aux_weight", &RunConfig::aux_weight),
      integer("ae_update_period", &RunConfig::ae_update_period),
      real("noise_halfwidth", &RunConfig::noise_halfwidth),
      integer("buffer_capacity", &RunConfig::buffer_capacity),
      integer("ae_batch", &RunConfig::ae_batch),
      real("ae_lr", &RunConfig::ae_learning_rate),
      boolean("store_reconstructions", &RunConfig::store_reconstructions),
      real("rnd_alpha_encode", &RunConfig::rnd_alpha_encode),
      real("rnd_lr", &RunConfig::rnd_learning_rate),
      integer("rnd_features", &RunConfig::rnd_features),
      integer("episodes", &RunConfig::episodes),
      integer("seed", &RunConfig::seed),
      {"out", [](RunConfig& c, const std::string& v) { c.out_dir = v; },
       [](const RunConfig& c) { return c.out_dir; }},
      integer("heatmap_window", &RunConfig::heatmap_window),
      integer("coverage_target", &RunConfig::coverage_target),
      boolean("record_wallclock", &RunConfig::record_wallclock),
      boolean("write_checkpoints", &RunConfig::write_checkpoints),
  };
  return table;
}

}  // namespace

const char* env_name(EnvKind kind) { return kind == EnvKind::kGrid ? "grid" : "wall"; }

const char* agent_name(AgentKind kind) {
  switch (kind) {
    case AgentKind::kIce:
      return "ice";
    case AgentKind::kRnd:
      return "rnd";
    case AgentKind::kRandom:
      return "random";
    case AgentKind::kNoIntrinsic:
      return "none-intrinsic";
    case AgentKind::kLatentIce:
      return "latent-ice";
  }
  return "ice";
}

EnvKind parse_env(const std::string& name) {
  if (name == "grid") return EnvKind::kGrid;
  if (name == "wall") return EnvKind::kWall;
  throw DataError("unknown environment '" + name + "'");
}

AgentKind parse_agent(const std::string& name) {
  for (auto kind : {AgentKind::kIce, AgentKind::kRnd, AgentKind::kRandom,
                    AgentKind::kNoIntrinsic, AgentKind::kLatentIce})
    if (name == agent_name(kind)) return kind;
  throw DataError("unknown agent '" + name + "'");
}

void RunConfig::validate() const {
  loss.validate();
  if (grid_size == 0) throw ConfigError("grid_size must be positive");
  if (horizon == 0) throw ConfigError("horizon must be positive");
  if (hidden == 0) throw ConfigError("hidden must be positive");
  if (latent_dim == 0 || latent_dim > dense_dim)
    throw ConfigError("latent_dim must lie in [1, dense_dim]");
  if (ae_update_period == 0) throw ConfigError("ae_update_period must be positive");
  if (buffer_capacity == 0) throw ConfigError("buffer_capacity must be positive");
  if (ae_batch == 0) throw ConfigError("ae_batch must be positive");
  if (noise_halfwidth < 0.0) throw ConfigError("noise_halfwidth must be non-negative");
  if (max_grad_norm < 0.0) throw ConfigError("max_grad_norm must be non-negative");
  if (heatmap_window == 0) throw ConfigError("heatmap_window must be positive");
}

void apply_setting(RunConfig& config, const std::string& key, const std::string& value,
                   std::size_t line) {
  for (const auto& f : fields()) {
    if (key != f.key) continue;
    try {
      f.set(config, value);
    } catch (const DataError& e) {
      throw ParseError("bad value for '" + key + "': " + e.what(), line);
    }
    return;
  }
  throw ParseError("unknown key '" + key + "'", line);
}

RunConfig parse_config(const std::string& text, RunConfig base) {
  std::istringstream in(text);
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string content = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", line);
    const std::string key = trim(content.substr(0, eq));
    const std::string value = trim(content.substr(eq + 1));
    if (key.empty()) throw ParseError("missing key", line);
    apply_setting(base, key, value, line);
  }
  return base;
}

RunConfig load_config(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), std::move(base));
}

std::string serialize_config(const RunConfig& config) {
  std::string out;
  for (const auto& f : fields()) {
    const std::string v = f.get(config);
    if (v.empty()) continue;
    out += std::string(f.key) + " = " + v + "\n";
  }
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& f : fields()) keys.emplace_back(f.key);
  return keys;
}

}  // namespace ice
