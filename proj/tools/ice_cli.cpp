// ice: command-line front end.
//
//   ice train --config configs/grid.cfg --seed 7 --out runs/a
//   ice walk --n 400 --k-max 200 --trials 100000 --out walk.csv
//   ice sweep --config configs/grid.cfg --cells 0.01:0.5,0.01:0 --out runs/sweep
//   ice wall --seeds 1,2,3,4,5 --out runs/wall
//   ice heatmap --in runs/a/heatmap.csv --svg heat.svg
//   ice verify-example
//
// Exit status: 0 success, 1 usage error, 2 runtime error. Progress goes to
// stderr; results go to files.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "ice/config.hpp"
#include "ice/entropy.hpp"
#include "ice/errors.hpp"
#include "ice/experiments.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kUsageError = 1;
constexpr int kRuntimeError = 2;

std::string output_root() {
  const char* env = std::getenv("ICE_OUT_DIR");
  return env && *env ? env : "runs";
}

std::string default_out(const std::string& out, const std::string& name) {
  return out.empty() ? (fs::path(output_root()) / name).string() : out;
}

void ensure_parent(const std::string& path) {
  const auto parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

// Shared config handling: file first, then --set overrides, then dedicated flags.
struct ConfigFlags {
  std::string config_path;
  std::vector<std::string> settings;
  std::uint64_t seed = 0;
  std::size_t episodes = 0;

  void attach(CLI::App& app) {
    app.add_option("--config", config_path, "key = value config file")->check(CLI::ExistingFile);
    app.add_option("--set", settings, "override one key, e.g. --set beta=1.0 (repeatable)");
    app.add_option("--seed", seed, "random seed");
    app.add_option("--episodes", episodes, "episode budget");
  }

  ice::RunConfig build(const CLI::App& app) const {
    ice::RunConfig cfg = config_path.empty() ? ice::RunConfig{} : ice::load_config(config_path);
    for (const auto& s : settings) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw CLI::ValidationError("--set", "expected key=value, got '" + s + "'");
      ice::apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
    }
    if (app.count("--seed")) cfg.seed = seed;
    if (app.count("--episodes")) cfg.episodes = episodes;
    cfg.validate();
    return cfg;
  }
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

template <typename T>
T parse_number(const std::string& flag, const std::string& text) {
  T value{};
  std::istringstream in(text);
  if (!(in >> value) || !in.eof())
    throw CLI::ValidationError(flag, "'" + text + "' is not a number");
  return value;
}

int run_train(const CLI::App& app, const ConfigFlags& flags, const std::string& out) {
  ice::RunConfig cfg = flags.build(app);
  cfg.out_dir = default_out(out, std::string(ice::agent_name(cfg.agent)) + "-seed" +
                                     std::to_string(cfg.seed));
  std::cerr << "training " << ice::agent_name(cfg.agent) << " on " << ice::env_name(cfg.env)
            << " for " << cfg.episodes << " episodes -> " << cfg.out_dir << "\n";
  const auto result = ice::train(cfg);
  std::cerr << "mean distinct states over the last " << cfg.heatmap_window
            << " episodes: " << ice::mean_distinct_last(result.rows, cfg.heatmap_window) << "\n";
  if (result.first_goal_episode)
    std::cerr << "goal first reached in episode " << *result.first_goal_episode << " ("
              << result.goal_episodes << " goal episodes)\n";
  return 0;
}

int run_walk(std::size_t n, std::size_t k_max, std::size_t trials, std::uint64_t seed,
             const std::string& out) {
  const std::string path = default_out(out, "walk.csv");
  ensure_parent(path);
  std::cerr << "random walk tail, N = " << n << ", K = 0.." << k_max << ", " << trials
            << " trials -> " << path << "\n";
  ice::write_walk_csv(path, ice::random_walk_table(n, k_max, trials, seed));
  return 0;
}

int run_sweep(const CLI::App& app, const ConfigFlags& flags, const std::string& cells_text,
              const std::string& out) {
  ice::RunConfig cfg = flags.build(app);
  std::vector<ice::SweepCell> cells;
  for (const auto& item : split(cells_text, ',')) {
    const auto parts = split(item, ':');
    if (parts.size() != 2)
      throw CLI::ValidationError("--cells", "expected alpha_entropy:beta pairs, got '" + item + "'");
    cells.push_back({parse_number<double>("--cells", parts[0]), parse_number<double>("--cells", parts[1])});
  }
  cfg.out_dir = default_out(out, "sweep");
  fs::create_directories(cfg.out_dir);
  std::cerr << "sweeping " << cells.size() << " cells, target " << cfg.coverage_target
            << " distinct states -> " << cfg.out_dir << "\n";
  const auto results = ice::tradeoff_sweep(cfg, cells);
  ice::write_sweep_csv((fs::path(cfg.out_dir) / "sweep.csv").string(), results);
  int failures = 0;
  for (const auto& r : results) {
    std::cerr << "  alpha_entropy " << r.cell.alpha_entropy << ", beta " << r.cell.beta << ": ";
    if (!r.error.empty()) {
      std::cerr << "error: " << r.error << "\n";
      ++failures;
    } else if (r.episodes_to_target) {
      std::cerr << "target after " << *r.episodes_to_target << " episodes\n";
    } else {
      std::cerr << "target not reached\n";
    }
  }
  return failures ? kRuntimeError : 0;
}

int run_wall(const CLI::App& app, const ConfigFlags& flags, const std::string& seeds_text,
             const std::string& out) {
  ice::RunConfig cfg = flags.build(app);
  std::vector<std::uint64_t> seeds;
  for (const auto& s : split(seeds_text, ',')) seeds.push_back(parse_number<std::uint64_t>("--seeds", s));
  if (seeds.empty()) throw CLI::ValidationError("--seeds", "no seeds given");
  const std::string dir = default_out(out, "wall");
  fs::create_directories(dir);
  std::cerr << "wall study over " << seeds.size() << " seeds, " << cfg.episodes
            << " episodes each -> " << dir << "\n";
  const auto runs = ice::wall_study(cfg, seeds);
  ice::write_wall_csv((fs::path(dir) / "wall.csv").string(), runs);
  for (const auto& r : runs)
    std::cerr << "  " << r.agent << " seed " << r.seed << ": "
              << (r.first_goal_episode ? "goal in episode " + std::to_string(*r.first_goal_episode)
                                       : std::string("goal never reached"))
              << "\n";
  return 0;
}

std::vector<std::vector<double>> read_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ice::Error("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    for (const auto& cell : split(line, ',')) row.push_back(std::stod(cell));
    if (!rows.empty() && row.size() != rows.front().size())
      throw ice::DataError(path + ": ragged heatmap row " + std::to_string(rows.size() + 1));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ice::DataError(path + " holds no heatmap");
  return rows;
}

void write_svg(const std::string& path, const std::vector<std::vector<double>>& m) {
  constexpr int kCell = 10;
  double top = 0.0;
  for (const auto& row : m)
    for (double v : row) top = std::max(top, v);
  ensure_parent(path);
  std::ofstream out(path);
  if (!out) throw ice::Error("cannot write " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << m.front().size() * kCell
      << "\" height=\"" << m.size() * kCell << "\">\n";
  for (std::size_t r = 0; r < m.size(); ++r) {
    for (std::size_t c = 0; c < m[r].size(); ++c) {
      const int shade = top > 0 ? static_cast<int>(std::lround(255.0 * (1.0 - m[r][c] / top))) : 255;
      out << "<rect x=\"" << c * kCell << "\" y=\"" << r * kCell << "\" width=\"" << kCell
          << "\" height=\"" << kCell << "\" fill=\"rgb(255," << shade << "," << shade
          << ")\"/>\n";
    }
  }
  out << "</svg>\n";
}

int run_heatmap(const std::string& in, const std::string& svg) {
  const auto m = read_matrix(in);
  std::vector<double> flat;
  for (const auto& row : m) flat.insert(flat.end(), row.begin(), row.end());
  std::size_t visited = 0;
  for (double v : flat) visited += v > 0.0;
  std::cout << "cells " << flat.size() << "\nvisited " << visited << "\nentropy_bits "
            << ice::heatmap_entropy_bits(flat) << "\nmax_entropy_bits "
            << std::log2(static_cast<double>(flat.size())) << "\n";
  if (!svg.empty()) {
    write_svg(svg, m);
    std::cerr << "wrote " << svg << "\n";
  }
  return 0;
}

// Worked 1x4 grid: left, right, right from the leftmost cell.
int run_verify_example() {
  const std::vector<std::vector<ice::Symbol>> traj = {
      {1, 0, 0, 0}, {1, 0, 0, 0}, {1, 1, 0, 0}, {1, 1, 1, 0}};
  const double expected_h[] = {0.00, 0.00, 0.92, 1.81};
  const double expected_r = 0.89;
  ice::CountTable table(4, 2);
  table.absorb(traj[0]);
  bool ok = true;
  auto matches = [](double value, double printed) {
    return std::abs(std::round(value * 100.0) / 100.0 - printed) < 1e-9;
  };
  double reward = 0.0;
  for (std::size_t t = 0; t < traj.size(); ++t) {
    if (t > 0) reward = table.ice_step(traj[t]).value_bits;
    const double h = table.trajectory_entropy().total_bits;
    std::printf("H_%zu = %.2f bits\n", t, h);
    ok &= matches(h, expected_h[t]);
  }
  std::printf("r_3 = %.2f bits\n", reward);
  ok &= matches(reward, expected_r);
  std::printf("%s\n", ok ? "match" : "MISMATCH");
  return ok ? 0 : kRuntimeError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Information-content exploration: training, analyses, and checks"};
  app.require_subcommand(1, 1);

  ConfigFlags train_flags, sweep_flags, wall_flags;
  std::string train_out, sweep_out, wall_out, walk_out, heat_in, heat_svg;
  std::string sweep_cells = "0.01:0.5,0.01:0,0:0";
  std::string wall_seeds = "1,2,3,4,5";
  std::size_t walk_n = 400, walk_k = 200, walk_trials = 100000;
  std::uint64_t walk_seed = 0;

  auto* train = app.add_subcommand("train", "train one agent and write a run directory");
  train_flags.attach(*train);
  train->add_option("--out", train_out, "run directory (default $ICE_OUT_DIR/<agent>-seed<N>)");

  auto* walk = app.add_subcommand("walk", "one-dimensional random-walk tail probabilities");
  walk->add_option("--n", walk_n, "walk length N")->check(CLI::PositiveNumber);
  walk->add_option("--k-max", walk_k, "largest displacement K");
  walk->add_option("--trials", walk_trials, "Monte Carlo trials (at least 1000)");
  walk->add_option("--seed", walk_seed, "random seed");
  walk->add_option("--out", walk_out, "CSV path (default $ICE_OUT_DIR/walk.csv)");

  auto* sweep = app.add_subcommand("sweep", "steps-to-coverage over (alpha_entropy, beta) cells");
  sweep_flags.attach(*sweep);
  sweep->add_option("--cells", sweep_cells, "comma-separated alpha_entropy:beta pairs");
  sweep->add_option("--out", sweep_out, "output directory (default $ICE_OUT_DIR/sweep)");

  auto* wall = app.add_subcommand("wall", "ICE-only vs entropy-only vs combined on the wall world");
  wall_flags.attach(*wall);
  wall->add_option("--seeds", wall_seeds, "comma-separated seeds");
  wall->add_option("--out", wall_out, "output directory (default $ICE_OUT_DIR/wall)");

  auto* heatmap = app.add_subcommand("heatmap", "summarize a heatmap.csv and optionally render SVG");
  heatmap->add_option("--in", heat_in, "heatmap.csv from a run directory")->required();
  heatmap->add_option("--svg", heat_svg, "write an SVG rendering here");

  auto* verify = app.add_subcommand("verify-example", "recompute the worked 1x4 grid example");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kUsageError;
  }

  try {
    if (*train) return run_train(*train, train_flags, train_out);
    if (*walk) return run_walk(walk_n, walk_k, walk_trials, walk_seed, walk_out);
    if (*sweep) return run_sweep(*sweep, sweep_flags, sweep_cells, sweep_out);
    if (*wall) return run_wall(*wall, wall_flags, wall_seeds, wall_out);
    if (*heatmap) return run_heatmap(heat_in, heat_svg);
    if (*verify) return run_verify_example();
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsageError;
  } catch (const ice::ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsageError;
  } catch (const ice::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kUsageError;
}
