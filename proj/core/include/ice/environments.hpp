#pragma once

// Deterministic grid simulators with finite-alphabet observations.

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ice/entropy.hpp"

namespace ice {

// The information-bearing plane (what ICE counts) plus the agent's cell.
struct Observation {
  std::vector<Symbol> plane;
  std::size_t position = 0;
};

struct Transition {
  Observation state;
  int action = 0;
  double extrinsic_reward = 0.0;
  Observation next_state;
  bool done = false;
};

enum GridAction : int { kUp = 0, kDown = 1, kLeft = 2, kRight = 3 };

class Environment {
 public:
  virtual ~Environment() = default;

  virtual Observation reset() = 0;
  // Throws StateError once the episode is done, DataError on a bad action.
  virtual Transition step(int action) = 0;

  virtual int action_count() const = 0;
  virtual bool done() const = 0;
  virtual std::size_t step_count() const = 0;

  // Shape of Observation::plane and its alphabet.
  virtual std::size_t plane_size() const = 0;
  virtual std::size_t alphabet_size() const { return 2; }

  // Number of distinct agent positions; positions index [0, position_count()).
  virtual std::size_t position_count() const = 0;

  // Agent input: the plane scaled to [0, 1] followed by a one-hot position
  // plane. The position plane keeps the policy input Markov.
  std::size_t input_size() const { return plane_size() + position_count(); }
  void features(const Observation& obs, std::span<double> out) const;
  std::vector<double> features(const Observation& obs) const;
};

class GridWorld : public Environment {
 public:
  explicit GridWorld(std::size_t size = 40, std::size_t horizon = 400);

  Observation reset() override;
  Transition step(int action) override;

  int action_count() const override { return 4; }
  bool done() const override { return done_; }
  std::size_t step_count() const override { return steps_; }
  std::size_t plane_size() const override { return size_ * size_; }
  std::size_t position_count() const override { return size_ * size_; }

  std::size_t size() const { return size_; }
  std::size_t row() const { return row_; }
  std::size_t col() const { return col_; }

 private:
  Observation observe() const;

  std::size_t size_;
  std::size_t horizon_;
  std::size_t row_ = 0;
  std::size_t col_ = 0;
  std::size_t steps_ = 0;
  bool done_ = true;
  std::vector<Symbol> visited_;
};

enum class CellKind { kObservable, kUnobservable, kWall, kGoal, kStart };

struct WallLayout {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<CellKind> cells;  // row-major
  std::size_t start = 0;

  CellKind at(std::size_t r, std::size_t c) const { return cells[r * cols + c]; }
  // Cells whose visitation shows up in the observation plane.
  bool observable(std::size_t index) const {
    return cells[index] == CellKind::kObservable || cells[index] == CellKind::kStart;
  }
};

// '.' observable, 'B' unobservable, '#' wall, 'G' goal, 'S' start.
// Throws ParseError (with line and column) on ragged rows, unknown
// characters, a missing or repeated start, or no goal.
WallLayout parse_layout(const std::string& text);
WallLayout load_layout(const std::string& path);

// 40x40 layout shipped with the library.
const std::string& default_wall_layout_text();

class WallGridWorld : public Environment {
 public:
  explicit WallGridWorld(WallLayout layout, std::size_t horizon = 400,
                         double goal_reward = 1.0);

  Observation reset() override;
  Transition step(int action) override;

  int action_count() const override { return 4; }
  bool done() const override { return done_; }
  std::size_t step_count() const override { return steps_; }
  std::size_t plane_size() const override { return layout_.cells.size(); }
  std::size_t position_count() const override { return layout_.cells.size(); }

  const WallLayout& layout() const { return layout_; }
  std::size_t position() const { return pos_; }
  bool reached_goal() const { return reached_goal_; }

 private:
  Observation observe() const;

  WallLayout layout_;
  std::size_t horizon_;
  double goal_reward_;
  std::size_t pos_ = 0;
  std::size_t steps_ = 0;
  bool done_ = true;
  bool reached_goal_ = false;
  std::vector<Symbol> visited_;
};

// 1-D walk on the integers; action 0 moves left, 1 moves right.
class RandomWalk1D {
 public:
  explicit RandomWalk1D(std::size_t horizon);

  long reset();
  // Returns the new position. Throws StateError after the horizon.
  long step(int action);

  long position() const { return position_; }
  std::size_t step_count() const { return steps_; }
  bool done() const { return steps_ >= horizon_; }

 private:
  std::size_t horizon_;
  long position_ = 0;
  std::size_t steps_ = 0;
};

}  // namespace ice
