#include "ice/environments.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "ice/errors.hpp"

namespace ice {

namespace {

void check_action(int action, int count) {
  if (action < 0 || action >= count)
    throw DataError("action " + std::to_string(action) + " outside [0, " +
                    std::to_string(count) + ")");
}

// Applies a grid move; returns false when it would leave the grid.
bool move(std::size_t& row, std::size_t& col, int action, std::size_t rows, std::size_t cols) {
  switch (action) {
    case kUp:
      if (row == 0) return false;
      --row;
      return true;
    case kDown:
      if (row + 1 >= rows) return false;
      ++row;
      return true;
    case kLeft:
      if (col == 0) return false;
      --col;
      return true;
    case kRight:
      if (col + 1 >= cols) return false;
      ++col;
      return true;
  }
  return false;
}

}  // namespace

void Environment::features(const Observation& obs, std::span<double> out) const {
  const std::size_t plane = plane_size();
  if (obs.plane.size() != plane || out.size() != input_size())
    throw DataError("observation does not match the environment shape");
  const double scale = 1.0 / static_cast<double>(alphabet_size() - 1);
  for (std::size_t i = 0; i < plane; ++i) out[i] = obs.plane[i] * scale;
  std::fill(out.begin() + plane, out.end(), 0.0);
  out[plane + obs.position] = 1.0;
}

std::vector<double> Environment::features(const Observation& obs) const {
  std::vector<double> out(input_size());
  features(obs, out);
  return out;
}

GridWorld::GridWorld(std::size_t size, std::size_t horizon) : size_(size), horizon_(horizon) {
  if (size == 0) throw ConfigError("grid size must be positive");
  if (horizon == 0) throw ConfigError("horizon must be positive");
  visited_.assign(size * size, 0);
}

Observation GridWorld::observe() const { return {visited_, row_ * size_ + col_}; }

Observation GridWorld::reset() {
  row_ = col_ = 0;
  steps_ = 0;
  done_ = false;
  std::fill(visited_.begin(), visited_.end(), 0);
  visited_[0] = 1;
  return observe();
}

Transition GridWorld::step(int action) {
  if (done_) throw StateError("step called on a finished grid-world episode");
  check_action(action, action_count());
  Transition t;
  t.state = observe();
  t.action = action;
  move(row_, col_, action, size_, size_);
  visited_[row_ * size_ + col_] = 1;
  ++steps_;
  done_ = steps_ >= horizon_;
  t.next_state = observe();
  t.done = done_;
  return t;
}

WallLayout parse_layout(const std::string& text) {
  WallLayout layout;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool have_start = false;
  bool have_goal = false;
  std::vector<std::string> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      // Only trailing blank lines are allowed.
      std::string rest;
      while (std::getline(in, rest))
        if (!rest.empty() && rest != "\r")
          throw ParseError("blank line inside layout", line_no);
      break;
    }
    if (layout.cols == 0) {
      layout.cols = line.size();
    } else if (line.size() != layout.cols) {
      throw ParseError("row has " + std::to_string(line.size()) + " cells, expected " +
                           std::to_string(layout.cols),
                       line_no, std::min(line.size(), layout.cols) + 1);
    }
    for (std::size_t c = 0; c < line.size(); ++c) {
      CellKind kind;
      switch (line[c]) {
        case '.':
          kind = CellKind::kObservable;
          break;
        case 'B':
          kind = CellKind::kUnobservable;
          break;
        case '#':
          kind = CellKind::kWall;
          break;
        case 'G':
          kind = CellKind::kGoal;
          have_goal = true;
          break;
        case 'S':
          if (have_start) throw ParseError("second start cell", line_no, c + 1);
          kind = CellKind::kStart;
          have_start = true;
          layout.start = layout.rows * layout.cols + c;
          break;
        default:
          throw ParseError(std::string("unknown cell character '") + line[c] + "'", line_no,
                           c + 1);
      }
      layout.cells.push_back(kind);
    }
    ++layout.rows;
  }
  if (layout.rows == 0) throw ParseError("empty layout", 1);
  if (!have_start) throw ParseError("layout has no start cell 'S'", line_no);
  if (!have_goal) throw ParseError("layout has no goal cell 'G'", line_no);
  return layout;
}

WallLayout load_layout(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open layout file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_layout(buf.str());
}

const std::string& default_wall_layout_text() {
  // A one-cell unobservable corridor, walled off from the open observable
  // region, winds down and up through four vertical legs to the goal. Its
  // only entrance is next to the start. The turns defeat any fixed
  // directional bias, while a uniform random walk still finds the goal in
  // roughly one episode in 1,400.
  static const std::string text = [] {
    constexpr std::size_t n = 40;
    constexpr std::size_t legs = 4;
    constexpr std::size_t top = 2;
    constexpr std::size_t bottom = 12;
    std::vector<std::string> g(n, std::string(n, '.'));
    g[0][0] = 'S';
    for (std::size_t r = 1; r <= bottom + 1; ++r)
      for (std::size_t c = 0; c <= 2 * legs - 1; ++c) g[r][c] = '#';
    for (std::size_t leg = 0; leg < legs; ++leg) {
      const std::size_t c = 2 * leg;
      for (std::size_t r = leg == 0 ? 1 : top; r <= bottom; ++r) g[r][c] = 'B';
      if (leg + 1 < legs) g[leg % 2 == 0 ? bottom : top][c + 1] = 'B';
    }
    g[legs % 2 == 0 ? top : bottom][2 * legs - 2] = 'G';
    std::string out;
    for (const auto& row : g) out += row + "\n";
    return out;
  }();
  return text;
}

WallGridWorld::WallGridWorld(WallLayout layout, std::size_t horizon, double goal_reward)
    : layout_(std::move(layout)), horizon_(horizon), goal_reward_(goal_reward) {
  if (layout_.cells.empty()) throw ConfigError("empty wall layout");
  if (horizon == 0) throw ConfigError("horizon must be positive");
  visited_.assign(layout_.cells.size(), 0);
}

Observation WallGridWorld::observe() const { return {visited_, pos_}; }

Observation WallGridWorld::reset() {
  pos_ = layout_.start;
  steps_ = 0;
  done_ = false;
  reached_goal_ = false;
  std::fill(visited_.begin(), visited_.end(), 0);
  if (layout_.observable(pos_)) visited_[pos_] = 1;
  return observe();
}

Transition WallGridWorld::step(int action) {
  if (done_) throw StateError("step called on a finished wall-grid episode");
  check_action(action, action_count());
  Transition t;
  t.state = observe();
  t.action = action;
  std::size_t row = pos_ / layout_.cols;
  std::size_t col = pos_ % layout_.cols;
  if (move(row, col, action, layout_.rows, layout_.cols) &&
      layout_.at(row, col) != CellKind::kWall)
    pos_ = row * layout_.cols + col;
  if (layout_.observable(pos_)) visited_[pos_] = 1;
  ++steps_;
  if (layout_.cells[pos_] == CellKind::kGoal) {
    reached_goal_ = true;
    t.extrinsic_reward = goal_reward_;
  }
  done_ = reached_goal_ || steps_ >= horizon_;
  t.next_state = observe();
  t.done = done_;
  return t;
}

RandomWalk1D::RandomWalk1D(std::size_t horizon) : horizon_(horizon) {
  if (horizon == 0) throw ConfigError("horizon must be positive");
}

long RandomWalk1D::reset() {
  position_ = 0;
  steps_ = 0;
  return position_;
}

long RandomWalk1D::step(int action) {
  if (done()) throw StateError("random walk has reached its horizon");
  check_action(action, 2);
  position_ += action == 1 ? 1 : -1;
  ++steps_;
  return position_;
}

}  // namespace ice
