#include "ice/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "ice/errors.hpp"

namespace ice {

CountTable::CountTable(std::size_t dims, std::size_t alphabet_size)
    : dims_(dims), alphabet_(alphabet_size) {
  if (dims == 0) throw ConfigError("count table needs at least one dimension");
  if (alphabet_size < 2)
    throw ConfigError("count table alphabet must have at least 2 symbols, got " +
                      std::to_string(alphabet_size));
  counts_.assign(dims_ * alphabet_, 0);
  clogc_.assign(dims_, 0.0);
}

void CountTable::validate(std::span<const Symbol> state) const {
  if (state.size() != dims_)
    throw DataError("state has " + std::to_string(state.size()) +
                    " elements, table expects " + std::to_string(dims_));
  for (std::size_t d = 0; d < dims_; ++d) {
    if (state[d] >= alphabet_)
      throw DataError("value " + std::to_string(state[d]) + " at dimension " +
                      std::to_string(d) + " is outside the alphabet of size " +
                      std::to_string(alphabet_));
  }
}

void CountTable::check_nonempty() const {
  if (steps_ == 0) throw StateError("count table holds no states yet");
}

double CountTable::xlogx(std::uint32_t c) {
  while (xlogx_cache_.size() <= c) {
    const double x = static_cast<double>(xlogx_cache_.size());
    xlogx_cache_.push_back(x * std::log2(x));
  }
  return xlogx_cache_[c];
}

void CountTable::absorb(std::span<const Symbol> state) {
  validate(state);
  double added = 0.0;
  for (std::size_t d = 0; d < dims_; ++d) {
    std::uint32_t& c = counts_[d * alphabet_ + state[d]];
    const double delta = xlogx(c + 1) - xlogx(c);
    ++c;
    clogc_[d] += delta;
    added += delta;
  }
  clogc_sum_ += added;
  ++steps_;
}

std::vector<double> CountTable::occurrence_probabilities(std::size_t d) const {
  check_nonempty();
  if (d >= dims_) throw DataError("dimension " + std::to_string(d) + " out of range");
  std::vector<double> p(alphabet_);
  const double n = static_cast<double>(steps_);
  for (std::size_t k = 0; k < alphabet_; ++k) p[k] = count(d, k) / n;
  return p;
}

double CountTable::element_entropy(std::size_t d) const {
  check_nonempty();
  if (d >= dims_) throw DataError("dimension " + std::to_string(d) + " out of range");
  const double n = static_cast<double>(steps_);
  return std::max(0.0, std::log2(n) - clogc_[d] / n);
}

EntropySnapshot CountTable::trajectory_entropy() const {
  check_nonempty();
  EntropySnapshot snap;
  snap.step = steps_ - 1;
  snap.per_dim_bits.resize(dims_);
  for (std::size_t d = 0; d < dims_; ++d) {
    snap.per_dim_bits[d] = element_entropy(d);
    snap.total_bits += snap.per_dim_bits[d];
  }
  return snap;
}

double CountTable::total_bits() const {
  check_nonempty();
  const double n = static_cast<double>(steps_);
  return std::max(0.0, static_cast<double>(dims_) * std::log2(n) - clogc_sum_ / n);
}

IceReward CountTable::ice_step(std::span<const Symbol> next_state) {
  check_nonempty();
  validate(next_state);
  const double before = total_bits();
  absorb(next_state);
  return {total_bits() - before};
}

void CountTable::reset() {
  std::fill(counts_.begin(), counts_.end(), 0);
  std::fill(clogc_.begin(), clogc_.end(), 0.0);
  clogc_sum_ = 0.0;
  steps_ = 0;
}

double shannon_bits(std::span<const double> p) {
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h -= v * std::log2(v);
  return h;
}

double joint_entropy_oracle(const std::vector<std::vector<Symbol>>& trajectory) {
  if (trajectory.empty()) throw DataError("joint entropy of an empty trajectory");
  const std::size_t dims = trajectory.front().size();
  std::map<std::vector<Symbol>, std::size_t> occurrences;
  for (const auto& s : trajectory) {
    if (s.size() != dims) throw DataError("trajectory states differ in length");
    ++occurrences[s];
  }
  const double n = static_cast<double>(trajectory.size());
  double h = 0.0;
  for (const auto& [state, c] : occurrences) {
    const double p = c / n;
    h -= p * std::log2(p);
  }
  return h;
}

double kl_to_uniform(std::span<const double> p) {
  if (p.empty()) throw DataError("empty distribution");
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) throw DataError("distribution has a negative or NaN entry");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw DataError("distribution sums to " + std::to_string(sum) + ", not 1");
  return std::log2(static_cast<double>(p.size())) - shannon_bits(p);
}

}  // namespace ice
