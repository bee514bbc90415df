#pragma once

// Trajectory count statistics and the information-content (ICE) reward.
//
// A CountTable tracks, for every state element d, how often each symbol k
// has appeared within the current trajectory. The factored trajectory
// entropy is the sum over elements of the Shannon entropy (bits) of those
// empirical distributions; the ICE reward is its step-over-step increase.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ice {

// One state element value, already mapped to an alphabet index.
using Symbol = std::uint16_t;

struct EntropySnapshot {
  double total_bits = 0.0;
  std::vector<double> per_dim_bits;
  std::size_t step = 0;  // index t of the last absorbed state
};

struct IceReward {
  double value_bits = 0.0;
};

class CountTable {
 public:
  // Throws ConfigError when dims == 0 or alphabet_size < 2.
  CountTable(std::size_t dims, std::size_t alphabet_size);

  std::size_t dims() const { return dims_; }
  std::size_t alphabet_size() const { return alphabet_; }
  std::size_t steps() const { return steps_; }

  std::uint32_t count(std::size_t d, std::size_t k) const {
    return counts_[d * alphabet_ + k];
  }
  std::span<const std::uint32_t> counts(std::size_t d) const {
    return {counts_.data() + d * alphabet_, alphabet_};
  }

  // Cached sum_k c*log2(c) for element d.
  double sum_clogc(std::size_t d) const { return clogc_[d]; }

  // Adds one state. Throws DataError (table untouched) on length mismatch or
  // an out-of-alphabet value.
  void absorb(std::span<const Symbol> state);

  // counts[d] / steps. Throws StateError before the first absorb.
  std::vector<double> occurrence_probabilities(std::size_t d) const;

  double element_entropy(std::size_t d) const;
  EntropySnapshot trajectory_entropy() const;

  // Factored entropy from the aggregate accumulator, O(1).
  double total_bits() const;

  // Absorbs next_state and returns the entropy gain. Requires at least one
  // state already absorbed.
  IceReward ice_step(std::span<const Symbol> next_state);

  // Clears all counts for a new trajectory.
  void reset();

 private:
  void validate(std::span<const Symbol> state) const;
  void check_nonempty() const;
  double xlogx(std::uint32_t c);

  std::size_t dims_;
  std::size_t alphabet_;
  std::size_t steps_ = 0;
  std::vector<std::uint32_t> counts_;
  std::vector<double> clogc_;
  double clogc_sum_ = 0.0;
  // c*log2(c) for c = 0..size()-1; counts never exceed steps, so the table
  // grows by at most one entry per absorbed state.
  std::vector<double> xlogx_cache_{0.0};
};

// Shannon entropy in bits of a probability vector (0*log 0 = 0).
double shannon_bits(std::span<const double> p);

// Entropy (bits) of the empirical distribution over whole states.
// Throws DataError on an empty or ragged trajectory.
double joint_entropy_oracle(const std::vector<std::vector<Symbol>>& trajectory);

// KL divergence (bits) from p to the uniform distribution on p.size() symbols.
// Throws DataError unless p is non-negative and sums to 1 within 1e-9.
double kl_to_uniform(std::span<const double> p);

}  // namespace ice
