#pragma once

// ICE on learned discrete codes: an autoencoder embeds observations, SimHash
// turns the embedding into k sign bits, and the count table runs on bits.

#include <cstddef>
#include <cstdint>
#include <deque>
#include <span>
#include <vector>

#include "ice/entropy.hpp"
#include "ice/nn.hpp"

namespace ice {

// Fixed Gaussian projection for SimHash.
class HashScheme {
 public:
  // Draws a latent_dim x dense_dim matrix with N(0, 1) entries from seed.
  static HashScheme create(std::size_t latent_dim, std::size_t dense_dim,
                           double noise_halfwidth, std::uint64_t seed);
  // Explicit projection (row-major, latent_dim x dense_dim).
  HashScheme(std::size_t latent_dim, std::size_t dense_dim, std::vector<double> projection,
             double noise_halfwidth, std::uint64_t seed);

  std::size_t latent_dim() const { return latent_dim_; }
  std::size_t dense_dim() const { return dense_dim_; }
  double noise_halfwidth() const { return noise_; }
  std::uint64_t seed() const { return seed_; }
  std::span<const double> projection() const { return projection_; }
  std::span<const double> row(std::size_t j) const {
    return {projection_.data() + j * dense_dim_, dense_dim_};
  }

 private:
  std::size_t latent_dim_;
  std::size_t dense_dim_;
  std::vector<double> projection_;
  double noise_;
  std::uint64_t seed_;
};

struct LatentCode {
  std::vector<std::int8_t> bits;  // each -1 or +1

  // -1 -> 0, +1 -> 1, for use as count-table symbols.
  std::vector<Symbol> symbols() const;
};

double sigmoid(double x);

// sgn(A * sigmoid(u + dense)) with u ~ U(-a, a) drawn fresh per call and
// sgn(0) := +1. No random numbers are consumed when a == 0.
// Throws DataError when dense.size() != scheme.dense_dim().
LatentCode simhash(std::span<const double> dense, const HashScheme& scheme, Rng& rng);

struct AutoencoderConfig {
  std::size_t observation_size = 0;
  std::size_t hidden = 256;
  std::size_t dense_dim = 128;
  std::size_t latent_dim = 16;     // k, normalizes the auxiliary term
  double aux_weight = 0.5;         // lambda
  std::size_t update_period = 3;   // in policy updates
  double training_noise = 0.3;     // a, applied only while training
  std::size_t batch_size = 32;
};

// Encoder: observation -> hidden (ReLU) -> dense_dim pre-activations.
// Decoder: dense_dim -> hidden (ReLU) -> observation logits.
// The code fed to SimHash is the encoder's pre-activation vector; encode()
// returns its sigmoid, which lies in (0, 1).
class Autoencoder {
 public:
  Autoencoder() = default;
  Autoencoder(const AutoencoderConfig& config, Rng& rng);

  const AutoencoderConfig& config() const { return config_; }

  // Throws DataError on an input of the wrong width.
  std::vector<double> encode_logits(std::span<const double> state) const;
  std::vector<double> encode(std::span<const double> state) const;
  // Bernoulli probabilities for each observation element.
  std::vector<double> decode(std::span<const double> dense) const;

  DenseNet& encoder() { return encoder_; }
  DenseNet& decoder() { return decoder_; }
  const DenseNet& encoder() const { return encoder_; }
  const DenseNet& decoder() const { return decoder_; }

 private:
  AutoencoderConfig config_;
  DenseNet encoder_;
  DenseNet decoder_;
};

struct AutoencoderGrads {
  NetGrads encoder;
  NetGrads decoder;
};

struct ReconstructionLoss {
  double loss = 0.0;
  double log_likelihood = 0.0;  // batch mean of log p(s)
  double auxiliary = 0.0;       // batch mean of (lambda / k) * sum_j g_j
  AutoencoderGrads grads;
};

// Observations are element values in [0, 1]. Computes
//   -(1/N) sum_i [ log p(s_i) - (lambda/k) sum_j min(e_j, 1 - e_j) ]
// with decoded probabilities clamped to [1e-6, 1 - 1e-6]. Training noise is
// injected before the decoder's sigmoid input only when rng is non-null.
// Throws DataError on an empty batch.
ReconstructionLoss reconstruction_loss(const std::vector<std::vector<double>>& batch,
                                       const Autoencoder& ae, Rng* rng = nullptr);

struct BufferEntry {
  std::vector<Symbol> state;
  LatentCode code;
  std::vector<float> reconstruction;
};

// Bounded FIFO; the oldest entry is evicted first.
class ReconstructionBuffer {
 public:
  explicit ReconstructionBuffer(std::size_t capacity);

  void push(BufferEntry entry);
  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return entries_.empty(); }
  const BufferEntry& operator[](std::size_t i) const { return entries_[i]; }

 private:
  std::size_t capacity_;
  std::deque<BufferEntry> entries_;
};

enum class AeUpdate { kSkipped, kUpdated, kEmptyBuffer };

// One optimizer step on a mini-batch sampled from the buffer when
// policy_update_index is a multiple of the update period.
AeUpdate maybe_update_autoencoder(const ReconstructionBuffer& buffer, Autoencoder& ae,
                                  Optimizer& encoder_opt, Optimizer& decoder_opt,
                                  std::size_t policy_update_index, std::size_t alphabet_size,
                                  Rng& rng);

// Encodes state with hash_encoder (a lagged copy of the autoencoder), hashes,
// records (state, code, reconstruction) in the buffer, and absorbs the code.
// The first state of a trajectory earns 0. The table must be k x 2.
IceReward latent_ice_step(std::span<const Symbol> state, std::size_t alphabet_size,
                          CountTable& table, const HashScheme& scheme,
                          const Autoencoder& hash_encoder, ReconstructionBuffer& buffer,
                          Rng& rng, bool store_reconstruction = true);

}  // namespace ice
