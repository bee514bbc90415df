#include "ice/latent_hash.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ice/errors.hpp"

namespace ice {

namespace {

constexpr double kProbClamp = 1e-6;

std::vector<double> to_unit(std::span<const Symbol> state, std::size_t alphabet_size) {
  const double scale = 1.0 / static_cast<double>(alphabet_size - 1);
  std::vector<double> x(state.size());
  for (std::size_t i = 0; i < state.size(); ++i) x[i] = state[i] * scale;
  return x;
}

}  // namespace

HashScheme HashScheme::create(std::size_t latent_dim, std::size_t dense_dim,
                              double noise_halfwidth, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> projection(latent_dim * dense_dim);
  for (double& a : projection) a = normal(rng);
  return HashScheme(latent_dim, dense_dim, std::move(projection), noise_halfwidth, seed);
}

HashScheme::HashScheme(std::size_t latent_dim, std::size_t dense_dim,
                       std::vector<double> projection, double noise_halfwidth,
                       std::uint64_t seed)
    : latent_dim_(latent_dim),
      dense_dim_(dense_dim),
      projection_(std::move(projection)),
      noise_(noise_halfwidth),
      seed_(seed) {
  if (latent_dim == 0 || dense_dim == 0) throw ConfigError("hash dimensions must be positive");
  if (latent_dim > dense_dim) throw ConfigError("latent_dim must not exceed dense_dim");
  if (projection_.size() != latent_dim * dense_dim)
    throw ConfigError("projection matrix has the wrong number of entries");
  if (!(noise_halfwidth >= 0.0)) throw ConfigError("noise half-width must be non-negative");
}

std::vector<Symbol> LatentCode::symbols() const {
  std::vector<Symbol> out(bits.size());
  for (std::size_t j = 0; j < bits.size(); ++j) out[j] = bits[j] > 0 ? 1 : 0;
  return out;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

LatentCode simhash(std::span<const double> dense, const HashScheme& scheme, Rng& rng) {
  if (dense.size() != scheme.dense_dim())
    throw DataError("dense vector has " + std::to_string(dense.size()) +
                    " entries, hash scheme expects " + std::to_string(scheme.dense_dim()));
  std::vector<double> squashed(dense.size());
  const double a = scheme.noise_halfwidth();
  if (a > 0.0) {
    std::uniform_real_distribution<double> noise(-a, a);
    for (std::size_t i = 0; i < dense.size(); ++i) squashed[i] = sigmoid(noise(rng) + dense[i]);
  } else {
    for (std::size_t i = 0; i < dense.size(); ++i) squashed[i] = sigmoid(dense[i]);
  }
  LatentCode code;
  code.bits.resize(scheme.latent_dim());
  for (std::size_t j = 0; j < scheme.latent_dim(); ++j) {
    const auto row = scheme.row(j);
    double s = 0.0;
    for (std::size_t i = 0; i < squashed.size(); ++i) s += row[i] * squashed[i];
    code.bits[j] = s >= 0.0 ? 1 : -1;
  }
  return code;
}

Autoencoder::Autoencoder(const AutoencoderConfig& config, Rng& rng)
    : config_(config),
      encoder_({config.observation_size, config.hidden, config.dense_dim},
               {Activation::kRelu, Activation::kIdentity}),
      decoder_({config.dense_dim, config.hidden, config.observation_size},
               {Activation::kRelu, Activation::kIdentity}) {
  if (config.latent_dim == 0 || config.latent_dim > config.dense_dim)
    throw ConfigError("latent_dim must lie in [1, dense_dim]");
  if (config.update_period == 0) throw ConfigError("autoencoder update period must be positive");
  if (!(config.aux_weight >= 0.0)) throw ConfigError("auxiliary weight must be non-negative");
  encoder_.initialize(rng);
  decoder_.initialize(rng);
}

std::vector<double> Autoencoder::encode_logits(std::span<const double> state) const {
  return encoder_.predict(state);
}

std::vector<double> Autoencoder::encode(std::span<const double> state) const {
  auto e = encode_logits(state);
  for (double& v : e) v = sigmoid(v);
  return e;
}

std::vector<double> Autoencoder::decode(std::span<const double> dense) const {
  auto q = decoder_.predict(dense);
  for (double& v : q) v = sigmoid(v);
  return q;
}

ReconstructionLoss reconstruction_loss(const std::vector<std::vector<double>>& batch,
                                       const Autoencoder& ae, Rng* rng) {
  if (batch.empty()) throw DataError("reconstruction loss on an empty batch");
  const auto& cfg = ae.config();
  const double n = static_cast<double>(batch.size());
  const double aux_scale = cfg.aux_weight / static_cast<double>(cfg.latent_dim);
  const bool noisy = rng != nullptr && cfg.training_noise > 0.0;
  std::uniform_real_distribution<double> noise(-cfg.training_noise, cfg.training_noise);

  ReconstructionLoss out{0.0, 0.0, 0.0, {NetGrads(ae.encoder()), NetGrads(ae.decoder())}};
  Tape enc_tape;
  Tape dec_tape;
  std::vector<double> z(cfg.dense_dim);
  std::vector<double> grad_y(cfg.observation_size);
  std::vector<double> grad_z;
  std::vector<double> grad_logits(cfg.dense_dim);

  for (const auto& x : batch) {
    const auto logits = ae.encoder().forward(x, enc_tape);
    double aux = 0.0;
    for (std::size_t j = 0; j < cfg.dense_dim; ++j) {
      const double e = sigmoid(logits[j]);
      aux += std::min(e, 1.0 - e);
      const double u = noisy ? noise(*rng) : 0.0;
      z[j] = sigmoid(logits[j] + u);
      const double slope = e < 0.5 ? 1.0 : (e > 0.5 ? -1.0 : 0.0);
      grad_logits[j] = aux_scale * slope * e * (1.0 - e) / n;
    }
    aux *= aux_scale;

    const auto y = ae.decoder().forward(z, dec_tape);
    double log_p = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double q_raw = sigmoid(y[i]);
      const double q = std::clamp(q_raw, kProbClamp, 1.0 - kProbClamp);
      log_p += x[i] * std::log(q) + (1.0 - x[i]) * std::log(1.0 - q);
      const bool clamped = q_raw < kProbClamp || q_raw > 1.0 - kProbClamp;
      grad_y[i] = clamped ? 0.0 : (q_raw - x[i]) / n;
    }
    out.log_likelihood += log_p / n;
    out.auxiliary += aux / n;

    ae.decoder().backward(dec_tape, grad_y, out.grads.decoder, &grad_z);
    for (std::size_t j = 0; j < cfg.dense_dim; ++j)
      grad_logits[j] += grad_z[j] * z[j] * (1.0 - z[j]);
    ae.encoder().backward(enc_tape, grad_logits, out.grads.encoder);
  }
  out.loss = -out.log_likelihood + out.auxiliary;
  return out;
}

ReconstructionBuffer::ReconstructionBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ConfigError("buffer capacity must be positive");
}

void ReconstructionBuffer::push(BufferEntry entry) {
  if (entries_.size() == capacity_) entries_.pop_front();
  entries_.push_back(std::move(entry));
}

AeUpdate maybe_update_autoencoder(const ReconstructionBuffer& buffer, Autoencoder& ae,
                                  Optimizer& encoder_opt, Optimizer& decoder_opt,
                                  std::size_t policy_update_index, std::size_t alphabet_size,
                                  Rng& rng) {
  if (policy_update_index % ae.config().update_period != 0) return AeUpdate::kSkipped;
  if (buffer.empty()) return AeUpdate::kEmptyBuffer;
  std::uniform_int_distribution<std::size_t> pick(0, buffer.size() - 1);
  std::vector<std::vector<double>> batch;
  for (std::size_t b = 0; b < ae.config().batch_size; ++b)
    batch.push_back(to_unit(buffer[pick(rng)].state, alphabet_size));
  const auto result = reconstruction_loss(batch, ae, &rng);
  encoder_opt.step(ae.encoder(), result.grads.encoder);
  decoder_opt.step(ae.decoder(), result.grads.decoder);
  return AeUpdate::kUpdated;
}

IceReward latent_ice_step(std::span<const Symbol> state, std::size_t alphabet_size,
                          CountTable& table, const HashScheme& scheme,
                          const Autoencoder& hash_encoder, ReconstructionBuffer& buffer,
                          Rng& rng, bool store_reconstruction) {
  if (table.dims() != scheme.latent_dim() || table.alphabet_size() != 2)
    throw ConfigError("latent count table must be latent_dim x 2");
  const auto x = to_unit(state, alphabet_size);
  const auto logits = hash_encoder.encode_logits(x);
  LatentCode code = simhash(logits, scheme, rng);
  const auto symbols = code.symbols();

  BufferEntry entry{{state.begin(), state.end()}, code, {}};
  if (store_reconstruction) {
    std::vector<double> e(logits.size());
    for (std::size_t j = 0; j < e.size(); ++j) e[j] = sigmoid(logits[j]);
    const auto q = hash_encoder.decode(e);
    entry.reconstruction.assign(q.begin(), q.end());
  }
  buffer.push(std::move(entry));

  if (table.steps() == 0) {
    table.absorb(symbols);
    return {0.0};
  }
  return table.ice_step(symbols);
}

}  // namespace ice
