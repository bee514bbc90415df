#include "ice/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "ice/errors.hpp"

namespace ice {

namespace {

double activate(Activation a, double x) {
  switch (a) {
    case Activation::kIdentity:
      return x;
    case Activation::kRelu:
      return x > 0.0 ? x : 0.0;
    case Activation::kTanh:
      return std::tanh(x);
    case Activation::kSigmoid:
      return 1.0 / (1.0 + std::exp(-x));
  }
  return x;
}

// Derivative expressed through the activation's output y.
double derivative_from_output(Activation a, double y) {
  switch (a) {
    case Activation::kIdentity:
      return 1.0;
    case Activation::kRelu:
      return y > 0.0 ? 1.0 : 0.0;
    case Activation::kTanh:
      return 1.0 - y * y;
    case Activation::kSigmoid:
      return y * (1.0 - y);
  }
  return 1.0;
}

bool all_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

void check_update(const DenseNet& net, const NetGrads& grads) {
  const auto& layers = net.layers();
  if (grads.layers().size() != layers.size())
    throw NumericError("gradient has " + std::to_string(grads.layers().size()) +
                       " layers, network has " + std::to_string(layers.size()));
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& g = grads.layers()[l];
    if (g.weights.size() != layers[l].weights.size() ||
        g.bias.size() != layers[l].bias.size())
      throw NumericError("gradient shape mismatch in layer " + std::to_string(l));
    if (!all_finite(g.weights) || !all_finite(g.bias))
      throw NumericError("non-finite gradient in layer " + std::to_string(l));
  }
}

}  // namespace

NetGrads::NetGrads(const DenseNet& net) {
  for (const auto& layer : net.layers())
    layers_.push_back({std::vector<double>(layer.weights.size(), 0.0),
                       std::vector<double>(layer.bias.size(), 0.0)});
}

void NetGrads::zero() {
  for (auto& l : layers_) {
    std::fill(l.weights.begin(), l.weights.end(), 0.0);
    std::fill(l.bias.begin(), l.bias.end(), 0.0);
  }
}

void NetGrads::scale(double factor) {
  for (auto& l : layers_) {
    for (double& w : l.weights) w *= factor;
    for (double& b : l.bias) b *= factor;
  }
}

void NetGrads::add(const NetGrads& other) {
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    auto& dst = layers_[l];
    const auto& src = other.layers_[l];
    for (std::size_t i = 0; i < dst.weights.size(); ++i) dst.weights[i] += src.weights[i];
    for (std::size_t i = 0; i < dst.bias.size(); ++i) dst.bias[i] += src.bias[i];
  }
}

double NetGrads::squared_norm() const {
  double s = 0.0;
  for (const auto& l : layers_) {
    for (double w : l.weights) s += w * w;
    for (double b : l.bias) s += b * b;
  }
  return s;
}

DenseNet::DenseNet(std::vector<std::size_t> widths, std::vector<Activation> activations) {
  if (widths.size() < 2 || activations.size() + 1 != widths.size())
    throw ConfigError("network needs one activation per layer");
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    if (widths[l] == 0 || widths[l + 1] == 0) throw ConfigError("zero-width layer");
    DenseLayer layer;
    layer.in = widths[l];
    layer.out = widths[l + 1];
    layer.activation = activations[l];
    layer.weights.assign(layer.in * layer.out, 0.0);
    layer.bias.assign(layer.out, 0.0);
    layers_.push_back(std::move(layer));
  }
}

void DenseNet::initialize(Rng& rng) {
  for (auto& layer : layers_) {
    const double fan_in = static_cast<double>(layer.in);
    const double fan_out = static_cast<double>(layer.out);
    const double limit = layer.activation == Activation::kRelu
                             ? std::sqrt(6.0 / fan_in)
                             : std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (double& w : layer.weights) w = dist(rng);
    std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
  }
}

void DenseNet::zero_layer(std::size_t layer) {
  auto& l = layers_.at(layer);
  std::fill(l.weights.begin(), l.weights.end(), 0.0);
  std::fill(l.bias.begin(), l.bias.end(), 0.0);
}

void DenseNet::scale_layer(std::size_t layer, double factor) {
  for (double& w : layers_.at(layer).weights) w *= factor;
}

std::size_t DenseNet::input_size() const { return layers_.empty() ? 0 : layers_.front().in; }
std::size_t DenseNet::output_size() const { return layers_.empty() ? 0 : layers_.back().out; }

std::size_t DenseNet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weights.size() + l.bias.size();
  return n;
}

std::span<const double> DenseNet::forward(std::span<const double> input, Tape& tape) const {
  if (input.size() != input_size())
    throw DataError("network input has width " + std::to_string(input.size()) +
                    ", expected " + std::to_string(input_size()));
  tape.values.resize(layers_.size() + 1);
  tape.values[0].assign(input.begin(), input.end());
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const DenseLayer& layer = layers_[l];
    const std::vector<double>& x = tape.values[l];
    std::vector<double>& y = tape.values[l + 1];
    y.assign(layer.bias.begin(), layer.bias.end());
    for (std::size_t i = 0; i < layer.in; ++i) {
      const double xi = x[i];
      if (xi == 0.0) continue;
      const double* row = layer.weights.data() + i * layer.out;
      for (std::size_t o = 0; o < layer.out; ++o) y[o] += xi * row[o];
    }
    if (layer.activation != Activation::kIdentity)
      for (double& v : y) v = activate(layer.activation, v);
  }
  return tape.values.back();
}

std::vector<double> DenseNet::predict(std::span<const double> input) const {
  Tape tape;
  auto out = forward(input, tape);
  return {out.begin(), out.end()};
}

void DenseNet::backward(const Tape& tape, std::span<const double> grad_output,
                        NetGrads& grads, std::vector<double>* grad_input) const {
  if (grad_output.size() != output_size())
    throw DataError("output gradient width mismatch");
  std::vector<double> delta(grad_output.begin(), grad_output.end());
  std::vector<double> upstream;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const DenseLayer& layer = layers_[l];
    const std::vector<double>& x = tape.values[l];
    const std::vector<double>& y = tape.values[l + 1];
    if (layer.activation != Activation::kIdentity)
      for (std::size_t o = 0; o < layer.out; ++o)
        delta[o] *= derivative_from_output(layer.activation, y[o]);

    LayerGrads& g = grads.layers()[l];
    for (std::size_t o = 0; o < layer.out; ++o) g.bias[o] += delta[o];
    for (std::size_t i = 0; i < layer.in; ++i) {
      const double xi = x[i];
      if (xi == 0.0) continue;
      double* row = g.weights.data() + i * layer.out;
      for (std::size_t o = 0; o < layer.out; ++o) row[o] += xi * delta[o];
    }

    const bool need_upstream = l > 0 || grad_input != nullptr;
    if (!need_upstream) break;
    // A ReLU unit that output zero passes no gradient, so its row can be skipped.
    const bool prev_relu = l > 0 && layers_[l - 1].activation == Activation::kRelu;
    upstream.assign(layer.in, 0.0);
    for (std::size_t i = 0; i < layer.in; ++i) {
      if (prev_relu && x[i] == 0.0) continue;
      const double* row = layer.weights.data() + i * layer.out;
      double s = 0.0;
      for (std::size_t o = 0; o < layer.out; ++o) s += row[o] * delta[o];
      upstream[i] = s;
    }
    if (l == 0) {
      *grad_input = upstream;
      break;
    }
    delta.swap(upstream);
  }
}

std::vector<double> DenseNet::flatten() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (const auto& l : layers_) {
    out.insert(out.end(), l.weights.begin(), l.weights.end());
    out.insert(out.end(), l.bias.begin(), l.bias.end());
  }
  return out;
}

void DenseNet::unflatten(std::span<const double> params) {
  if (params.size() != parameter_count())
    throw DataError("parameter vector has " + std::to_string(params.size()) +
                    " entries, network has " + std::to_string(parameter_count()));
  std::size_t pos = 0;
  for (auto& l : layers_) {
    std::copy_n(params.begin() + pos, l.weights.size(), l.weights.begin());
    pos += l.weights.size();
    std::copy_n(params.begin() + pos, l.bias.size(), l.bias.begin());
    pos += l.bias.size();
  }
}

std::vector<std::size_t> DenseNet::widths() const {
  std::vector<std::size_t> w;
  if (layers_.empty()) return w;
  w.push_back(layers_.front().in);
  for (const auto& l : layers_) w.push_back(l.out);
  return w;
}

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::kIdentity:
      return "identity";
    case Activation::kRelu:
      return "relu";
    case Activation::kTanh:
      return "tanh";
    case Activation::kSigmoid:
      return "sigmoid";
  }
  return "identity";
}

Activation parse_activation(const std::string& name) {
  if (name == "identity") return Activation::kIdentity;
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  if (name == "sigmoid") return Activation::kSigmoid;
  throw DataError("unknown activation '" + name + "'");
}

void apply_gradients(DenseNet& net, const NetGrads& grads, double learning_rate) {
  check_update(net, grads);
  auto& layers = net.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& g = grads.layers()[l];
    for (std::size_t i = 0; i < g.weights.size(); ++i)
      layers[l].weights[i] -= learning_rate * g.weights[i];
    for (std::size_t i = 0; i < g.bias.size(); ++i)
      layers[l].bias[i] -= learning_rate * g.bias[i];
  }
}

Optimizer::Optimizer(OptimizerKind kind, double learning_rate)
    : kind_(kind), lr_(learning_rate) {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
    throw ConfigError("learning rate must be finite and non-negative");
}

void Optimizer::step(DenseNet& net, const NetGrads& grads) {
  if (kind_ == OptimizerKind::kSgd) {
    apply_gradients(net, grads, lr_);
    return;
  }
  check_update(net, grads);
  auto& layers = net.layers();
  if (m_.empty()) {
    NetGrads zeros(net);
    m_ = zeros.layers();
    v_ = zeros.layers();
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  const double step = lr_ * std::sqrt(c2) / c1;
  auto update = [&](std::vector<double>& w, const std::vector<double>& g,
                    std::vector<double>& m, std::vector<double>& v) {
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
      w[i] -= step * m[i] / (std::sqrt(v[i]) + eps_);
    }
  };
  for (std::size_t l = 0; l < layers.size(); ++l) {
    update(layers[l].weights, grads.layers()[l].weights, m_[l].weights, v_[l].weights);
    update(layers[l].bias, grads.layers()[l].bias, m_[l].bias, v_[l].bias);
  }
}

OptimizerKind parse_optimizer(const std::string& name) {
  if (name == "sgd") return OptimizerKind::kSgd;
  if (name == "adam") return OptimizerKind::kAdam;
  throw DataError("unknown optimizer '" + name + "'");
}

const char* optimizer_name(OptimizerKind kind) {
  return kind == OptimizerKind::kSgd ? "sgd" : "adam";
}

std::uint64_t checksum(const DenseNet& net) {
  std::uint64_t h = 1469598103934665603ull;
  for (double v : net.flatten()) {
    unsigned char bytes[sizeof(double)];
    std::memcpy(bytes, &v, sizeof v);
    for (unsigned char b : bytes) {
      h ^= b;
      h *= 1099511628211ull;
    }
  }
  return h;
}

}  // namespace ice
