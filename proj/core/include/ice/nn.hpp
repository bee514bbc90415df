#pragma once

// Small fully-connected networks with hand-written backpropagation.
//
// Weights are stored input-major (w[i * out + o]) so that a forward pass over
// a sparse input only touches the rows of its nonzero entries. The grid-world
// observations are mostly zeros, which makes this the dominant saving.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace ice {

using Rng = std::mt19937_64;

enum class Activation { kIdentity, kRelu, kTanh, kSigmoid };

struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  Activation activation = Activation::kIdentity;
  std::vector<double> weights;  // in * out, input-major
  std::vector<double> bias;     // out
};

struct LayerGrads {
  std::vector<double> weights;
  std::vector<double> bias;
};

class NetGrads {
 public:
  NetGrads() = default;
  explicit NetGrads(const class DenseNet& net);

  void zero();
  void scale(double factor);
  void add(const NetGrads& other);
  double squared_norm() const;

  std::vector<LayerGrads>& layers() { return layers_; }
  const std::vector<LayerGrads>& layers() const { return layers_; }

 private:
  std::vector<LayerGrads> layers_;
};

// Activations recorded by a forward pass. values[0] is the input and
// values[l + 1] the post-activation output of layer l.
struct Tape {
  std::vector<std::vector<double>> values;
};

class DenseNet {
 public:
  DenseNet() = default;
  // widths = {input, hidden..., output}; one activation per layer.
  DenseNet(std::vector<std::size_t> widths, std::vector<Activation> activations);

  // He-uniform for ReLU layers, Glorot-uniform otherwise.
  void initialize(Rng& rng);
  void zero_layer(std::size_t layer);
  void scale_layer(std::size_t layer, double factor);

  std::size_t input_size() const;
  std::size_t output_size() const;
  std::size_t parameter_count() const;

  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }

  // Throws DataError on an input of the wrong width.
  std::span<const double> forward(std::span<const double> input, Tape& tape) const;
  std::vector<double> predict(std::span<const double> input) const;

  // Accumulates parameter gradients for d(loss)/d(output) = grad_output into
  // grads. When grad_input is non-null it receives d(loss)/d(input).
  void backward(const Tape& tape, std::span<const double> grad_output, NetGrads& grads,
                std::vector<double>* grad_input = nullptr) const;

  // All parameters, layer by layer, weights before bias.
  std::vector<double> flatten() const;
  void unflatten(std::span<const double> params);
  std::vector<std::size_t> widths() const;

 private:
  std::vector<DenseLayer> layers_;
};

const char* activation_name(Activation a);
Activation parse_activation(const std::string& name);

// Plain descent step w <- w - lr * g. Throws NumericError naming the layer on
// a shape mismatch or non-finite gradient; the network is left untouched.
void apply_gradients(DenseNet& net, const NetGrads& grads, double learning_rate);

enum class OptimizerKind { kSgd, kAdam };

class Optimizer {
 public:
  Optimizer() = default;
  Optimizer(OptimizerKind kind, double learning_rate);

  // Same validation contract as apply_gradients.
  void step(DenseNet& net, const NetGrads& grads);

  OptimizerKind kind() const { return kind_; }
  double learning_rate() const { return lr_; }

 private:
  OptimizerKind kind_ = OptimizerKind::kSgd;
  double lr_ = 1e-4;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  std::uint64_t t_ = 0;
  std::vector<LayerGrads> m_;
  std::vector<LayerGrads> v_;
};

OptimizerKind parse_optimizer(const std::string& name);
const char* optimizer_name(OptimizerKind kind);

// FNV-1a over the raw parameter bytes; used to prove frozen networks stay frozen.
std::uint64_t checksum(const DenseNet& net);

}  // namespace ice
