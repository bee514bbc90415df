#pragma once

// Actor-critic learner, reward mixing, and baseline intrinsic rewards.

#include <cstddef>
#include <span>
#include <vector>

#include "ice/nn.hpp"

namespace ice {

struct LossWeights {
  double alpha_value = 0.5;
  double alpha_policy = 1.0;
  double alpha_entropy = 0.01;
  double gamma = 0.99;
  double beta = 0.5;
  std::size_t k_steps = 20;
  double learning_rate = 1e-4;

  // Throws ConfigError on negative or non-finite weights, gamma outside
  // (0, 1], k_steps == 0, or a non-positive learning rate.
  void validate() const;
};

struct PolicyOutput {
  std::vector<double> probabilities;
  double value = 0.0;
};

struct PolicyValueGrads {
  NetGrads trunk;
  NetGrads policy;
  NetGrads value;

  void zero();
  double squared_norm() const;
  void scale(double factor);
};

// Shared trunk (input -> hidden -> hidden, ReLU) with a softmax policy head
// and a scalar value head.
class PolicyValueNet {
 public:
  PolicyValueNet() = default;
  PolicyValueNet(std::size_t input_size, int action_count, std::size_t hidden, Rng& rng);

  PolicyOutput forward(std::span<const double> observation) const;

  // d log pi(action | observation) / d observation.
  std::vector<double> log_prob_input_gradient(std::span<const double> observation,
                                              int action) const;

  std::size_t input_size() const { return trunk_.input_size(); }
  int action_count() const { return static_cast<int>(policy_.output_size()); }

  DenseNet& trunk() { return trunk_; }
  DenseNet& policy_head() { return policy_; }
  DenseNet& value_head() { return value_; }
  const DenseNet& trunk() const { return trunk_; }
  const DenseNet& policy_head() const { return policy_; }
  const DenseNet& value_head() const { return value_; }

  PolicyValueGrads make_grads() const;

  struct Tapes {
    Tape trunk, policy, value;
  };
  PolicyOutput forward(std::span<const double> observation, Tapes& tapes) const;
  // Back-propagates d(loss)/d(logits) and d(loss)/d(value).
  void backward(const Tapes& tapes, std::span<const double> grad_logits, double grad_value,
                PolicyValueGrads& grads, std::vector<double>* grad_input = nullptr) const;

 private:
  DenseNet trunk_;
  DenseNet policy_;
  DenseNet value_;
};

std::vector<double> softmax(std::span<const double> logits);

// sum_{i<k} gamma^i r_i + gamma^k V(s_k) - V(s_0), with V(s_k) := 0 when the
// segment ends the episode. values has k + 1 entries.
double k_step_advantage(std::span<const double> rewards, std::span<const double> values,
                        double gamma, bool done_at_end);

// extrinsic + beta * intrinsic.
double mix_reward(double extrinsic, double intrinsic, double beta);

// A contiguous trajectory segment of at most k_steps transitions.
struct Segment {
  std::vector<std::vector<double>> observations;  // s_t .. s_{t+n-1}
  std::vector<int> actions;
  std::vector<double> rewards;  // mixed rewards
  std::vector<double> bootstrap_observation;  // s_{t+n}; unused when done_at_end
  bool done_at_end = false;
};

struct LossReport {
  double value = 0.0;
  double policy = 0.0;
  double entropy = 0.0;
  double total() const { return value + policy + entropy; }
};

// Losses summed over the segment:
//   value   = alpha_value * (R - V)^2
//   policy  = -alpha_policy * A * log pi(a|s)    (A held constant)
//   entropy = -alpha_entropy * H(pi(.|s))        (nats)
// where R is the bootstrapped n-step return and A = R - V. Gradients of the
// summed loss are accumulated into grads. Throws DataError on an empty segment.
LossReport actor_critic_losses(const Segment& segment, const PolicyValueNet& net,
                               const LossWeights& weights, PolicyValueGrads& grads);

void apply_gradients(PolicyValueNet& net, const PolicyValueGrads& grads, double learning_rate);

// Optimizer state for the three parts of a PolicyValueNet.
class PolicyOptimizer {
 public:
  PolicyOptimizer() = default;
  PolicyOptimizer(OptimizerKind kind, double learning_rate);
  void step(PolicyValueNet& net, const PolicyValueGrads& grads);

 private:
  Optimizer trunk_, policy_, value_;
};

// Random network distillation: a frozen random target and a trainable
// predictor of the same output width.
struct RndParams {
  DenseNet target;
  DenseNet predictor;
  double alpha_encode = 1.0;

  static RndParams create(std::size_t input_size, std::size_t hidden, std::size_t features,
                          double alpha_encode, Rng& rng);
};

struct RndResult {
  double reward = 0.0;
  NetGrads predictor_grads;
};

// reward = alpha_encode * mean squared feature error; gradients are for the
// predictor only.
RndResult rnd_intrinsic(std::span<const double> observation, const RndParams& rnd);

int uniform_random_policy(int action_count, Rng& rng);
int sample_action(std::span<const double> probabilities, Rng& rng);
// argmax with lowest-index tie-break.
int greedy_action(std::span<const double> probabilities);

}  // namespace ice
