#include "ice/agents.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ice/errors.hpp"

namespace ice {

namespace {

constexpr double kMinProbability = 1e-12;

bool finite_nonneg(double x) { return std::isfinite(x) && x >= 0.0; }

}  // namespace

void LossWeights::validate() const {
  if (!finite_nonneg(alpha_value) || !finite_nonneg(alpha_policy) ||
      !finite_nonneg(alpha_entropy) || !finite_nonneg(beta))
    throw ConfigError("loss weights must be finite and non-negative");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in (0, 1]");
  if (k_steps == 0) throw ConfigError("k_steps must be positive");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw ConfigError("learning rate must be positive");
}

void PolicyValueGrads::zero() {
  trunk.zero();
  policy.zero();
  value.zero();
}

double PolicyValueGrads::squared_norm() const {
  return trunk.squared_norm() + policy.squared_norm() + value.squared_norm();
}

void PolicyValueGrads::scale(double factor) {
  trunk.scale(factor);
  policy.scale(factor);
  value.scale(factor);
}

PolicyValueNet::PolicyValueNet(std::size_t input_size, int action_count, std::size_t hidden,
                               Rng& rng)
    : trunk_({input_size, hidden, hidden}, {Activation::kRelu, Activation::kRelu}),
      policy_({hidden, static_cast<std::size_t>(action_count)}, {Activation::kIdentity}),
      value_({hidden, 1}, {Activation::kIdentity}) {
  if (action_count < 1) throw ConfigError("policy needs at least one action");
  trunk_.initialize(rng);
  policy_.initialize(rng);
  policy_.scale_layer(0, 0.01);
  value_.zero_layer(0);
}

PolicyValueGrads PolicyValueNet::make_grads() const {
  return {NetGrads(trunk_), NetGrads(policy_), NetGrads(value_)};
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.begin(), logits.end());
  const double top = *std::max_element(p.begin(), p.end());
  double sum = 0.0;
  for (double& v : p) {
    v = std::exp(v - top);
    sum += v;
  }
  for (double& v : p) v /= sum;
  return p;
}

PolicyOutput PolicyValueNet::forward(std::span<const double> observation, Tapes& tapes) const {
  auto hidden = trunk_.forward(observation, tapes.trunk);
  auto logits = policy_.forward(hidden, tapes.policy);
  auto value = value_.forward(hidden, tapes.value);
  return {softmax(logits), value[0]};
}

PolicyOutput PolicyValueNet::forward(std::span<const double> observation) const {
  Tapes tapes;
  return forward(observation, tapes);
}

void PolicyValueNet::backward(const Tapes& tapes, std::span<const double> grad_logits,
                              double grad_value, PolicyValueGrads& grads,
                              std::vector<double>* grad_input) const {
  std::vector<double> from_policy;
  std::vector<double> from_value;
  policy_.backward(tapes.policy, grad_logits, grads.policy, &from_policy);
  const double gv[1] = {grad_value};
  value_.backward(tapes.value, gv, grads.value, &from_value);
  for (std::size_t i = 0; i < from_policy.size(); ++i) from_policy[i] += from_value[i];
  trunk_.backward(tapes.trunk, from_policy, grads.trunk, grad_input);
}

std::vector<double> PolicyValueNet::log_prob_input_gradient(std::span<const double> observation,
                                                            int action) const {
  if (action < 0 || action >= action_count()) throw DataError("action out of range");
  Tapes tapes;
  const PolicyOutput out = forward(observation, tapes);
  // d log pi_a / d z_j = [j == a] - pi_j
  std::vector<double> grad_logits(out.probabilities.size());
  for (std::size_t j = 0; j < grad_logits.size(); ++j)
    grad_logits[j] = (static_cast<int>(j) == action ? 1.0 : 0.0) - out.probabilities[j];
  PolicyValueGrads scratch = make_grads();
  std::vector<double> grad_input;
  backward(tapes, grad_logits, 0.0, scratch, &grad_input);
  return grad_input;
}

double k_step_advantage(std::span<const double> rewards, std::span<const double> values,
                        double gamma, bool done_at_end) {
  if (values.size() != rewards.size() + 1)
    throw DataError("k-step advantage needs k rewards and k + 1 values, got " +
                    std::to_string(rewards.size()) + " and " + std::to_string(values.size()));
  double ret = done_at_end ? 0.0 : values.back();
  for (std::size_t i = rewards.size(); i-- > 0;) ret = rewards[i] + gamma * ret;
  return ret - values.front();
}

double mix_reward(double extrinsic, double intrinsic, double beta) {
  return extrinsic + beta * intrinsic;
}

LossReport actor_critic_losses(const Segment& segment, const PolicyValueNet& net,
                               const LossWeights& weights, PolicyValueGrads& grads) {
  const std::size_t n = segment.observations.size();
  if (n == 0) throw DataError("actor-critic loss on an empty segment");
  if (segment.actions.size() != n || segment.rewards.size() != n)
    throw DataError("segment observations, actions and rewards differ in length");

  std::vector<PolicyValueNet::Tapes> tapes(n);
  std::vector<PolicyOutput> outputs(n);
  for (std::size_t i = 0; i < n; ++i) outputs[i] = net.forward(segment.observations[i], tapes[i]);

  double ret = 0.0;
  if (!segment.done_at_end) ret = net.forward(segment.bootstrap_observation).value;

  LossReport report;
  const auto actions = static_cast<std::size_t>(net.action_count());
  std::vector<double> grad_logits(actions);
  for (std::size_t i = n; i-- > 0;) {
    ret = segment.rewards[i] + weights.gamma * ret;
    const PolicyOutput& out = outputs[i];
    const double advantage = ret - out.value;
    const int a = segment.actions[i];
    if (a < 0 || static_cast<std::size_t>(a) >= actions) throw DataError("action out of range");

    double entropy = 0.0;
    for (double p : out.probabilities) entropy -= p * std::log(std::max(p, kMinProbability));
    const double log_pa = std::log(std::max(out.probabilities[a], kMinProbability));

    report.value += weights.alpha_value * advantage * advantage;
    report.policy += -weights.alpha_policy * advantage * log_pa;
    report.entropy += -weights.alpha_entropy * entropy;

    for (std::size_t j = 0; j < actions; ++j) {
      const double p = out.probabilities[j];
      const double onehot = static_cast<int>(j) == a ? 1.0 : 0.0;
      const double log_p = std::log(std::max(p, kMinProbability));
      grad_logits[j] = -weights.alpha_policy * advantage * (onehot - p) +
                       weights.alpha_entropy * p * (log_p + entropy);
    }
    const double grad_value = -2.0 * weights.alpha_value * advantage;
    net.backward(tapes[i], grad_logits, grad_value, grads);
  }
  return report;
}

void apply_gradients(PolicyValueNet& net, const PolicyValueGrads& grads, double learning_rate) {
  // Validate every part before touching any of them.
  DenseNet trunk = net.trunk();
  DenseNet policy = net.policy_head();
  DenseNet value = net.value_head();
  apply_gradients(trunk, grads.trunk, learning_rate);
  apply_gradients(policy, grads.policy, learning_rate);
  apply_gradients(value, grads.value, learning_rate);
  net.trunk() = std::move(trunk);
  net.policy_head() = std::move(policy);
  net.value_head() = std::move(value);
}

PolicyOptimizer::PolicyOptimizer(OptimizerKind kind, double learning_rate)
    : trunk_(kind, learning_rate), policy_(kind, learning_rate), value_(kind, learning_rate) {}

void PolicyOptimizer::step(PolicyValueNet& net, const PolicyValueGrads& grads) {
  const double norm = grads.squared_norm();
  if (!std::isfinite(norm)) {
    // Let the per-layer check name the offending layer.
    apply_gradients(net, grads, 0.0);
  }
  trunk_.step(net.trunk(), grads.trunk);
  policy_.step(net.policy_head(), grads.policy);
  value_.step(net.value_head(), grads.value);
}

RndParams RndParams::create(std::size_t input_size, std::size_t hidden, std::size_t features,
                            double alpha_encode, Rng& rng) {
  RndParams rnd{DenseNet({input_size, hidden, features}, {Activation::kRelu, Activation::kIdentity}),
                DenseNet({input_size, hidden, features}, {Activation::kRelu, Activation::kIdentity}),
                alpha_encode};
  rnd.target.initialize(rng);
  rnd.predictor.initialize(rng);
  return rnd;
}

RndResult rnd_intrinsic(std::span<const double> observation, const RndParams& rnd) {
  Tape target_tape;
  Tape predictor_tape;
  auto target = rnd.target.forward(observation, target_tape);
  auto predicted = rnd.predictor.forward(observation, predictor_tape);
  const double width = static_cast<double>(target.size());
  double mse = 0.0;
  std::vector<double> grad(target.size());
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double diff = predicted[i] - target[i];
    mse += diff * diff;
    grad[i] = rnd.alpha_encode * 2.0 * diff / width;
  }
  RndResult result{rnd.alpha_encode * mse / width, NetGrads(rnd.predictor)};
  rnd.predictor.backward(predictor_tape, grad, result.predictor_grads);
  return result;
}

int uniform_random_policy(int action_count, Rng& rng) {
  if (action_count < 1) throw ConfigError("action_count must be at least 1");
  return std::uniform_int_distribution<int>(0, action_count - 1)(rng);
}

int sample_action(std::span<const double> probabilities, Rng& rng) {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double cumulative = 0.0;
  for (std::size_t a = 0; a < probabilities.size(); ++a) {
    cumulative += probabilities[a];
    if (u < cumulative) return static_cast<int>(a);
  }
  return static_cast<int>(probabilities.size()) - 1;
}

int greedy_action(std::span<const double> probabilities) {
  return static_cast<int>(std::max_element(probabilities.begin(), probabilities.end()) -
                          probabilities.begin());
}

}  // namespace ice
