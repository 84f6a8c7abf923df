#include <algorithm>
#include <cmath>
#include <string>

#include "synthpop/error.hpp"
#include "synthpop/nn.hpp"

namespace synthpop::nn {

AdamState AdamState::for_model(const Mlp& mlp, double learning_rate, double beta1, double beta2,
                               double epsilon) {
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0))
    throw ConfigError("Adam betas must lie in (0, 1)");
  AdamState s;
  s.learning_rate = learning_rate;
  s.beta1 = beta1;
  s.beta2 = beta2;
  s.epsilon = epsilon;
  for (const auto& layer : mlp.layers()) {
    s.m_weights.emplace_back(layer.weights.rows(), layer.weights.cols());
    s.v_weights.emplace_back(layer.weights.rows(), layer.weights.cols());
    s.m_bias.emplace_back(layer.bias.size(), 0.0);
    s.v_bias.emplace_back(layer.bias.size(), 0.0);
  }
  return s;
}

namespace {

void update(std::span<double> param, std::span<const double> grad, std::span<double> m,
            std::span<double> v, const AdamState& s, double correction1, double correction2) {
  for (std::size_t i = 0; i < param.size(); ++i) {
    m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * grad[i];
    v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * grad[i] * grad[i];
    const double m_hat = m[i] / correction1;
    const double v_hat = v[i] / correction2;
    param[i] -= s.learning_rate * m_hat / (std::sqrt(v_hat) + s.epsilon);
  }
}

}  // namespace

void adam_step(Mlp& mlp, const Gradients& grads, AdamState& state) {
  auto& layers = mlp.layers();
  if (grads.weights.size() != layers.size() || state.m_weights.size() != layers.size())
    throw ShapeError("gradients or optimizer state do not match the network");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (grads.weights[l].size() != layers[l].weights.size() || grads.bias[l].size() != layers[l].bias.size())
      throw ShapeError("gradient shape does not mirror layer " + std::to_string(l));
  }
  if (!grads.all_finite()) throw DivergenceError("non-finite gradient entry in Adam step");

  state.t += 1;
  const double t = static_cast<double>(state.t);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    update(layers[l].weights.values(), grads.weights[l].values(), state.m_weights[l].values(),
           state.v_weights[l].values(), state, correction1, correction2);
    update(layers[l].bias, grads.bias[l], state.m_bias[l], state.v_bias[l], state, correction1, correction2);
  }
}

void clip_weights(Mlp& mlp, double c) {
  if (!(c > 0.0)) throw ConfigError("clip bound must be positive");
  for (auto& layer : mlp.layers()) {
    for (double& w : layer.weights.values()) w = std::clamp(w, -c, c);
    for (double& b : layer.bias) b = std::clamp(b, -c, c);
  }
}

double max_abs_parameter(const Mlp& mlp) {
  double peak = 0.0;
  for (const auto& layer : mlp.layers()) {
    for (double w : layer.weights.values()) peak = std::max(peak, std::abs(w));
    for (double b : layer.bias) peak = std::max(peak, std::abs(b));
  }
  return peak;
}

}  // namespace synthpop::nn
