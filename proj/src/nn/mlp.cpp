#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>

#include "synthpop/error.hpp"
#include "synthpop/kernels.hpp"
#include "synthpop/nn.hpp"

namespace synthpop::nn {

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::linear: return "linear";
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::sigmoid: return "sigmoid";
    case Activation::softmax_blocks: return "softmax_blocks";
  }
  return "unknown";
}

void DenseLayer::validate() const {
  if (weights.rows() == 0 || weights.cols() == 0) throw ShapeError("layer has an empty weight matrix");
  if (bias.size() != weights.rows())
    throw ShapeError("bias length " + std::to_string(bias.size()) + " does not match output width " +
                     std::to_string(weights.rows()));
  if (activation == Activation::softmax_blocks) {
    std::size_t total = std::accumulate(blocks.begin(), blocks.end(), std::size_t{0});
    if (total != weights.rows() || std::count(blocks.begin(), blocks.end(), 0u) > 0)
      throw ShapeError("softmax block partition does not cover the layer output");
  } else if (!blocks.empty()) {
    throw ShapeError("block partition given for a non-softmax layer");
  }
}

Mlp::Mlp(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw ShapeError("network needs at least one layer");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    layers_[l].validate();
    if (l > 0 && layers_[l].in_dim() != layers_[l - 1].out_dim())
      throw ShapeError("layer " + std::to_string(l) + " input width does not chain with layer " +
                       std::to_string(l - 1));
  }
}

Mlp Mlp::glorot(std::size_t input_dim, std::span<const std::size_t> hidden, Activation hidden_activation,
                std::size_t output_dim, Activation output_activation,
                std::vector<std::size_t> output_blocks, Rng& rng) {
  std::vector<std::size_t> widths{input_dim};
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(output_dim);

  std::vector<DenseLayer> layers;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const std::size_t in = widths[l], out = widths[l + 1];
    DenseLayer layer;
    layer.weights = Matrix(out, in);
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    for (double& w : layer.weights.values()) w = (2.0 * rng.uniform() - 1.0) * limit;
    layer.bias.assign(out, 0.0);
    const bool last = l + 2 == widths.size();
    layer.activation = last ? output_activation : hidden_activation;
    if (last && output_activation == Activation::softmax_blocks) layer.blocks = output_blocks;
    layers.push_back(std::move(layer));
  }
  return Mlp(std::move(layers));
}

std::size_t Mlp::input_dim() const { return layers_.empty() ? 0 : layers_.front().in_dim(); }
std::size_t Mlp::output_dim() const { return layers_.empty() ? 0 : layers_.back().out_dim(); }

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weights.size() + l.bias.size();
  return n;
}

void softmax_blocks(std::span<double> row, std::span<const std::size_t> blocks) {
  std::size_t offset = 0;
  for (std::size_t size : blocks) {
    auto seg = row.subspan(offset, size);
    const double peak = *std::max_element(seg.begin(), seg.end());
    double total = 0.0;
    for (double& v : seg) {
      v = std::exp(v - peak);
      total += v;
    }
    for (double& v : seg) v /= total;
    offset += size;
  }
}

namespace {

void apply_activation(const DenseLayer& layer, const Matrix& pre, Matrix& post) {
  post = pre;
  auto values = post.values();
  switch (layer.activation) {
    case Activation::linear:
      break;
    case Activation::relu:
      for (double& v : values) v = v > 0.0 ? v : 0.0;
      break;
    case Activation::tanh:
      for (double& v : values) v = std::tanh(v);
      break;
    case Activation::sigmoid:
      for (double& v : values) v = 1.0 / (1.0 + std::exp(-v));
      break;
    case Activation::softmax_blocks:
      for (std::size_t r = 0; r < post.rows(); ++r) softmax_blocks(post.row(r), layer.blocks);
      break;
  }
}

// Turns d loss / d post into d loss / d pre for one layer, in place.
void activation_backward(const DenseLayer& layer, const Matrix& post, Matrix& grad) {
  auto g = grad.values();
  auto y = post.values();
  switch (layer.activation) {
    case Activation::linear:
      break;
    case Activation::relu:
      for (std::size_t i = 0; i < g.size(); ++i)
        if (y[i] <= 0.0) g[i] = 0.0;
      break;
    case Activation::tanh:
      for (std::size_t i = 0; i < g.size(); ++i) g[i] *= 1.0 - y[i] * y[i];
      break;
    case Activation::sigmoid:
      for (std::size_t i = 0; i < g.size(); ++i) g[i] *= y[i] * (1.0 - y[i]);
      break;
    case Activation::softmax_blocks:
      for (std::size_t r = 0; r < grad.rows(); ++r) {
        auto gr = grad.row(r);
        auto yr = post.row(r);
        std::size_t offset = 0;
        for (std::size_t size : layer.blocks) {
          double dot = 0.0;
          for (std::size_t k = offset; k < offset + size; ++k) dot += yr[k] * gr[k];
          for (std::size_t k = offset; k < offset + size; ++k) gr[k] = yr[k] * (gr[k] - dot);
          offset += size;
        }
      }
      break;
  }
}

}  // namespace

ForwardPass forward(const Mlp& mlp, const Matrix& batch) {
  if (mlp.layers().empty()) throw ShapeError("forward on an empty network");
  if (batch.cols() != mlp.input_dim())
    throw ShapeError("batch has " + std::to_string(batch.cols()) + " columns, network expects " +
                     std::to_string(mlp.input_dim()));
  ForwardPass pass;
  pass.input = batch;
  const Matrix* prev = &pass.input;
  pass.pre.reserve(mlp.layers().size());
  pass.post.reserve(mlp.layers().size());
  for (const auto& layer : mlp.layers()) {
    Matrix pre(batch.rows(), layer.out_dim());
    kernels::affine(*prev, layer.weights, layer.bias, pre);
    Matrix post;
    apply_activation(layer, pre, post);
    pass.pre.push_back(std::move(pre));
    pass.post.push_back(std::move(post));
    prev = &pass.post.back();
  }
  return pass;
}

Gradients Gradients::zeros_like(const Mlp& mlp) {
  Gradients g;
  for (const auto& layer : mlp.layers()) {
    g.weights.emplace_back(layer.weights.rows(), layer.weights.cols());
    g.bias.emplace_back(layer.bias.size(), 0.0);
  }
  return g;
}

void Gradients::add(const Gradients& other) {
  if (other.weights.size() != weights.size()) throw ShapeError("gradient sets differ in layer count");
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (other.weights[l].size() != weights[l].size() || other.bias[l].size() != bias[l].size())
      throw ShapeError("gradient shapes differ");
    auto dst = weights[l].values();
    auto src = other.weights[l].values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    for (std::size_t i = 0; i < bias[l].size(); ++i) bias[l][i] += other.bias[l][i];
  }
  if (input.size() == other.input.size()) {
    auto dst = input.values();
    auto src = other.input.values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  }
}

bool Gradients::all_finite() const {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (!weights[l].all_finite()) return false;
    for (double b : bias[l])
      if (!std::isfinite(b)) return false;
  }
  return true;
}

Gradients backward(const Mlp& mlp, const ForwardPass& pass, const Matrix& output_gradient,
                   GradientSite site) {
  const auto& layers = mlp.layers();
  if (pass.post.size() != layers.size()) throw ShapeError("forward pass does not belong to this network");
  if (output_gradient.rows() != pass.input.rows() || output_gradient.cols() != mlp.output_dim())
    throw ShapeError("output gradient shape does not match the network output");

  Gradients grads;
  grads.weights.resize(layers.size());
  grads.bias.resize(layers.size());

  Matrix delta = output_gradient;
  for (std::size_t l = layers.size(); l-- > 0;) {
    const auto& layer = layers[l];
    if (l + 1 != layers.size() || site == GradientSite::post_activation)
      activation_backward(layer, pass.post[l], delta);
    const Matrix& layer_input = l == 0 ? pass.input : pass.post[l - 1];
    grads.weights[l] = Matrix(layer.out_dim(), layer.in_dim());
    grads.bias[l].assign(layer.out_dim(), 0.0);
    kernels::weight_gradient(delta, layer_input, grads.weights[l], grads.bias[l]);
    Matrix next(delta.rows(), layer.in_dim());
    kernels::backprop_input(delta, layer.weights, next);
    delta = std::move(next);
  }
  grads.input = std::move(delta);
  return grads;
}

CrossEntropy cross_entropy_blocks(const Matrix& probs, const Matrix& targets,
                                  std::span<const std::size_t> blocks) {
  if (probs.rows() != targets.rows() || probs.cols() != targets.cols())
    throw ShapeError("probabilities and targets differ in shape");
  if (std::accumulate(blocks.begin(), blocks.end(), std::size_t{0}) != probs.cols())
    throw ShapeError("block partition does not cover the row width");
  const std::size_t batch = probs.rows();
  CrossEntropy result;
  result.logit_gradient = Matrix(batch, probs.cols());
  if (batch == 0) return result;
  const double scale = 1.0 / static_cast<double>(batch);
  double total = 0.0;
  for (std::size_t r = 0; r < batch; ++r) {
    auto p = probs.row(r);
    auto t = targets.row(r);
    auto g = result.logit_gradient.row(r);
    std::size_t offset = 0;
    for (std::size_t size : blocks) {
      std::optional<std::size_t> hot;
      for (std::size_t k = offset; k < offset + size; ++k) {
        if (t[k] == 1.0) {
          if (hot) throw EncodingError("target block has more than one hot entry");
          hot = k;
        } else if (t[k] != 0.0) {
          throw EncodingError("target entries must be 0 or 1");
        }
        g[k] = (p[k] - t[k]) * scale;
      }
      if (!hot) throw EncodingError("target block has no hot entry");
      total -= std::log(std::max(p[*hot], kProbabilityFloor));
      offset += size;
    }
  }
  result.loss = total * scale;
  return result;
}

}  // namespace synthpop::nn
