#pragma once

// Minimal dense feed-forward engine: layers, forward/backward passes, Adam,
// weight clipping, block-wise softmax and its cross-entropy, and the binary
// parameter format.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "synthpop/matrix.hpp"
#include "synthpop/rng.hpp"

namespace synthpop::nn {

// Numeric tags are part of the binary parameter format.
enum class Activation : std::uint8_t {
  linear = 0,
  relu = 1,
  tanh = 2,
  sigmoid = 3,
  softmax_blocks = 4,
};

const char* activation_name(Activation a);

/// Lower bound applied to probabilities before taking logarithms.
inline constexpr double kProbabilityFloor = 1e-12;

struct DenseLayer {
  Matrix weights;  // out x in
  std::vector<double> bias;
  Activation activation = Activation::linear;
  // Segment sizes of the output for softmax_blocks; empty otherwise.
  std::vector<std::size_t> blocks;

  std::size_t in_dim() const { return weights.cols(); }
  std::size_t out_dim() const { return weights.rows(); }

  /// Throws ShapeError when weights, bias and blocks disagree.
  void validate() const;

  bool operator==(const DenseLayer&) const = default;
};

class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(std::vector<DenseLayer> layers);

  /// Glorot-uniform weights, zero biases. Hidden layers share `hidden_activation`.
  static Mlp glorot(std::size_t input_dim, std::span<const std::size_t> hidden,
                    Activation hidden_activation, std::size_t output_dim,
                    Activation output_activation, std::vector<std::size_t> output_blocks,
                    Rng& rng);

  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& layers() { return layers_; }

  std::size_t input_dim() const;
  std::size_t output_dim() const;
  std::size_t parameter_count() const;

  bool operator==(const Mlp&) const = default;

 private:
  std::vector<DenseLayer> layers_;
};

/// Activations recorded by a forward pass; `post[l]` is the output of layer l.
struct ForwardPass {
  Matrix input;
  std::vector<Matrix> pre;
  std::vector<Matrix> post;

  const Matrix& output() const { return post.back(); }
  const Matrix& logits() const { return pre.back(); }
};

ForwardPass forward(const Mlp& mlp, const Matrix& batch);

/// Which quantity the gradient handed to backward() is taken with respect to.
enum class GradientSite {
  post_activation,  // d loss / d output of the last layer
  pre_activation,   // d loss / d w_L a_{L-1} + b_L (skip the last activation)
};

struct Gradients {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> bias;
  Matrix input;

  /// Zero gradients shaped like `mlp`'s parameters.
  static Gradients zeros_like(const Mlp& mlp);
  void add(const Gradients& other);
  bool all_finite() const;
};

/// Reverse-mode pass. Gradients are summed over rows, so any batch averaging
/// must already be folded into `output_gradient`.
Gradients backward(const Mlp& mlp, const ForwardPass& pass, const Matrix& output_gradient,
                   GradientSite site = GradientSite::post_activation);

struct AdamState {
  std::vector<Matrix> m_weights;
  std::vector<Matrix> v_weights;
  std::vector<std::vector<double>> m_bias;
  std::vector<std::vector<double>> v_bias;
  std::uint64_t t = 0;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState for_model(const Mlp& mlp, double learning_rate, double beta1 = 0.9,
                             double beta2 = 0.999, double epsilon = 1e-8);
};

/// In-place Adam update with bias correction. Throws DivergenceError on any
/// non-finite gradient, leaving parameters and state untouched.
void adam_step(Mlp& mlp, const Gradients& grads, AdamState& state);

/// Clamps every weight and bias into [-c, c].
void clip_weights(Mlp& mlp, double c);

double max_abs_parameter(const Mlp& mlp);

/// Numerically stable softmax applied independently to each block of `row`.
void softmax_blocks(std::span<double> row, std::span<const std::size_t> blocks);

struct CrossEntropy {
  double loss = 0.0;
  Matrix logit_gradient;  // (probs - targets) / batch
};

/// Mean over rows of the summed per-block negative log-likelihood.
CrossEntropy cross_entropy_blocks(const Matrix& probs, const Matrix& targets,
                                  std::span<const std::size_t> blocks);

// Binary parameter format, little-endian:
//   "SPZN" | u32 version | u32 layer count |
//   per layer: u32 in | u32 out | u8 activation | u32 block count |
//              u32 block sizes... | f64 weights (row-major) | f64 biases
inline constexpr std::uint32_t kFormatVersion = 1;

void write_mlp(std::ostream& out, const Mlp& mlp);
Mlp read_mlp(std::istream& in);
void save_mlp(const std::filesystem::path& path, const Mlp& mlp);
Mlp load_mlp(const std::filesystem::path& path);

}  // namespace synthpop::nn
