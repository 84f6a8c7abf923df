#include <map>

#include "synthpop/error.hpp"
#include "synthpop/kernels.hpp"

namespace synthpop::kernels::serial {

void affine(const Matrix& in, const Matrix& w, std::span<const double> bias, Matrix& out) {
  if (in.cols() != w.cols() || bias.size() != w.rows() || out.rows() != in.rows() ||
      out.cols() != w.rows())
    throw ShapeError("affine: incompatible shapes");
  for (std::size_t b = 0; b < in.rows(); ++b)
    for (std::size_t j = 0; j < w.rows(); ++j) {
      double acc = bias[j];
      for (std::size_t i = 0; i < w.cols(); ++i) acc += w(j, i) * in(b, i);
      out(b, j) = acc;
    }
}

void backprop_input(const Matrix& grad_out, const Matrix& w, Matrix& grad_in) {
  if (grad_out.cols() != w.rows() || grad_in.rows() != grad_out.rows() || grad_in.cols() != w.cols())
    throw ShapeError("backprop_input: incompatible shapes");
  for (std::size_t b = 0; b < grad_out.rows(); ++b)
    for (std::size_t i = 0; i < w.cols(); ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < w.rows(); ++j) acc += grad_out(b, j) * w(j, i);
      grad_in(b, i) = acc;
    }
}

void weight_gradient(const Matrix& grad_out, const Matrix& in, Matrix& grad_w, std::span<double> grad_b) {
  if (grad_out.rows() != in.rows() || grad_w.rows() != grad_out.cols() || grad_w.cols() != in.cols() ||
      grad_b.size() != grad_out.cols())
    throw ShapeError("weight_gradient: incompatible shapes");
  for (std::size_t j = 0; j < grad_out.cols(); ++j) {
    double gb = 0.0;
    for (std::size_t b = 0; b < in.rows(); ++b) gb += grad_out(b, j);
    grad_b[j] = gb;
    for (std::size_t i = 0; i < in.cols(); ++i) {
      double acc = 0.0;
      for (std::size_t b = 0; b < in.rows(); ++b) acc += grad_out(b, j) * in(b, i);
      grad_w(j, i) = acc;
    }
  }
}

KeyCounts count_keys(std::span<const std::uint64_t> keys) {
  std::map<std::uint64_t, std::uint64_t> counts;
  for (auto k : keys) ++counts[k];
  return KeyCounts(counts.begin(), counts.end());
}

}  // namespace synthpop::kernels::serial
