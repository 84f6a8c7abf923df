#include "synthpop/kernels.hpp"

#include <algorithm>
#include <unordered_map>

#include <omp.h>

#include "synthpop/error.hpp"

namespace synthpop::kernels {

namespace {

void check_affine(const Matrix& in, const Matrix& w, std::span<const double> bias, const Matrix& out) {
  if (in.cols() != w.cols() || bias.size() != w.rows() || out.rows() != in.rows() ||
      out.cols() != w.rows()) {
    throw ShapeError("affine: incompatible shapes");
  }
}

Matrix transpose(const Matrix& m) {
  Matrix t(m.cols(), m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) t(c, r) = m(r, c);
  return t;
}

bool large(std::size_t work) { return work >= kParallelThreshold; }

}  // namespace

void affine(const Matrix& in, const Matrix& w, std::span<const double> bias, Matrix& out) {
  check_affine(in, w, bias, out);
  const std::size_t batch = in.rows(), n_in = w.cols(), n_out = w.rows();
  const Matrix wt = transpose(w);  // I x O, so the inner loop is a contiguous axpy
  const long rows = static_cast<long>(batch);
#pragma omp parallel for schedule(static) if (large(batch * n_in * n_out))
  for (long b = 0; b < rows; ++b) {
    double* o = out.data() + static_cast<std::size_t>(b) * n_out;
    const double* x = in.data() + static_cast<std::size_t>(b) * n_in;
    std::copy(bias.begin(), bias.end(), o);
    for (std::size_t i = 0; i < n_in; ++i) {
      const double xi = x[i];
      const double* wr = wt.data() + i * n_out;
      for (std::size_t j = 0; j < n_out; ++j) o[j] += xi * wr[j];
    }
  }
}

void backprop_input(const Matrix& grad_out, const Matrix& w, Matrix& grad_in) {
  if (grad_out.cols() != w.rows() || grad_in.rows() != grad_out.rows() || grad_in.cols() != w.cols())
    throw ShapeError("backprop_input: incompatible shapes");
  const std::size_t n_in = w.cols(), n_out = w.rows();
  const long rows = static_cast<long>(grad_out.rows());
#pragma omp parallel for schedule(static) if (large(grad_out.rows() * n_in * n_out))
  for (long b = 0; b < rows; ++b) {
    double* gi = grad_in.data() + static_cast<std::size_t>(b) * n_in;
    const double* go = grad_out.data() + static_cast<std::size_t>(b) * n_out;
    std::fill(gi, gi + n_in, 0.0);
    for (std::size_t j = 0; j < n_out; ++j) {
      const double g = go[j];
      if (g == 0.0) continue;
      const double* wr = w.data() + j * n_in;
      for (std::size_t i = 0; i < n_in; ++i) gi[i] += g * wr[i];
    }
  }
}

void weight_gradient(const Matrix& grad_out, const Matrix& in, Matrix& grad_w, std::span<double> grad_b) {
  if (grad_out.rows() != in.rows() || grad_w.rows() != grad_out.cols() || grad_w.cols() != in.cols() ||
      grad_b.size() != grad_out.cols())
    throw ShapeError("weight_gradient: incompatible shapes");
  const std::size_t batch = in.rows(), n_in = in.cols(), n_out = grad_out.cols();
  const long outs = static_cast<long>(n_out);
#pragma omp parallel for schedule(static) if (large(batch * n_in * n_out))
  for (long jl = 0; jl < outs; ++jl) {
    const auto j = static_cast<std::size_t>(jl);
    double* gw = grad_w.data() + j * n_in;
    std::fill(gw, gw + n_in, 0.0);
    double gb = 0.0;
    for (std::size_t b = 0; b < batch; ++b) {
      const double g = grad_out(b, j);
      gb += g;
      if (g == 0.0) continue;
      const double* x = in.data() + b * n_in;
      for (std::size_t i = 0; i < n_in; ++i) gw[i] += g * x[i];
    }
    grad_b[j] = gb;
  }
}

KeyCounts count_keys(std::span<const std::uint64_t> keys) {
  const long n = static_cast<long>(keys.size());
  std::vector<std::unordered_map<std::uint64_t, std::uint64_t>> shards;
#pragma omp parallel if (large(keys.size()))
  {
#pragma omp single
    shards.resize(static_cast<std::size_t>(omp_get_num_threads()));
    auto& local = shards[static_cast<std::size_t>(omp_get_thread_num())];
#pragma omp for schedule(static)
    for (long i = 0; i < n; ++i) ++local[keys[static_cast<std::size_t>(i)]];
  }
  std::unordered_map<std::uint64_t, std::uint64_t> merged;
  for (auto& shard : shards)
    for (const auto& [key, count] : shard) merged[key] += count;
  KeyCounts result(merged.begin(), merged.end());
  std::sort(result.begin(), result.end());
  return result;
}

}  // namespace synthpop::kernels
