#pragma once

// Dense and counting kernels shared by the network engine and the evaluator.
//
// The functions in `synthpop::kernels` are the production versions: loops are
// arranged for contiguous access and split across OpenMP threads once the
// work is large enough. Every output element is produced by one thread with a
// fixed summation order, so results do not depend on the thread count.
// `synthpop::kernels::serial` holds straightforward single-threaded versions
// kept as a reference for tests and benchmarks.

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "synthpop/matrix.hpp"

namespace synthpop::kernels {

/// (key, count) pairs sorted by key.
using KeyCounts = std::vector<std::pair<std::uint64_t, std::uint64_t>>;

// out = in * w^T + bias   (in: B x I, w: O x I, out: B x O)
void affine(const Matrix& in, const Matrix& w, std::span<const double> bias, Matrix& out);

// grad_in = grad_out * w   (grad_out: B x O, w: O x I, grad_in: B x I)
void backprop_input(const Matrix& grad_out, const Matrix& w, Matrix& grad_in);

// grad_w = grad_out^T * in, grad_b = column sums of grad_out
void weight_gradient(const Matrix& grad_out, const Matrix& in, Matrix& grad_w,
                     std::span<double> grad_b);

KeyCounts count_keys(std::span<const std::uint64_t> keys);

// Minimum multiply-adds before a kernel goes parallel.
inline constexpr std::size_t kParallelThreshold = 1u << 16;

namespace serial {

void affine(const Matrix& in, const Matrix& w, std::span<const double> bias, Matrix& out);
void backprop_input(const Matrix& grad_out, const Matrix& w, Matrix& grad_in);
void weight_gradient(const Matrix& grad_out, const Matrix& in, Matrix& grad_w,
                     std::span<double> grad_b);
KeyCounts count_keys(std::span<const std::uint64_t> keys);

}  // namespace serial
}  // namespace synthpop::kernels
