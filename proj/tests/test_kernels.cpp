#include <omp.h>

#include <cmath>
#include <tuple>

#include "doctest.h"
#include "synthpop/kernels.hpp"
#include "synthpop/rng.hpp"

using namespace synthpop;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  Matrix m(r, c);
  for (double& v : m.values()) v = rng.normal();
  return m;
}

double max_diff(const Matrix& a, const Matrix& b) {
  double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a.values()[i] - b.values()[i]));
  return d;
}

struct ThreadCount {
  explicit ThreadCount(int n) : saved(omp_get_max_threads()) { omp_set_num_threads(n); }
  ~ThreadCount() { omp_set_num_threads(saved); }
  int saved;
};

}  // namespace

TEST_CASE("parallel dense kernels agree with the serial reference") {
  Rng rng(11);
  // Small shapes stay serial; the larger ones cross the parallel threshold.
  const std::size_t shapes[][3] = {{1, 1, 1}, {3, 5, 2}, {256, 64, 64}, {512, 130, 37}, {2048, 40, 16}};
  for (auto [b, i, o] : shapes) {
    const Matrix in = random_matrix(b, i, rng), w = random_matrix(o, i, rng), g = random_matrix(b, o, rng);
    std::vector<double> bias(o);
    for (double& v : bias) v = rng.normal();

    Matrix p(b, o), s(b, o);
    kernels::affine(in, w, bias, p);
    kernels::serial::affine(in, w, bias, s);
    CHECK(max_diff(p, s) < 1e-12);

    Matrix pi(b, i), si(b, i);
    kernels::backprop_input(g, w, pi);
    kernels::serial::backprop_input(g, w, si);
    CHECK(max_diff(pi, si) < 1e-12);

    Matrix pw(o, i), sw(o, i);
    std::vector<double> pb(o), sb(o);
    kernels::weight_gradient(g, in, pw, pb);
    kernels::serial::weight_gradient(g, in, sw, sb);
    CHECK(max_diff(pw, sw) < 1e-9);
    for (std::size_t k = 0; k < o; ++k) CHECK(std::abs(pb[k] - sb[k]) < 1e-9);
  }
}

TEST_CASE("parallel kernels give identical bits for any thread count") {
  Rng rng(12);
  const Matrix in = random_matrix(1024, 96, rng), w = random_matrix(48, 96, rng), g = random_matrix(1024, 48, rng);
  std::vector<double> bias(48, 0.25);
  auto run = [&](int threads) {
    ThreadCount tc(threads);
    Matrix out(1024, 48), gi(1024, 96), gw(48, 96);
    std::vector<double> gb(48);
    kernels::affine(in, w, bias, out);
    kernels::backprop_input(g, w, gi);
    kernels::weight_gradient(g, in, gw, gb);
    return std::make_tuple(out, gi, gw, gb);
  };
  CHECK(run(1) == run(4));
}

TEST_CASE("count_keys agrees with the serial reference") {
  Rng rng(13);
  for (std::size_t n : {0u, 1u, 100u, 300000u}) {
    std::vector<std::uint64_t> keys(n);
    for (auto& k : keys) k = rng.uniform_index(5000);
    const auto s = kernels::serial::count_keys(keys);
    CHECK(kernels::count_keys(keys) == s);
    ThreadCount tc(3);
    CHECK(kernels::count_keys(keys) == s);
    std::uint64_t total = 0;
    for (auto [k, c] : s) total += c;
    CHECK(total == n);
  }
}
