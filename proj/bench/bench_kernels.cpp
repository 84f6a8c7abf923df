// Serial reference kernels against the OpenMP versions.
//
//   bench_kernels [repeats]
//
// Prints one line per (kernel, shape) with the best-of-N wall time of each
// version and the speedup. Thread count follows OMP_NUM_THREADS.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "synthpop/kernels.hpp"
#include "synthpop/rng.hpp"

using namespace synthpop;

namespace {

double best_of(int repeats, const std::function<void()>& fn) {
  double best = 1e300;
  for (int i = 0; i < repeats; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  Matrix m(r, c);
  for (double& v : m.values()) v = rng.normal();
  return m;
}

void report(const std::string& name, const std::string& shape, double serial_ms, double parallel_ms) {
  std::printf("%-16s %-18s %10.3f %10.3f %8.2fx\n", name.c_str(), shape.c_str(), serial_ms, parallel_ms,
              serial_ms / parallel_ms);
}

}  // namespace

int main(int argc, char** argv) {
  const int repeats = argc > 1 ? std::stoi(argv[1]) : 5;
  std::printf("threads: %d\n", omp_get_max_threads());
  std::printf("%-16s %-18s %10s %10s %9s\n", "kernel", "shape", "serial ms", "omp ms", "speedup");
  Rng rng(1);

  const std::size_t shapes[][3] = {{256, 43, 64}, {256, 64, 64}, {2048, 64, 43}, {8192, 128, 128}};
  for (auto [b, in, out] : shapes) {
    const auto shape = std::to_string(b) + "x" + std::to_string(in) + "x" + std::to_string(out);
    const Matrix x = random_matrix(b, in, rng), w = random_matrix(out, in, rng), g = random_matrix(b, out, rng);
    std::vector<double> bias(out, 0.1), gb(out);
    Matrix y(b, out), gi(b, in), gw(out, in);
    report("affine", shape, best_of(repeats, [&] { kernels::serial::affine(x, w, bias, y); }),
           best_of(repeats, [&] { kernels::affine(x, w, bias, y); }));
    report("backprop_input", shape, best_of(repeats, [&] { kernels::serial::backprop_input(g, w, gi); }),
           best_of(repeats, [&] { kernels::backprop_input(g, w, gi); }));
    report("weight_gradient", shape, best_of(repeats, [&] { kernels::serial::weight_gradient(g, x, gw, gb); }),
           best_of(repeats, [&] { kernels::weight_gradient(g, x, gw, gb); }));
  }

  for (std::size_t n : {200000u, 2000000u}) {
    std::vector<std::uint64_t> keys(n);
    for (auto& k : keys) k = rng.uniform_index(7680);
    report("count_keys", std::to_string(n), best_of(repeats, [&] { kernels::serial::count_keys(keys); }),
           best_of(repeats, [&] { kernels::count_keys(keys); }));
  }
  return 0;
}
