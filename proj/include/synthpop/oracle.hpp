#pragma once

// Synthetic ground truth with a fully known joint distribution: a chain of
// conditional probability tables P(X_1), P(X_k | X_{k-1}). Cells whose chain
// product is exactly zero are the true structural zeros.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "synthpop/data.hpp"
#include "synthpop/eval.hpp"
#include "synthpop/matrix.hpp"

namespace synthpop::oracle {

struct GroundTruthSpec {
  data::Schema schema;
  std::vector<double> root;          // P(X_1)
  std::vector<Matrix> transitions;   // transitions[k - 1](a, b) = P(X_k = b | X_{k-1} = a)

  /// Throws SchemaError unless shapes chain and every row sums to 1 +- 1e-12.
  void validate() const;

  std::uint64_t n_cells() const;
  /// Chain product for a full code vector.
  double probability(std::span<const std::uint32_t> codes) const;
  /// Full-joint combos (mixed radix over all variables) with probability exactly 0.
  std::vector<eval::Combo> zero_cells() const;
  double structural_zero_fraction() const;

  nlohmann::json to_json() const;
  static GroundTruthSpec from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static GroundTruthSpec load(const std::filesystem::path& path);
  /// FNV-1a digest of the canonical JSON, 16 hex digits.
  std::string hash() const;
};

/// Ancestral sampling of `n` independent agents.
data::CodedTable generate_population(const GroundTruthSpec& spec, std::size_t n, std::uint64_t seed);

/// Exact marginal over `variables` by enumerating the full joint.
eval::JointHistogram exact_joint(const GroundTruthSpec& spec, std::span<const std::string> variables);

/// Fixed five-variable benchmark, cardinalities (8, 8, 6, 5, 4), N_c = 7,680.
GroundTruthSpec default_benchmark();

inline constexpr const char* kDefaultBenchmarkVersion = "chain-5v-1";

/// One row per nonzero cell: variable codes then probability.
void write_exact_joint_csv(std::ostream& out, const eval::JointHistogram& joint);

}  // namespace synthpop::oracle
