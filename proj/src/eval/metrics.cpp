#include <cmath>

#include "synthpop/error.hpp"
#include "synthpop/eval.hpp"

namespace synthpop::eval {

namespace {

void require_comparable(const JointHistogram& a, const JointHistogram& b) {
  if (a.variables != b.variables || a.n_cells != b.n_cells)
    throw ComparabilityError("histograms are over different variable subsets");
}

// Merge-join over the union of nonzero cells.
template <typename Visit>
void for_each_union_cell(const JointHistogram& generated, const JointHistogram& reference, Visit visit) {
  const auto& g = generated.frequencies;
  const auto& r = reference.frequencies;
  std::size_t i = 0, j = 0;
  while (i < g.size() || j < r.size()) {
    if (j == r.size() || (i < g.size() && g[i].first < r[j].first)) {
      visit(g[i].first, 0.0, g[i].second);
      ++i;
    } else if (i == g.size() || r[j].first < g[i].first) {
      visit(r[j].first, r[j].second, 0.0);
      ++j;
    } else {
      visit(g[i].first, r[j].second, g[i].second);
      ++i;
      ++j;
    }
  }
}

}  // namespace

double srmse(const JointHistogram& generated, const JointHistogram& reference) {
  require_comparable(generated, reference);
  double squared = 0.0;
  for_each_union_cell(generated, reference, [&](Combo, double ref, double gen) {
    const double d = gen - ref;
    squared += d * d;
  });
  return std::sqrt(squared * static_cast<double>(reference.n_cells));
}

std::vector<ScatterPoint> scatter_data(const JointHistogram& generated, const JointHistogram& reference) {
  require_comparable(generated, reference);
  std::vector<ScatterPoint> points;
  for_each_union_cell(generated, reference,
                      [&](Combo, double ref, double gen) { points.push_back({ref, gen}); });
  return points;
}

std::optional<double> pearson(const JointHistogram& generated, const JointHistogram& reference) {
  const auto points = scatter_data(generated, reference);
  if (points.size() < 2) return std::nullopt;
  const double n = static_cast<double>(points.size());
  double mean_r = 0.0, mean_g = 0.0;
  for (const auto& p : points) {
    mean_r += p.reference;
    mean_g += p.generated;
  }
  mean_r /= n;
  mean_g /= n;
  double srr = 0.0, sgg = 0.0, srg = 0.0;
  for (const auto& p : points) {
    const double dr = p.reference - mean_r, dg = p.generated - mean_g;
    srr += dr * dr;
    sgg += dg * dg;
    srg += dr * dg;
  }
  if (srr <= 0.0 || sgg <= 0.0) return std::nullopt;
  return srg / std::sqrt(srr * sgg);
}

std::optional<double> r2(const JointHistogram& generated, const JointHistogram& reference) {
  const auto points = scatter_data(generated, reference);
  if (points.empty()) return std::nullopt;
  double mean_r = 0.0;
  for (const auto& p : points) mean_r += p.reference;
  mean_r /= static_cast<double>(points.size());
  double ss_tot = 0.0, ss_res = 0.0;
  for (const auto& p : points) {
    ss_tot += (p.reference - mean_r) * (p.reference - mean_r);
    ss_res += (p.reference - p.generated) * (p.reference - p.generated);
  }
  if (ss_tot <= 0.0) return std::nullopt;
  return 1.0 - ss_res / ss_tot;
}

}  // namespace synthpop::eval
