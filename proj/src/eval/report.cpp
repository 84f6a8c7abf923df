#include <array>
#include <charconv>
#include <ostream>

#include "synthpop/eval.hpp"

namespace synthpop::eval {

std::string subset_label(std::span<const std::string> variables) {
  std::string out;
  for (const auto& v : variables) {
    if (!out.empty()) out.push_back('+');
    out += v;
  }
  return out;
}

std::string format_number(std::optional<double> v) {
  if (!v) return {};
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), *v);
  return std::string(buf.data(), ptr);
}

MetricsRow evaluate_subset(const data::CodedTable& train, const data::CodedTable& test,
                           const data::CodedTable& generated, std::span<const std::string> variables,
                           const std::string& model) {
  MetricsRow row;
  row.subset = subset_label(variables);
  row.model = model;
  const auto reference = empirical_joint(test, variables);
  const auto approx = empirical_joint(generated, variables);
  row.n_cells = reference.n_cells;
  row.srmse = srmse(approx, reference);
  row.pearson = pearson(approx, reference);
  row.r2 = r2(approx, reference);
  row.zeros = zero_analysis(train, test, generated, variables);
  return row;
}

void write_metrics_csv(std::ostream& out, std::span<const MetricsRow> rows) {
  out << "subset,model,n_c,srmse,pearson,r2,n_sampling_zeros,n_recovered,recovered_fraction,"
         "n_structural_proxy,ratio,undefined_flag\n";
  for (const auto& r : rows) {
    out << r.subset << ',' << r.model << ',' << r.n_cells << ',' << format_number(r.srmse) << ','
        << format_number(r.pearson) << ',' << format_number(r.r2) << ',' << r.zeros.n_sampling_zeros << ','
        << r.zeros.n_recovered << ',' << format_number(r.zeros.recovered_fraction) << ','
        << r.zeros.n_structural_proxy << ',' << format_number(r.zeros.ratio) << ',' << (r.zeros.ratio ? 0 : 1)
        << '\n';
  }
}

void write_curve_csv(std::ostream& out, std::span<const CurvePoint> points) {
  out << "generated,n_sampling_zeros,n_recovered,recovered_fraction,n_structural_proxy,ratio,undefined_flag\n";
  for (const auto& p : points) {
    const auto& r = p.report;
    out << p.generated << ',' << r.n_sampling_zeros << ',' << r.n_recovered << ','
        << format_number(r.recovered_fraction) << ',' << r.n_structural_proxy << ',' << format_number(r.ratio)
        << ',' << (r.ratio ? 0 : 1) << '\n';
  }
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << "subset,model,n_c,n_sampling_zeros,n_recovered,recovered_fraction,n_structural_proxy,ratio,undefined_flag\n";
  for (const auto& row : rows) {
    const auto& r = row.report;
    out << subset_label(row.subset) << ',' << row.model << ',' << row.n_cells << ',' << r.n_sampling_zeros << ','
        << r.n_recovered << ',' << format_number(r.recovered_fraction) << ',' << r.n_structural_proxy << ','
        << format_number(r.ratio) << ',' << (r.ratio ? 0 : 1) << '\n';
  }
}

}  // namespace synthpop::eval
