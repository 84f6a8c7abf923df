#include <numeric>

#include "internal.hpp"
#include "synthpop/error.hpp"
#include "synthpop/models.hpp"

namespace synthpop::models {

namespace detail {

void append_categorical_rows(const Matrix& probs, const data::Schema& schema, Rng& rng, data::CodedTable& out) {
  std::vector<std::uint32_t> codes(schema.size());
  for (std::size_t r = 0; r < probs.rows(); ++r) {
    auto row = probs.row(r);
    std::size_t offset = 0;
    for (std::size_t v = 0; v < schema.size(); ++v) {
      const std::size_t card = schema[v].cardinality;
      codes[v] = static_cast<std::uint32_t>(rng.categorical(row.subspan(offset, card)));
      offset += card;
    }
    out.push_row(codes);
  }
}

Matrix standard_normal(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.normal();
  return m;
}

Matrix gather_rows(const Matrix& source, const std::vector<std::size_t>& indices, std::size_t first,
                   std::size_t count) {
  Matrix out(count, source.cols());
  for (std::size_t i = 0; i < count; ++i) {
    auto src = source.row(indices[first + i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.uniform_index(i)]);
  return order;
}

}  // namespace detail

MarginalModel marginal_fit(const data::CodedTable& train) {
  if (train.rows() == 0) throw ConfigError("cannot fit marginals on an empty training table");
  MarginalModel m;
  m.schema = train.schema();
  for (std::size_t v = 0; v < train.cols(); ++v) {
    std::vector<double> counts(m.schema[v].cardinality, 0.0);
    for (std::size_t r = 0; r < train.rows(); ++r) counts[train(r, v)] += 1.0;
    for (double& c : counts) c /= static_cast<double>(train.rows());
    m.frequencies.push_back(std::move(counts));
  }
  return m;
}

data::CodedTable marginal_sample(const MarginalModel& model, std::size_t n, std::uint64_t seed) {
  Rng rng = Rng::stream(seed, "sample");
  data::CodedTable out(model.schema);
  out.reserve(n);
  std::vector<std::uint32_t> codes(model.schema.size());
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t v = 0; v < codes.size(); ++v)
      codes[v] = static_cast<std::uint32_t>(rng.categorical(model.frequencies[v]));
    out.push_row(codes);
  }
  return out;
}

data::CodedTable uniform_sample(const data::Schema& schema, std::size_t n, std::uint64_t seed) {
  Rng rng = Rng::stream(seed, "sample");
  data::CodedTable out(schema);
  out.reserve(n);
  std::vector<std::uint32_t> codes(schema.size());
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t v = 0; v < codes.size(); ++v)
      codes[v] = static_cast<std::uint32_t>(rng.uniform_index(schema[v].cardinality));
    out.push_row(codes);
  }
  return out;
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

}  // namespace

std::string kind_name(const AnyModel& model) {
  return std::visit(overloaded{
                        [](const VaeModel&) -> std::string { return "vae"; },
                        [](const GanModel& m) -> std::string {
                          return m.loss == GanLoss::wasserstein ? "wgan" : "gan";
                        },
                        [](const MarginalModel&) -> std::string { return "marginal"; },
                        [](const UniformModel&) -> std::string { return "uniform"; },
                    },
                    model);
}

const data::Schema& model_schema(const AnyModel& model) {
  return std::visit([](const auto& m) -> const data::Schema& { return m.schema; }, model);
}

data::CodedTable sample(const AnyModel& model, std::size_t n, std::uint64_t seed) {
  return std::visit(overloaded{
                        [&](const VaeModel& m) { return vae_sample(m, n, seed); },
                        [&](const GanModel& m) { return gan_sample(m, n, seed); },
                        [&](const MarginalModel& m) { return marginal_sample(m, n, seed); },
                        [&](const UniformModel& m) { return uniform_sample(m.schema, n, seed); },
                    },
                    model);
}

FitResult fit_model(const std::string& kind, const data::CodedTable& train, const TrainConfig& config) {
  config.validate();
  if (kind == "marginal") return {marginal_fit(train), {}};
  if (kind == "uniform") return {UniformModel{train.schema()}, {}};
  if (kind != "vae" && kind != "wgan" && kind != "gan") throw ConfigError("unknown model kind '" + kind + "'");
  if (train.rows() == 0) throw ConfigError("empty training table");

  const auto encoded = data::one_hot_encode(train);
  Rng init = Rng::stream(config.seed, "train/init");
  if (kind == "vae") {
    auto model = VaeModel::create(train.schema(), config, init);
    auto log = fit_vae(model, encoded.matrix, config);
    return {std::move(model), std::move(log)};
  }
  TrainConfig c = config;
  c.gan_loss = kind == "wgan" ? GanLoss::wasserstein : GanLoss::standard;
  auto model = GanModel::create(train.schema(), c, init);
  auto log = fit_gan(model, encoded.matrix, c);
  return {std::move(model), std::move(log)};
}

}  // namespace synthpop::models
