#include <algorithm>
#include <cmath>
#include <ostream>

#include "synthpop/error.hpp"
#include "synthpop/eval.hpp"
#include "synthpop/models.hpp"

namespace synthpop::models {

SearchSpace SearchSpace::from_json(const nlohmann::json& j) {
  SearchSpace s;
  try {
    s.trials = j.value("trials", s.trials);
    if (j.contains("learning_rate")) {
      const auto range = j.at("learning_rate").get<std::vector<double>>();
      if (range.size() != 2) throw ConfigError("learning_rate range needs [min, max]");
      s.learning_rate_min = range[0];
      s.learning_rate_max = range[1];
    }
    s.latent_dims = j.value("latent_dim", s.latent_dims);
    s.hidden_widths = j.value("hidden_width", s.hidden_widths);
    s.hidden_depths = j.value("hidden_layers", s.hidden_depths);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid search space: ") + e.what());
  }
  if (s.trials < 1) throw ConfigError("search needs at least one trial");
  if (!(s.learning_rate_min > 0.0) || s.learning_rate_max < s.learning_rate_min)
    throw ConfigError("learning_rate range must satisfy 0 < min <= max");
  if (s.latent_dims.empty() || s.hidden_widths.empty() || s.hidden_depths.empty())
    throw ConfigError("search choice lists must be nonempty");
  return s;
}

double validation_score(const AnyModel& model, const data::CodedTable& validation, std::uint64_t seed) {
  if (validation.rows() == 0) throw ConfigError("empty validation table");
  const auto generated = sample(model, validation.rows(), seed);
  const auto names = validation.schema().names();
  std::vector<std::vector<std::string>> subsets;
  if (names.size() == 1) subsets.push_back(names);
  for (std::size_t a = 0; a < names.size(); ++a)
    for (std::size_t b = a + 1; b < names.size(); ++b) subsets.push_back({names[a], names[b]});
  double total = 0.0;
  for (const auto& s : subsets)
    total += eval::srmse(eval::empirical_joint(generated, s), eval::empirical_joint(validation, s));
  return total / static_cast<double>(subsets.size());
}

SearchResult random_search(const std::string& kind, const data::CodedTable& train,
                           const data::CodedTable& validation, const TrainConfig& base, const SearchSpace& space,
                           std::uint64_t seed) {
  Rng rng = Rng::stream(seed, "search");
  SearchResult result{{}, {UniformModel{train.schema()}, {}}};
  double best = INFINITY;
  for (std::size_t t = 0; t < space.trials; ++t) {
    TrainConfig c = base;
    const double log_lo = std::log(space.learning_rate_min), log_hi = std::log(space.learning_rate_max);
    const double lr = std::exp(log_lo + (log_hi - log_lo) * rng.uniform());
    c.vae_learning_rate = c.generator_learning_rate = c.critic_learning_rate = lr;
    c.latent_dim = space.latent_dims[rng.uniform_index(space.latent_dims.size())];
    const std::size_t width = space.hidden_widths[rng.uniform_index(space.hidden_widths.size())];
    const std::size_t depth = space.hidden_depths[rng.uniform_index(space.hidden_depths.size())];
    const std::vector<std::size_t> hidden(depth, width);
    c.encoder_hidden = c.decoder_hidden = c.generator_hidden = c.critic_hidden = hidden;
    c.seed = rng.next_u64();

    auto fit = fit_model(kind, train, c);
    const double score = validation_score(fit.model, validation, Rng::stream(seed, "search/score").next_u64());
    result.trials.push_back({t, c, score});
    if (score < best) {
      best = score;
      result.best = std::move(fit);
    }
  }
  std::stable_sort(result.trials.begin(), result.trials.end(),
                   [](const Trial& a, const Trial& b) { return a.validation_srmse < b.validation_srmse; });
  return result;
}

void write_trials_csv(std::ostream& out, std::span<const Trial> trials) {
  out << "trial,validation_srmse,learning_rate,latent_dim,hidden_width,hidden_layers,seed\n";
  for (const auto& t : trials) {
    const auto& hidden = t.config.decoder_hidden;
    out << t.index << ',' << eval::format_number(t.validation_srmse) << ','
        << eval::format_number(t.config.vae_learning_rate) << ',' << t.config.latent_dim << ','
        << (hidden.empty() ? 0 : hidden.front()) << ',' << hidden.size() << ',' << t.config.seed << '\n';
  }
}

}  // namespace synthpop::models
