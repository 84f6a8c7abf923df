#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "staging.hpp"
#include "synthpop/cli.hpp"
#include "synthpop/data.hpp"
#include "synthpop/error.hpp"
#include "synthpop/eval.hpp"
#include "synthpop/models.hpp"
#include "synthpop/oracle.hpp"
#include "synthpop/svg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace synthpop::cli {

Invocation Invocation::from_file(const fs::path& config_path, std::optional<std::uint64_t> seed, fs::path out) {
  std::ifstream in(config_path);
  if (!in) throw ConfigError("cannot open config file " + config_path.string());
  Invocation inv;
  try {
    inv.config = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(config_path.string() + ": " + e.what());
  }
  if (!inv.config.is_object()) throw ConfigError(config_path.string() + ": config must be a JSON object");
  inv.base_dir = config_path.has_parent_path() ? config_path.parent_path() : fs::path(".");
  inv.seed = seed;
  inv.out = std::move(out);
  return inv;
}

namespace {

// Field access with config-path error messages. Every command calls
// `allow` first so typos fail before any work starts.
class Config {
 public:
  Config(const Invocation& inv, std::string command) : inv_(inv), command_(std::move(command)) {}

  void allow(std::initializer_list<const char*> keys) const {
    std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& [key, value] : inv_.config.items())
      if (!ok.count(key)) fail("unknown field '" + key + "'");
  }

  bool has(const char* key) const { return inv_.config.contains(key); }
  const json& raw(const char* key) const {
    if (!has(key)) fail("missing field '" + std::string(key) + "'");
    return inv_.config.at(key);
  }

  template <class T>
  T get(const char* key) const {
    try {
      return raw(key).get<T>();
    } catch (const json::exception&) {
      fail("field '" + std::string(key) + "' has the wrong type");
    }
  }

  template <class T>
  T get(const char* key, T fallback) const {
    return has(key) ? get<T>(key) : fallback;
  }

  fs::path path(const char* key) const { return resolve(get<std::string>(key)); }

  fs::path existing(const char* key) const {
    auto p = path(key);
    if (!fs::exists(p)) fail("'" + std::string(key) + "' path does not exist: " + p.string());
    return p;
  }

  fs::path resolve(const std::string& p) const {
    fs::path f(p);
    return f.is_absolute() ? f : inv_.base_dir / f;
  }

  std::uint64_t seed() const { return inv_.seed ? *inv_.seed : get<std::uint64_t>("seed", 1); }

  [[noreturn]] void fail(const std::string& what) const { throw ConfigError(command_ + " config: " + what); }

 private:
  const Invocation& inv_;
  std::string command_;
};

std::vector<std::vector<std::string>> subset_list(const Config& cfg, const char* key, const data::Schema& schema) {
  std::vector<std::vector<std::string>> subsets;
  try {
    subsets = cfg.raw(key).get<std::vector<std::vector<std::string>>>();
  } catch (const json::exception&) {
    cfg.fail("'" + std::string(key) + "' must be a list of variable-name lists");
  }
  for (const auto& s : subsets) {
    if (s.empty()) cfg.fail("'" + std::string(key) + "' contains an empty subset");
    schema.indices_of(s);
  }
  return subsets;
}

std::string file_token(const std::string& text) {
  std::string out;
  for (char c : text) out += std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ? c : '+';
  return out;
}

template <class Fn>
void write_text(const fs::path& path, Fn&& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  body(out);
  out.flush();
  if (!out) throw Error("failed writing " + path.string());
}

void write_string(const fs::path& path, const std::string& text) {
  write_text(path, [&](std::ostream& o) { o << text; });
}

}  // namespace

// ---------------------------------------------------------------- preprocess

CommandResult cmd_preprocess(const Invocation& inv) {
  Config cfg(inv, "preprocess");
  cfg.allow({"input", "numerical", "missing_threshold", "bins", "fractions", "seed"});
  const auto input = cfg.existing("input");
  const auto numerical = cfg.get<std::set<std::string>>("numerical", {});
  const double threshold = cfg.get<double>("missing_threshold", 0.2);
  const auto bins = cfg.get<std::size_t>("bins", 5);
  const auto fractions = cfg.get<std::array<double, 3>>("fractions", {0.4, 0.4, 0.2});
  const auto seed = cfg.seed();
  if (!(threshold > 0.0 && threshold <= 1.0)) cfg.fail("missing_threshold must lie in (0, 1]");
  if (bins < 1) cfg.fail("bins must be at least 1");

  CommandResult result;
  const auto raw = data::load_csv(input, numerical);
  std::vector<std::string> dropped;
  const auto kept = data::drop_sparse_columns(raw, threshold, &dropped);
  for (const auto& d : dropped) result.messages.push_back("dropped column '" + d + "' (too many missing values)");
  const auto coded = data::code_table(kept, bins);
  const auto parts = data::split(coded, fractions, seed);

  Staging stage(inv.out);
  coded.schema().save(stage.file("schema.json"));
  data::save_coded_csv(stage.file("train.csv"), parts.train);
  data::save_coded_csv(stage.file("validation.csv"), parts.validation);
  data::save_coded_csv(stage.file("test.csv"), parts.test);
  json summary{{"input", input.string()},
               {"rows", coded.rows()},
               {"dropped_columns", dropped},
               {"variables", coded.schema().names()},
               {"cardinalities", coded.schema().cardinalities()},
               {"split_rows", {parts.train.rows(), parts.validation.rows(), parts.test.rows()}},
               {"seed", seed},
               {"schema_hash", coded.schema().hash()}};
  write_string(stage.file("preprocess.json"), summary.dump(2) + "\n");
  result.outputs = stage.commit();
  return result;
}

// ---------------------------------------------------------------- train

CommandResult cmd_train(const Invocation& inv) {
  Config cfg(inv, "train");
  cfg.allow({"kind", "schema", "train", "validation", "train_config", "search", "seed"});
  const auto kind = cfg.get<std::string>("kind");
  models::model_files(kind);  // rejects unknown kinds
  const auto schema = data::Schema::load(cfg.existing("schema"));
  auto config = models::TrainConfig::from_json(cfg.get<json>("train_config", json::object()));
  if (inv.seed || cfg.has("seed")) config.seed = cfg.seed();
  config.validate();
  std::optional<models::SearchSpace> space;
  if (cfg.has("search")) {
    space = models::SearchSpace::from_json(cfg.raw("search"));
    if (!cfg.has("validation")) cfg.fail("search mode needs a 'validation' table");
  }
  const auto train = data::load_coded_csv(cfg.existing("train"), schema);

  CommandResult result;
  Staging stage(inv.out);
  models::FitResult fit{models::UniformModel{schema}, {}};
  models::TrainConfig used = config;
  if (space) {
    const auto validation = data::load_coded_csv(cfg.existing("validation"), schema);
    auto search = models::random_search(kind, train, validation, config, *space, config.seed);
    write_text(stage.file("trials.csv"), [&](std::ostream& o) { models::write_trials_csv(o, search.trials); });
    used = search.trials.front().config;
    fit = std::move(search.best);
    result.messages.push_back("best trial " + std::to_string(search.trials.front().index) + ", validation SRMSE " +
                              eval::format_number(search.trials.front().validation_srmse));
  } else {
    fit = models::fit_model(kind, train, config);
  }
  if (fit.log.columns.empty()) fit.log.columns = {"epoch"};
  models::save_model(stage.dir(), fit.model, used);
  write_text(stage.file("training_log.csv"), [&](std::ostream& o) { fit.log.write_csv(o); });
  if (!fit.log.rows.empty()) {
    std::ostringstream last;
    const auto& row = fit.log.rows.back();
    for (std::size_t c = 0; c < row.size(); ++c)
      last << (c ? " " : "") << fit.log.columns[c] << "=" << eval::format_number(row[c]);
    result.messages.push_back("final epoch: " + last.str());
  }
  result.outputs = stage.commit();
  return result;
}

// ---------------------------------------------------------------- generate

CommandResult cmd_generate(const Invocation& inv) {
  Config cfg(inv, "generate");
  cfg.allow({"model", "schema", "n", "seed"});
  const auto schema = data::Schema::load(cfg.existing("schema"));
  const auto model_dir = cfg.existing("model");
  const auto n = cfg.get<std::size_t>("n");
  if (n < 1) cfg.fail("n must be at least 1");
  const auto seed = cfg.seed();
  const auto loaded = models::load_model(model_dir, schema);

  CommandResult result;
  Staging stage(inv.out);
  data::save_coded_csv(stage.file("generated.csv"), models::sample(loaded.model, n, seed));
  result.outputs = stage.commit();
  return result;
}

// ---------------------------------------------------------------- evaluate

CommandResult cmd_evaluate(const Invocation& inv) {
  Config cfg(inv, "evaluate");
  cfg.allow({"schema", "train", "test", "generated", "model_name", "subsets", "plots"});
  const auto schema = data::Schema::load(cfg.existing("schema"));
  const auto model_name = cfg.get<std::string>("model_name", "model");
  const bool plots = cfg.get<bool>("plots", true);
  std::vector<std::vector<std::string>> subsets;
  if (cfg.has("subsets")) {
    subsets = subset_list(cfg, "subsets", schema);
  } else {
    const auto names = schema.names();
    for (std::size_t a = 0; a < names.size(); ++a)
      for (std::size_t b = a + 1; b < names.size(); ++b) subsets.push_back({names[a], names[b]});
    if (names.size() != 2) subsets.push_back(names);
  }
  const auto train = data::load_coded_csv(cfg.existing("train"), schema);
  const auto test = data::load_coded_csv(cfg.existing("test"), schema);
  const auto generated = data::load_coded_csv(cfg.existing("generated"), schema);

  CommandResult result;
  Staging stage(inv.out);
  std::vector<eval::MetricsRow> rows;
  for (std::size_t i = 0; i < subsets.size(); ++i) {
    const auto& vars = subsets[i];
    rows.push_back(eval::evaluate_subset(train, test, generated, vars, model_name));
    if (!plots) continue;
    const auto& row = rows.back();
    const auto points =
        eval::scatter_data(eval::empirical_joint(generated, vars), eval::empirical_joint(test, vars));
    auto shown = [](std::optional<double> v) { return v ? eval::format_number(*v) : std::string("undefined"); };
    const std::vector<std::string> corner{"SRMSE " + eval::format_number(row.srmse), "Pearson " + shown(row.pearson),
                                          "R2 " + shown(row.r2)};
    const auto name = "scatter_" + std::to_string(i + 1) + "_" + file_token(row.subset) + ".svg";
    write_string(stage.file(name), plot::scatter_svg(points, model_name + ": " + row.subset, corner));
  }
  write_text(stage.file("metrics.csv"), [&](std::ostream& o) { eval::write_metrics_csv(o, rows); });
  result.outputs = stage.commit();
  return result;
}

// ---------------------------------------------------------------- sweep

namespace {

struct SweepModel {
  std::string name;
  models::AnyModel model;
};

std::vector<SweepModel> sweep_models(const Config& cfg, const data::Schema& schema, const data::CodedTable& train) {
  std::vector<SweepModel> out;
  const auto& list = cfg.raw("models");
  if (!list.is_array() || list.empty()) cfg.fail("'models' must be a nonempty list");
  std::set<std::string> names;
  for (const auto& entry : list) {
    if (!entry.is_object()) cfg.fail("each model entry must be an object");
    for (const auto& [key, v] : entry.items())
      if (key != "name" && key != "kind" && key != "model") cfg.fail("unknown model entry field '" + key + "'");
    if (entry.contains("model") == entry.contains("kind")) cfg.fail("each model entry needs exactly one of 'model' or 'kind'");
    if (entry.contains("model")) {
      const auto dir = cfg.resolve(entry.at("model").get<std::string>());
      auto loaded = models::load_model(dir, schema);
      const auto name = entry.value("name", models::kind_name(loaded.model));
      out.push_back({name, std::move(loaded.model)});
    } else {
      const auto kind = entry.at("kind").get<std::string>();
      const auto name = entry.value("name", kind);
      if (kind == "marginal") {
        out.push_back({name, models::marginal_fit(train)});
      } else if (kind == "uniform") {
        out.push_back({name, models::UniformModel{schema}});
      } else {
        cfg.fail("inline model kind must be 'marginal' or 'uniform'; trained models are given by 'model'");
      }
    }
    if (!names.insert(out.back().name).second) cfg.fail("duplicate model name '" + out.back().name + "'");
  }
  return out;
}

}  // namespace

CommandResult cmd_sweep(const Invocation& inv) {
  Config cfg(inv, "sweep");
  cfg.allow({"schema", "train", "test", "models", "ladder", "n", "step", "curve_subset", "base_model", "log_x",
             "log_y", "seed"});
  const auto schema = data::Schema::load(cfg.existing("schema"));
  std::vector<std::vector<std::string>> ladder;
  if (cfg.has("ladder")) {
    ladder = subset_list(cfg, "ladder", schema);
  } else {
    const auto names = schema.names();
    for (std::size_t k = 1; k <= names.size(); ++k) ladder.emplace_back(names.begin(), names.begin() + k);
  }
  if (ladder.empty()) cfg.fail("'ladder' must not be empty");
  const auto n = cfg.get<std::size_t>("n", 200000);
  const auto step = cfg.get<std::size_t>("step", 10000);
  if (n < 1 || step < 1) cfg.fail("n and step must be at least 1");
  std::vector<std::string> curve_subset = ladder.back();
  if (cfg.has("curve_subset")) {
    curve_subset = cfg.get<std::vector<std::string>>("curve_subset");
    schema.indices_of(curve_subset);
  }
  const bool log_x = cfg.get<bool>("log_x", true), log_y = cfg.get<bool>("log_y", true);
  const auto seed = cfg.seed();
  const auto train = data::load_coded_csv(cfg.existing("train"), schema);
  const auto test = data::load_coded_csv(cfg.existing("test"), schema);
  const auto entries = sweep_models(cfg, schema, train);
  std::string base = cfg.get<std::string>("base_model", "wgan");
  if (std::none_of(entries.begin(), entries.end(), [&](const SweepModel& m) { return m.name == base; })) {
    if (cfg.has("base_model")) cfg.fail("base_model '" + base + "' is not among the models");
    base = entries.front().name;
  }

  std::vector<eval::NamedSampler> samplers;
  for (const auto& e : entries)
    samplers.push_back({e.name, [&e](std::size_t rows, std::uint64_t s) { return models::sample(e.model, rows, s); }});
  const auto rows = eval::dimension_sweep(train, test, samplers, ladder, n, seed);

  CommandResult result;
  Staging stage(inv.out);
  write_text(stage.file("sweep.csv"), [&](std::ostream& o) { eval::write_sweep_csv(o, rows); });

  // Ratio table with the base model as reference, one block per subset.
  write_text(stage.file("zero_ratios.csv"), [&](std::ostream& o) {
    o << "subset,n_c,model,n_sampling_zeros,n_recovered,n_structural_proxy,ratio,additional_ratio_percent\n";
    for (const auto& row : rows) {
      std::optional<double> base_ratio;
      for (const auto& other : rows)
        if (other.subset == row.subset && other.model == base) base_ratio = other.report.ratio;
      o << eval::subset_label(row.subset) << ',' << row.n_cells << ',' << row.model << ','
        << row.report.n_sampling_zeros << ',' << row.report.n_recovered << ',' << row.report.n_structural_proxy << ','
        << eval::format_number(row.report.ratio) << ','
        << eval::format_number(eval::additional_ratio_percent(row.report.ratio, base_ratio)) << '\n';
    }
  });

  std::vector<plot::Series> curve_series, recovered_series;
  for (const auto& e : entries) {
    const auto generated = models::sample(e.model, n, eval::sweep_sample_seed(seed, e.name));
    const auto curve = eval::ratio_curve(train, test, generated, curve_subset, step);
    write_text(stage.file("curve_" + file_token(e.name) + ".csv"),
               [&](std::ostream& o) { eval::write_curve_csv(o, curve); });
    plot::Series ratio{e.name, {}}, recovered{e.name, {}};
    for (const auto& p : curve) {
      if (p.report.ratio) ratio.points.emplace_back(static_cast<double>(p.generated), *p.report.ratio);
      recovered.points.emplace_back(static_cast<double>(p.generated), p.report.recovered_fraction);
    }
    curve_series.push_back(std::move(ratio));
    recovered_series.push_back(std::move(recovered));
  }
  const std::string curve_label = eval::subset_label(curve_subset);
  write_string(stage.file("ratio_curve.svg"),
               plot::line_svg(curve_series, {"Structural / sampling zero ratio, " + curve_label,
                                             "observations generated", "ratio", false, false}));
  write_string(stage.file("recovered_curve.svg"),
               plot::line_svg(recovered_series, {"Recovered sampling zeros, " + curve_label, "observations generated",
                                                 "fraction recovered", false, false}));

  std::vector<plot::Series> by_dimension;
  for (const auto& e : entries) {
    plot::Series s{e.name, {}};
    for (const auto& row : rows)
      if (row.model == e.name && row.report.ratio)
        s.points.emplace_back(static_cast<double>(row.n_cells), *row.report.ratio);
    by_dimension.push_back(std::move(s));
  }
  write_string(stage.file("ratio_by_dimension.svg"),
               plot::line_svg(by_dimension, {"Structural / sampling zero ratio by number of combinations",
                                             "possible combinations", "ratio", log_x, log_y}));
  result.outputs = stage.commit();
  return result;
}

// ---------------------------------------------------------------- synth-data

CommandResult cmd_synth_data(const Invocation& inv) {
  Config cfg(inv, "synth-data");
  cfg.allow({"spec", "n", "seed", "joint_subset"});
  const auto spec_name = cfg.get<std::string>("spec", "builtin");
  const auto spec =
      spec_name == "builtin" ? oracle::default_benchmark() : oracle::GroundTruthSpec::load(cfg.resolve(spec_name));
  spec.validate();
  const auto n = cfg.get<std::size_t>("n");
  if (n < 1) cfg.fail("n must be at least 1");
  auto joint_vars = spec.schema.names();
  if (cfg.has("joint_subset")) {
    joint_vars = cfg.get<std::vector<std::string>>("joint_subset");
    spec.schema.indices_of(joint_vars);
  }
  const auto seed = cfg.seed();

  CommandResult result;
  const auto population = oracle::generate_population(spec, n, seed);
  Staging stage(inv.out);
  data::save_coded_csv(stage.file("population.csv"), population);
  spec.schema.save(stage.file("schema.json"));
  spec.save(stage.file("spec.json"));
  write_text(stage.file("exact_joint.csv"),
             [&](std::ostream& o) { oracle::write_exact_joint_csv(o, oracle::exact_joint(spec, joint_vars)); });
  result.messages.push_back("spec " + spec.hash() + ", N_c " + std::to_string(spec.n_cells()) +
                            ", structural-zero fraction " + eval::format_number(spec.structural_zero_fraction()));
  result.outputs = stage.commit();
  return result;
}

CommandResult run_command(const std::string& name, const Invocation& inv) {
  if (name == "preprocess") return cmd_preprocess(inv);
  if (name == "train") return cmd_train(inv);
  if (name == "generate") return cmd_generate(inv);
  if (name == "evaluate") return cmd_evaluate(inv);
  if (name == "sweep") return cmd_sweep(inv);
  if (name == "synth-data") return cmd_synth_data(inv);
  throw ConfigError("unknown subcommand '" + name + "'");
}

}  // namespace synthpop::cli
