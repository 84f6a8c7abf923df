#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "staging.hpp"
#include "synthpop/cli.hpp"
#include "synthpop/error.hpp"
#include "synthpop/eval.hpp"
#include "synthpop/models.hpp"
#include "synthpop/oracle.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace synthpop;

namespace {

struct Workspace {
  fs::path root;
  explicit Workspace(const std::string& tag) : root(fs::temp_directory_path() / ("synthpop-cli-" + tag)) {
    fs::remove_all(root);
    fs::create_directories(root);
  }
  ~Workspace() { fs::remove_all(root); }

  cli::Invocation inv(json config, const std::string& out, std::optional<std::uint64_t> seed = {}) const {
    cli::Invocation i;
    i.config = std::move(config);
    i.base_dir = root;
    i.seed = seed;
    i.out = root / out;
    return i;
  }
  void write(const std::string& name, const std::string& text) const { std::ofstream(root / name) << text; }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t count_lines(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

std::vector<std::string> listing(const fs::path& dir) {
  std::vector<std::string> names;
  if (!fs::exists(dir)) return names;
  for (const auto& e : fs::directory_iterator(dir)) names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());
  return names;
}

// Raw survey-like file: one numerical column, one categorical column, and one
// column that is mostly missing.
std::string raw_csv() {
  std::ostringstream s;
  s << "age,mode,income\n";
  for (int i = 0; i < 60; ++i)
    s << (18 + (i * 7) % 60) << ',' << (i % 6 == 5 ? "" : i % 2 == 0 ? "car" : "bike") << ','
      << (i % 2 == 0 ? "" : std::to_string(1000 + i)) << '\n';
  return s.str();
}

// Oracle-backed train/test files in `ws`, returning the schema path.
void oracle_tables(const Workspace& ws, std::size_t rows) {
  const auto r = cli::cmd_synth_data(ws.inv({{"n", rows}, {"seed", 11}}, "train_pop"));
  const auto t = cli::cmd_synth_data(ws.inv({{"n", rows}, {"seed", 12}}, "test_pop"));
  (void)r;
  (void)t;
}

}  // namespace

TEST_CASE("preprocess writes schema and splits, drops sparse columns, is deterministic") {
  Workspace ws("pre");
  ws.write("raw.csv", raw_csv());
  const json cfg{{"input", "raw.csv"}, {"numerical", {"age", "income"}}, {"seed", 4}};
  const auto a = cli::cmd_preprocess(ws.inv(cfg, "a"));
  const auto b = cli::cmd_preprocess(ws.inv(cfg, "b"));
  CHECK(listing(ws.root / "a") ==
        std::vector<std::string>{"preprocess.json", "schema.json", "test.csv", "train.csv", "validation.csv"});
  for (const char* f : {"schema.json", "train.csv", "validation.csv", "test.csv"})
    CHECK(slurp(ws.root / "a" / f) == slurp(ws.root / "b" / f));
  REQUIRE(a.messages.size() == 1);
  CHECK(a.messages[0].find("income") != std::string::npos);

  const auto schema = data::Schema::load(ws.root / "a" / "schema.json");
  CHECK(schema.names() == std::vector<std::string>{"age", "mode"});
  CHECK(schema[1].labels.back() == data::kMissingLabel);
  CHECK(count_lines(ws.root / "a" / "train.csv") == 1 + 24);
  CHECK(count_lines(ws.root / "a" / "validation.csv") == 1 + 24);
  CHECK(count_lines(ws.root / "a" / "test.csv") == 1 + 12);
  const auto summary = json::parse(slurp(ws.root / "a" / "preprocess.json"));
  CHECK(summary["dropped_columns"] == json{"income"});

  // The seed flag overrides the config and changes the split.
  cli::cmd_preprocess(ws.inv(cfg, "c", 5));
  CHECK(slurp(ws.root / "a" / "train.csv") != slurp(ws.root / "c" / "train.csv"));
}

TEST_CASE("invalid configs fail before anything is written") {
  Workspace ws("invalid");
  ws.write("raw.csv", raw_csv());
  CHECK_THROWS_AS(cli::cmd_preprocess(ws.inv({{"input", "raw.csv"}, {"bins", 0}}, "o")), ConfigError);
  CHECK_THROWS_AS(cli::cmd_preprocess(ws.inv({{"input", "missing.csv"}}, "o")), ConfigError);
  CHECK_THROWS_AS(cli::cmd_preprocess(ws.inv({{"input", "raw.csv"}, {"typo", 1}}, "o")), ConfigError);
  CHECK_THROWS_AS(cli::cmd_train(ws.inv({{"kind", "lstm"}}, "o")), ConfigError);
  CHECK_THROWS_AS(cli::run_command("fly", ws.inv({}, "o")), ConfigError);
  CHECK_FALSE(fs::exists(ws.root / "o"));
}

TEST_CASE("a failing command leaves no partial files") {
  Workspace ws("partial");
  fs::create_directories(ws.root / "out");
  ws.write("out/keep.txt", "previous run");
  {
    cli::Staging stage(ws.root / "out");
    std::ofstream(stage.file("half.csv")) << "a,b\n";
  }
  CHECK(listing(ws.root / "out") == std::vector<std::string>{"keep.txt"});

  // A divergence during training happens after staging began.
  oracle_tables(ws, 300);
  const json cfg{{"kind", "vae"},
                 {"schema", "train_pop/schema.json"},
                 {"train", "train_pop/population.csv"},
                 {"train_config", {{"epochs", 3}, {"vae_learning_rate", 1e300}, {"batch_size", 50}}}};
  CHECK_THROWS(cli::cmd_train(ws.inv(cfg, "out")));
  CHECK(listing(ws.root / "out") == std::vector<std::string>{"keep.txt"});
}

TEST_CASE("train, generate and evaluate end to end") {
  Workspace ws("e2e");
  oracle_tables(ws, 2000);
  const json train_cfg{{"kind", "vae"},
                       {"schema", "train_pop/schema.json"},
                       {"train", "train_pop/population.csv"},
                       {"train_config", {{"epochs", 4}, {"latent_dim", 4}, {"decoder_hidden", {16}},
                                         {"encoder_hidden", {16}}}}};
  cli::cmd_train(ws.inv(train_cfg, "model"));
  CHECK(count_lines(ws.root / "model" / "training_log.csv") == 1 + 4);
  for (const auto& f : models::model_files("vae")) CHECK(fs::exists(ws.root / "model" / f));

  const json gen_cfg{{"model", "model"}, {"schema", "train_pop/schema.json"}, {"n", 3000}, {"seed", 9}};
  cli::cmd_generate(ws.inv(gen_cfg, "gen1"));
  cli::cmd_generate(ws.inv(gen_cfg, "gen2"));
  CHECK(count_lines(ws.root / "gen1" / "generated.csv") == 3001);
  CHECK(slurp(ws.root / "gen1" / "generated.csv") == slurp(ws.root / "gen2" / "generated.csv"));
  const auto schema = data::Schema::load(ws.root / "train_pop" / "schema.json");
  const auto generated = data::load_coded_csv(ws.root / "gen1" / "generated.csv", schema);  // validates codes
  CHECK(generated.rows() == 3000);

  const json eval_cfg{{"schema", "train_pop/schema.json"},
                      {"train", "train_pop/population.csv"},
                      {"test", "test_pop/population.csv"},
                      {"generated", "gen1/generated.csv"},
                      {"model_name", "vae"},
                      {"subsets", {{"age_band", "income_band"}, {"education"}}}};
  cli::cmd_evaluate(ws.inv(eval_cfg, "eval"));
  CHECK(fs::exists(ws.root / "eval" / "scatter_1_age_band+income_band.svg"));
  CHECK(fs::exists(ws.root / "eval" / "scatter_2_education.svg"));

  const auto train = data::load_coded_csv(ws.root / "train_pop" / "population.csv", schema);
  const auto test = data::load_coded_csv(ws.root / "test_pop" / "population.csv", schema);
  std::vector<eval::MetricsRow> direct;
  direct.push_back(eval::evaluate_subset(train, test, generated, std::vector<std::string>{"age_band", "income_band"}, "vae"));
  direct.push_back(eval::evaluate_subset(train, test, generated, std::vector<std::string>{"education"}, "vae"));
  std::ostringstream expected;
  eval::write_metrics_csv(expected, direct);
  CHECK(slurp(ws.root / "eval" / "metrics.csv") == expected.str());

  // Generated = test gives SRMSE 0 for every subset.
  json same = eval_cfg;
  same["generated"] = "test_pop/population.csv";
  same.erase("subsets");
  cli::cmd_evaluate(ws.inv(same, "same"));
  std::ifstream metrics(ws.root / "same" / "metrics.csv");
  std::string line;
  std::getline(metrics, line);
  std::size_t rows = 0;
  while (std::getline(metrics, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    CHECK(cells[3] == "0");
    ++rows;
  }
  CHECK(rows == 10 + 1);  // every pair plus the full joint
}

TEST_CASE("train in search mode writes sorted trials") {
  Workspace ws("search");
  oracle_tables(ws, 600);
  const json cfg{{"kind", "vae"},
                 {"schema", "train_pop/schema.json"},
                 {"train", "train_pop/population.csv"},
                 {"validation", "test_pop/population.csv"},
                 {"train_config", {{"epochs", 2}}},
                 {"search", {{"trials", 3}, {"hidden_widths", {8}}, {"hidden_depths", {1}}}}};
  cli::cmd_train(ws.inv(cfg, "m"));
  std::ifstream in(ws.root / "m" / "trials.csv");
  std::string line;
  std::getline(in, line);
  std::vector<double> scores;
  while (std::getline(in, line)) scores.push_back(std::stod(line.substr(line.find(',') + 1)));
  CHECK(scores.size() == 3);
  CHECK(std::is_sorted(scores.begin(), scores.end()));
}

TEST_CASE("sweep writes curves, ratio table and plots deterministically") {
  Workspace ws("sweep");
  oracle_tables(ws, 2000);
  const json cfg{{"schema", "train_pop/schema.json"},
                 {"train", "train_pop/population.csv"},
                 {"test", "test_pop/population.csv"},
                 {"models", {{{"kind", "uniform"}}, {{"kind", "marginal"}}}},
                 {"ladder", {{"age_band", "income_band"}, {"age_band", "income_band", "education"}}},
                 {"n", 20000},
                 {"step", 5000},
                 {"base_model", "marginal"},
                 {"seed", 3}};
  const auto a = cli::cmd_sweep(ws.inv(cfg, "a"));
  cli::cmd_sweep(ws.inv(cfg, "b"));
  for (const auto& p : a.outputs) CHECK(slurp(p) == slurp(ws.root / "b" / p.filename()));
  CHECK(listing(ws.root / "a") == std::vector<std::string>{"curve_marginal.csv", "curve_uniform.csv",
                                                           "ratio_by_dimension.svg", "ratio_curve.svg",
                                                           "recovered_curve.svg", "sweep.csv", "zero_ratios.csv"});
  CHECK(count_lines(ws.root / "a" / "curve_uniform.csv") == 1 + 4);

  std::ifstream table(ws.root / "a" / "zero_ratios.csv");
  std::string line;
  std::getline(table, line);
  while (std::getline(table, line)) {
    if (line.find(",marginal,") == std::string::npos) continue;
    const bool defined = line.find(",,") == std::string::npos;
    if (defined) CHECK(line.substr(line.rfind(',') + 1) == "0");
  }
}

TEST_CASE("synth-data writes a deterministic population with no zero cells") {
  Workspace ws("synth");
  cli::cmd_synth_data(ws.inv({{"n", 5000}}, "a", 2));
  cli::cmd_synth_data(ws.inv({{"n", 5000}, {"seed", 2}}, "b"));
  CHECK(slurp(ws.root / "a" / "population.csv") == slurp(ws.root / "b" / "population.csv"));
  const auto spec = oracle::GroundTruthSpec::load(ws.root / "a" / "spec.json");
  CHECK(spec.n_cells() == 7680);
  const auto pop = data::load_coded_csv(ws.root / "a" / "population.csv", spec.schema);
  const auto zeros = spec.zero_cells();
  eval::ComboCodec codec(spec.schema, spec.schema.names());
  for (auto c : codec.keys(pop)) CHECK_FALSE(std::binary_search(zeros.begin(), zeros.end(), c));
}
