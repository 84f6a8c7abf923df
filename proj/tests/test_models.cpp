#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "support/oracles.hpp"
#include "synthpop/error.hpp"
#include "synthpop/eval.hpp"
#include "synthpop/models.hpp"

using namespace synthpop;
using namespace synthpop::models;
using data::CodedTable;
using data::Schema;

namespace {

Schema schema_of(std::vector<std::size_t> cards) {
  std::vector<data::VariableSpec> vars;
  for (std::size_t i = 0; i < cards.size(); ++i) {
    data::VariableSpec v;
    v.name = "v" + std::to_string(i);
    v.cardinality = cards[i];
    for (std::size_t c = 0; c < cards[i]; ++c) v.labels.push_back(std::to_string(c));
    vars.push_back(v);
  }
  return Schema(vars);
}

TrainConfig small_config() {
  TrainConfig c;
  c.epochs = 2;
  c.batch_size = 32;
  c.latent_dim = 3;
  c.encoder_hidden = c.decoder_hidden = c.generator_hidden = c.critic_hidden = {6};
  return c;
}

bool schema_valid(const CodedTable& t) {
  for (std::size_t r = 0; r < t.rows(); ++r)
    for (std::size_t v = 0; v < t.cols(); ++v)
      if (t(r, v) >= t.schema()[v].cardinality) return false;
  return true;
}

std::vector<double> marginal(const CodedTable& t, std::size_t v) {
  std::vector<double> f(t.schema()[v].cardinality, 0.0);
  for (std::size_t r = 0; r < t.rows(); ++r) f[t(r, v)] += 1.0;
  for (double& x : f) x /= static_cast<double>(t.rows());
  return f;
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag)
      : path(std::filesystem::temp_directory_path() / ("synthpop-test-" + tag)) {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("gaussian KL hand values") {
  const double zero[] = {0.0}, one[] = {1.0}, ln4[] = {std::log(4.0)};
  CHECK(gaussian_kl(zero, zero) == 0.0);
  CHECK(std::abs(gaussian_kl(one, zero) - 0.5) < 1e-9);
  CHECK(std::abs(gaussian_kl(zero, ln4) - 0.5 * (4.0 - 1.0 - std::log(4.0))) < 1e-9);
  CHECK(std::abs(gaussian_kl(zero, ln4) - 0.8068528194400547) < 1e-9);
}

TEST_CASE("standard GAN losses hand values") {
  const double d = nn::kProbabilityFloor;
  CHECK(std::abs(gan_losses(1 - d, d).discriminator) < 1e-9);
  const auto half = gan_losses(0.5, 0.5);
  CHECK(std::abs(half.discriminator - 2 * std::log(2.0)) < 1e-9);
  CHECK(std::abs(half.generator - std::log(0.5)) < 1e-9);
  const double near_zero = gan_losses(0.5, 1e-9).generator;
  CHECK(near_zero < 0.0);
  CHECK(near_zero > -1e-8);
  CHECK_THROWS_AS(gan_losses(1.5, 0.5), Error);
}

TEST_CASE("Wasserstein losses hand values and gradient equivalence") {
  const auto l = wgan_losses(2.0, -1.0);
  CHECK(l.discriminator == -4.0);
  CHECK(l.generator == 2.0);
  Rng rng(6);
  for (int i = 0; i < 20; ++i) {
    const double s = rng.normal() * 10;
    CHECK(std::abs(wgan_losses(s, s).discriminator + 1.0) < 1e-12);
  }
  const double h = 1e-3;
  for (int i = 0; i < 100; ++i) {
    const double r = rng.normal() * 3, f = rng.normal() * 3;
    const double dr = (wgan_losses(r + h, f).discriminator - wgan_losses(r - h, f).discriminator) / (2 * h);
    const double df = (wgan_losses(r, f + h).discriminator - wgan_losses(r, f - h).discriminator) / (2 * h);
    CHECK(std::abs(dr - (-1.0)) < 1e-9);
    CHECK(std::abs(df - 1.0) < 1e-9);
  }
}

TEST_CASE("VAE loss gradients match finite differences") {
  auto schema = schema_of({3, 2, 4});
  Rng rng(17);
  auto config = small_config();
  config.kl_weight = 0.7;
  auto model = VaeModel::create(schema, config, rng);
  CodedTable t(schema);
  for (int r = 0; r < 5; ++r) {
    const std::uint32_t row[] = {static_cast<std::uint32_t>(rng.uniform_index(3)),
                                 static_cast<std::uint32_t>(rng.uniform_index(2)),
                                 static_cast<std::uint32_t>(rng.uniform_index(4))};
    t.push_row(row);
  }
  const Matrix batch = data::one_hot_encode(t).matrix;
  Matrix noise(5, config.latent_dim);
  for (double& v : noise.values()) v = rng.normal();
  const auto result = vae_loss(model, batch, noise);
  CHECK(std::abs(result.loss - (result.reconstruction + 0.7 * result.kl)) < 1e-12);

  const auto enc = oracles::finite_difference_check(
      model.encoder,
      [&](const nn::Mlp& e) {
        auto m = model;
        m.encoder = e;
        return vae_loss(m, batch, noise).loss;
      },
      result.encoder);
  const auto dec = oracles::finite_difference_check(
      model.decoder,
      [&](const nn::Mlp& d) {
        auto m = model;
        m.decoder = d;
        return vae_loss(m, batch, noise).loss;
      },
      result.decoder);
  CHECK(enc.max_relative_error < 1e-4);
  CHECK(dec.max_relative_error < 1e-4);
}

TEST_CASE("relaxation backward matches finite differences") {
  Rng rng(3);
  const std::vector<std::size_t> blocks{3, 2};
  Matrix logits(2, 5), coeff(2, 5);
  for (double& v : logits.values()) v = rng.normal();
  for (double& v : coeff.values()) v = rng.normal();
  for (auto mode : {Relaxation::gumbel_softmax, Relaxation::softmax}) {
    auto loss = [&](const Matrix& l) {
      Rng fixed(9);
      const auto y = relax_logits(l, blocks, mode, 0.5, fixed);
      double s = 0;
      for (std::size_t i = 0; i < y.size(); ++i) s += y.values()[i] * coeff.values()[i];
      return s;
    };
    Rng fixed(9);
    const auto y = relax_logits(logits, blocks, mode, 0.5, fixed);
    const auto g = relax_backward(y, coeff, blocks, mode, 0.5);
    for (std::size_t i = 0; i < logits.size(); ++i) {
      Matrix up = logits, down = logits;
      up.values()[i] += 1e-6;
      down.values()[i] -= 1e-6;
      const double numeric = (loss(up) - loss(down)) / 2e-6;
      CHECK(oracles::relative_error(g.values()[i], numeric) < 1e-5);
    }
  }
}

TEST_CASE("WGAN train step: clipping, update counts, generator isolation") {
  auto schema = schema_of({3, 4});
  Rng rng(23);
  auto config = small_config();
  auto model = GanModel::create(schema, config, rng);
  CHECK(nn::max_abs_parameter(model.critic) <= config.clip_c);
  auto state = GanTrainState::create(model, config, Rng(5));
  std::vector<Matrix> batches;
  for (int b = 0; b < 5; ++b) {
    CodedTable t(schema);
    for (int r = 0; r < 16; ++r) {
      const std::uint32_t row[] = {static_cast<std::uint32_t>(rng.uniform_index(3)),
                                   static_cast<std::uint32_t>(rng.uniform_index(4))};
      t.push_row(row);
    }
    batches.push_back(data::one_hot_encode(t).matrix);
  }
  for (int step = 0; step < 3; ++step) {
    const auto losses = gan_train_step(model, batches, config, state);
    CHECK(nn::max_abs_parameter(model.critic) <= config.clip_c);
    CHECK(std::isfinite(losses.score_gap));
  }
  CHECK(state.critic.t == 15);
  CHECK(state.generator.t == 3);

  // With no critic updates the step is a pure generator update.
  const auto critic_before = model.critic;
  const auto generator_before = model.generator;
  model.n_critic = 0;
  gan_train_step(model, batches, config, state);
  CHECK(model.critic == critic_before);
  CHECK_FALSE(model.generator == generator_before);
}

TEST_CASE("standard GAN variant trains without clipping") {
  auto schema = schema_of({2, 3});
  Rng rng(8);
  auto config = small_config();
  config.gan_loss = GanLoss::standard;
  config.critic_learning_rate = 0.05;
  auto model = GanModel::create(schema, config, rng);
  CHECK(model.critic.layers().back().activation == nn::Activation::sigmoid);
  CodedTable t(schema);
  for (int r = 0; r < 64; ++r) {
    const std::uint32_t row[] = {static_cast<std::uint32_t>(r % 2), static_cast<std::uint32_t>(r % 3)};
    t.push_row(row);
  }
  const auto log = fit_gan(model, data::one_hot_encode(t).matrix, config);
  CHECK(log.rows.size() == config.epochs);
  CHECK(nn::max_abs_parameter(model.critic) > config.clip_c);
}

TEST_CASE("deep samplers: validity, determinism, empty output, degenerate head") {
  const auto train = oracles::toy_3x3(2, 300);
  for (const char* kind : {"vae", "wgan", "gan"}) {
    auto fit = fit_model(kind, train, small_config());
    CHECK(kind_name(fit.model) == kind);
    CHECK(fit.log.rows.size() == 2);
    const auto a = sample(fit.model, 5000, 11), b = sample(fit.model, 5000, 11);
    CHECK(a.rows() == 5000);
    CHECK(schema_valid(a));
    CHECK(a == b);
    CHECK_FALSE(a == sample(fit.model, 5000, 12));
    CHECK(sample(fit.model, 0, 11).rows() == 0);
  }

  // Force the decoder's first block to (1, 0, 0) with a huge bias.
  auto fit = fit_model("vae", train, small_config());
  auto& vae = std::get<VaeModel>(fit.model);
  auto& last = vae.decoder.layers().back();
  for (std::size_t i = 0; i < last.in_dim(); ++i)
    for (std::size_t k = 0; k < 3; ++k) last.weights(k, i) = 0.0;
  last.bias[0] = 1000.0;
  last.bias[1] = last.bias[2] = 0.0;
  const auto s = vae_sample(vae, 2000, 4);
  for (std::size_t r = 0; r < s.rows(); ++r) CHECK(s(r, 0) == 0);
}

TEST_CASE("marginal sampler: constant variable, factorized joint, marginal bounds") {
  auto schema = schema_of({3, 3});
  CodedTable t(schema);
  for (int r = 0; r < 1000; ++r) {
    const std::uint32_t c = r % 10 < 6 ? 0 : (r % 10 < 9 ? 1 : 2);
    const std::uint32_t row[] = {c, c};
    t.push_row(row);
  }
  const auto model = marginal_fit(t);
  for (const auto& f : model.frequencies) {
    double s = 0;
    for (double x : f) s += x;
    CHECK(std::abs(s - 1.0) < 1e-9);
  }
  const std::size_t n = 100000;
  const auto gen = marginal_sample(model, n, 3);
  CHECK(gen == marginal_sample(model, n, 3));
  const std::vector<std::string> both{"v0", "v1"};
  const auto joint = eval::empirical_joint(gen, both);
  for (std::uint32_t i = 0; i < 3; ++i)
    for (std::uint32_t j = 0; j < 3; ++j) {
      const double p = model.frequencies[0][i] * model.frequencies[1][j];
      const std::uint32_t codes[] = {i, j};
      const double f = joint.frequency(eval::ComboCodec(schema, both).encode_codes(codes));
      CHECK(std::abs(f - p) <= 3 * oracles::binomial_se(p, n));
    }
  for (std::size_t v = 0; v < 2; ++v) {
    const auto f = marginal(gen, v);
    for (std::size_t c = 0; c < 3; ++c)
      CHECK(std::abs(f[c] - model.frequencies[v][c]) <= 3 * oracles::binomial_se(model.frequencies[v][c], n));
  }

  CodedTable constant(schema, {0, 1, 0, 2, 0, 0});
  const auto cg = marginal_sample(marginal_fit(constant), 1000, 1);
  for (std::size_t r = 0; r < cg.rows(); ++r) CHECK(cg(r, 0) == 0);
  CHECK_THROWS_AS(marginal_fit(CodedTable(schema)), ConfigError);
}

TEST_CASE("uniform sampler: cell frequencies within multinomial bounds") {
  auto schema = schema_of({2, 3, 1});
  const std::size_t n = 60000;
  const auto gen = uniform_sample(schema, n, 9);
  CHECK(gen == uniform_sample(schema, n, 9));
  const std::vector<std::string> ab{"v0", "v1"};
  const auto joint = eval::empirical_joint(gen, ab);
  CHECK(joint.frequencies.size() == 6);
  for (auto [c, f] : joint.frequencies) CHECK(std::abs(f - 1.0 / 6) <= 3 * oracles::binomial_se(1.0 / 6, n));
  for (std::size_t r = 0; r < gen.rows(); ++r) CHECK(gen(r, 2) == 0);
}

TEST_CASE("VAE toy training lowers the epoch loss") {
  auto config = TrainConfig{};
  config.epochs = 50;
  config.seed = 1;
  const auto fit = fit_model("vae", oracles::toy_3x3(1), config);
  REQUIRE(fit.log.rows.size() == 50);
  CHECK(fit.log.rows.back()[1] < 0.8 * fit.log.rows.front()[1]);
}

TEST_CASE("train config JSON round trip and validation") {
  TrainConfig c;
  c.epochs = 7;
  c.gan_loss = GanLoss::standard;
  c.relaxation = Relaxation::softmax;
  c.critic_hidden = {5, 4, 3};
  CHECK(TrainConfig::from_json(c.to_json()) == c);
  CHECK(TrainConfig::from_json(nlohmann::json::object()) == TrainConfig{});
  CHECK_THROWS_AS(TrainConfig::from_json(nlohmann::json{{"epoch", 3}}), ConfigError);
  CHECK_THROWS_AS(TrainConfig::from_json(nlohmann::json{{"epochs", 0}}), ConfigError);
  CHECK_THROWS_AS(TrainConfig::from_json(nlohmann::json{{"clip_c", -1.0}}), ConfigError);
  CHECK_THROWS_AS(TrainConfig::from_json(nlohmann::json{{"gan_loss", "hinge"}}), ConfigError);
}

TEST_CASE("model persistence round trips every kind and checks the schema") {
  const auto train = oracles::toy_3x3(3, 200);
  for (const char* kind : {"vae", "wgan", "gan", "marginal", "uniform"}) {
    TempDir dir(std::string("persist-") + kind);
    auto config = small_config();
    auto fit = fit_model(kind, train, config);
    save_model(dir.path, fit.model, config);
    for (const auto& f : model_files(kind)) CHECK(std::filesystem::exists(dir.path / f));
    const auto loaded = load_model(dir.path, train.schema());
    CHECK(kind_name(loaded.model) == kind);
    CHECK(sample(loaded.model, 500, 2) == sample(fit.model, 500, 2));
    CHECK_THROWS_AS(load_model(dir.path, schema_of({3, 4})), SchemaError);
  }
}

TEST_CASE("random search writes trials sorted by validation score") {
  const auto train = oracles::toy_3x3(4, 400), validation = oracles::toy_3x3(5, 200);
  SearchSpace space;
  space.trials = 3;
  auto base = small_config();
  const auto a = random_search("vae", train, validation, base, space, 7);
  REQUIRE(a.trials.size() == 3);
  for (std::size_t i = 1; i < a.trials.size(); ++i)
    CHECK(a.trials[i - 1].validation_srmse <= a.trials[i].validation_srmse);
  const auto b = random_search("vae", train, validation, base, space, 7);
  CHECK(a.trials[0].config == b.trials[0].config);
  CHECK(a.trials[0].validation_srmse == b.trials[0].validation_srmse);
  std::ostringstream out;
  write_trials_csv(out, a.trials);
  const std::string text = out.str();
  CHECK(text.rfind("trial,validation_srmse,", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 4);
}
