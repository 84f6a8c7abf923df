#include <algorithm>
#include <cmath>

#include "internal.hpp"
#include "synthpop/error.hpp"
#include "synthpop/models.hpp"

namespace synthpop::models {

namespace {

double clamp_probability(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error("discriminator output outside [0, 1]");
  return std::clamp(p, nn::kProbabilityFloor, 1.0 - nn::kProbabilityFloor);
}

double column_mean(const Matrix& m) {
  double s = 0.0;
  for (double v : m.values()) s += v;
  return s / static_cast<double>(m.rows());
}

}  // namespace

GanModel GanModel::create(const data::Schema& schema, const TrainConfig& config, Rng& rng) {
  config.validate();
  GanModel m;
  m.schema = schema;
  m.latent_dim = config.latent_dim;
  m.clip_c = config.clip_c;
  m.n_critic = config.n_critic;
  m.loss = config.gan_loss;
  const std::size_t width = schema.one_hot_width();
  m.generator = nn::Mlp::glorot(config.latent_dim, config.generator_hidden, nn::Activation::relu, width,
                                nn::Activation::softmax_blocks, schema.cardinalities(), rng);
  const auto critic_out = m.loss == GanLoss::wasserstein ? nn::Activation::linear : nn::Activation::sigmoid;
  m.critic = nn::Mlp::glorot(width, config.critic_hidden, nn::Activation::relu, 1, critic_out, {}, rng);
  if (m.loss == GanLoss::wasserstein) nn::clip_weights(m.critic, m.clip_c);
  return m;
}

LossPair gan_losses(double d_real, double d_fake) {
  const double r = clamp_probability(d_real), f = clamp_probability(d_fake);
  return {-(std::log(r) + std::log(1.0 - f)), std::log(1.0 - f)};
}

LossPair wgan_losses(double d_real, double d_fake) { return {-(d_real + (1.0 - d_fake)), 1.0 - d_fake}; }

GanTrainState GanTrainState::create(const GanModel& model, const TrainConfig& config, Rng rng) {
  return {nn::AdamState::for_model(model.generator, config.generator_learning_rate),
          nn::AdamState::for_model(model.critic, config.critic_learning_rate), std::move(rng)};
}

Matrix relax_logits(const Matrix& logits, std::span<const std::size_t> blocks, Relaxation mode, double temperature,
                    Rng& rng) {
  Matrix out = logits;
  const bool gumbel = mode == Relaxation::gumbel_softmax;
  const double inv_t = gumbel ? 1.0 / temperature : 1.0;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    for (double& v : row) v = (gumbel ? v + rng.gumbel() : v) * inv_t;
    nn::softmax_blocks(row, blocks);
  }
  return out;
}

Matrix relax_backward(const Matrix& relaxed, const Matrix& grad, std::span<const std::size_t> blocks,
                      Relaxation mode, double temperature) {
  if (relaxed.rows() != grad.rows() || relaxed.cols() != grad.cols()) throw ShapeError("relaxation gradient shape");
  const double inv_t = mode == Relaxation::gumbel_softmax ? 1.0 / temperature : 1.0;
  Matrix out(grad.rows(), grad.cols());
  for (std::size_t r = 0; r < grad.rows(); ++r) {
    auto y = relaxed.row(r);
    auto g = grad.row(r);
    auto o = out.row(r);
    std::size_t offset = 0;
    for (std::size_t size : blocks) {
      double dot = 0.0;
      for (std::size_t k = offset; k < offset + size; ++k) dot += y[k] * g[k];
      for (std::size_t k = offset; k < offset + size; ++k) o[k] = inv_t * y[k] * (g[k] - dot);
      offset += size;
    }
  }
  return out;
}

namespace {

struct FakeBatch {
  nn::ForwardPass generator_pass;
  Matrix relaxed;
};

FakeBatch generate_relaxed(const GanModel& model, std::size_t rows, const TrainConfig& config, Rng& rng) {
  const Matrix z = detail::standard_normal(rows, model.latent_dim, rng);
  FakeBatch fake{nn::forward(model.generator, z), {}};
  fake.relaxed = relax_logits(fake.generator_pass.logits(), model.schema.cardinalities(), config.relaxation,
                              config.gumbel_temperature, rng);
  return fake;
}

// One critic update; returns (loss, score gap).
std::pair<double, double> critic_update(GanModel& model, const Matrix& real, const TrainConfig& config,
                                        GanTrainState& state) {
  const std::size_t rows = real.rows();
  const auto fake = generate_relaxed(model, rows, config, state.rng);
  const auto real_pass = nn::forward(model.critic, real);
  const auto fake_pass = nn::forward(model.critic, fake.relaxed);
  const double scale = 1.0 / static_cast<double>(rows);
  const double mean_real = column_mean(real_pass.output());
  const double mean_fake = column_mean(fake_pass.output());

  Matrix g_real(rows, 1), g_fake(rows, 1);
  double loss = 0.0;
  nn::GradientSite site = nn::GradientSite::post_activation;
  if (model.loss == GanLoss::wasserstein) {
    loss = wgan_losses(mean_real, mean_fake).discriminator;
    g_real.fill(-scale);
    g_fake.fill(scale);
  } else {
    // Sigmoid output: gradients taken at the logit for stability.
    site = nn::GradientSite::pre_activation;
    for (std::size_t r = 0; r < rows; ++r) {
      const double sr = real_pass.output()(r, 0), sf = fake_pass.output()(r, 0);
      loss += gan_losses(sr, sf).discriminator * scale;
      g_real(r, 0) = -(1.0 - sr) * scale;
      g_fake(r, 0) = sf * scale;
    }
  }
  if (!std::isfinite(loss)) throw DivergenceError("critic loss is not finite");
  auto grads = nn::backward(model.critic, real_pass, g_real, site);
  grads.add(nn::backward(model.critic, fake_pass, g_fake, site));
  nn::adam_step(model.critic, grads, state.critic);
  if (model.loss == GanLoss::wasserstein) nn::clip_weights(model.critic, model.clip_c);
  return {loss, mean_real - mean_fake};
}

double generator_update(GanModel& model, std::size_t rows, const TrainConfig& config, GanTrainState& state) {
  const auto fake = generate_relaxed(model, rows, config, state.rng);
  const auto critic_pass = nn::forward(model.critic, fake.relaxed);
  const double scale = 1.0 / static_cast<double>(rows);
  Matrix g(rows, 1);
  double loss = 0.0;
  nn::GradientSite site = nn::GradientSite::post_activation;
  if (model.loss == GanLoss::wasserstein) {
    loss = wgan_losses(0.0, column_mean(critic_pass.output())).generator;
    g.fill(-scale);
  } else {
    site = nn::GradientSite::pre_activation;
    for (std::size_t r = 0; r < rows; ++r) {
      const double sf = critic_pass.output()(r, 0);
      loss += gan_losses(0.5, sf).generator * scale;
      g(r, 0) = -sf * scale;
    }
  }
  if (!std::isfinite(loss)) throw DivergenceError("generator loss is not finite");
  // Critic gradients are discarded; only the input gradient reaches the generator.
  const auto through_critic = nn::backward(model.critic, critic_pass, g, site);
  const Matrix logit_grad = relax_backward(fake.relaxed, through_critic.input, model.schema.cardinalities(),
                                           config.relaxation, config.gumbel_temperature);
  const auto grads =
      nn::backward(model.generator, fake.generator_pass, logit_grad, nn::GradientSite::pre_activation);
  nn::adam_step(model.generator, grads, state.generator);
  return loss;
}

}  // namespace

GanStepLosses gan_train_step(GanModel& model, std::span<const Matrix> real_batches, const TrainConfig& config,
                             GanTrainState& state) {
  if (real_batches.empty()) throw ShapeError("no real batches supplied");
  GanStepLosses out;
  for (std::size_t k = 0; k < model.n_critic; ++k) {
    const Matrix& real = real_batches[k % real_batches.size()];
    if (real.rows() == 0 || real.cols() != model.schema.one_hot_width())
      throw ShapeError("real batch does not match the schema width");
    try {
      std::tie(out.critic_loss, out.score_gap) = critic_update(model, real, config, state);
    } catch (const DivergenceError& e) {
      throw DivergenceError("critic update " + std::to_string(k + 1) + ": " + e.what());
    }
  }
  try {
    out.generator_loss = generator_update(model, real_batches.front().rows(), config, state);
  } catch (const DivergenceError& e) {
    throw DivergenceError(std::string("generator update: ") + e.what());
  }
  return out;
}

TrainingLog fit_gan(GanModel& model, const Matrix& train, const TrainConfig& config) {
  config.validate();
  if (train.rows() == 0) throw ConfigError("empty training data");
  if (train.cols() != model.schema.one_hot_width()) throw ShapeError("training matrix width does not match the schema");

  auto state = GanTrainState::create(model, config, Rng::stream(config.seed, "train/critic"));
  Rng shuffle_rng = Rng::stream(config.seed, "train/shuffle");
  const std::size_t n = train.rows();
  const std::size_t batch = std::min(config.batch_size, n);
  const std::size_t batches = n / batch;
  const std::size_t steps = (batches + model.n_critic - 1) / model.n_critic;

  TrainingLog log{{"epoch", "critic_loss", "generator_loss", "score_gap"}, {}};
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto order = detail::shuffled_indices(n, shuffle_rng);
    double critic_sum = 0.0, generator_sum = 0.0, gap_sum = 0.0;
    std::vector<Matrix> real(model.n_critic);
    for (std::size_t s = 0; s < steps; ++s) {
      for (std::size_t k = 0; k < model.n_critic; ++k) {
        const std::size_t b = (s * model.n_critic + k) % batches;
        real[k] = detail::gather_rows(train, order, b * batch, batch);
      }
      const auto losses = gan_train_step(model, real, config, state);
      critic_sum += losses.critic_loss;
      generator_sum += losses.generator_loss;
      gap_sum += losses.score_gap;
    }
    const auto denom = static_cast<double>(steps);
    log.rows.push_back({static_cast<double>(epoch), critic_sum / denom, generator_sum / denom, gap_sum / denom});
  }
  return log;
}

data::CodedTable gan_sample(const GanModel& model, std::size_t n, std::uint64_t seed) {
  Rng rng = Rng::stream(seed, "sample");
  data::CodedTable out(model.schema);
  out.reserve(n);
  for (std::size_t done = 0; done < n; done += detail::kSampleChunk) {
    const std::size_t count = std::min(detail::kSampleChunk, n - done);
    const Matrix z = detail::standard_normal(count, model.latent_dim, rng);
    const auto pass = nn::forward(model.generator, z);
    detail::append_categorical_rows(pass.output(), model.schema, rng, out);
  }
  return out;
}

}  // namespace synthpop::models
