#include <cmath>

#include "internal.hpp"
#include "synthpop/error.hpp"
#include "synthpop/models.hpp"

namespace synthpop::models {

VaeModel VaeModel::create(const data::Schema& schema, const TrainConfig& config, Rng& rng) {
  config.validate();
  VaeModel m;
  m.schema = schema;
  m.latent_dim = config.latent_dim;
  m.kl_weight = config.kl_weight;
  const std::size_t width = schema.one_hot_width();
  m.encoder = nn::Mlp::glorot(width, config.encoder_hidden, nn::Activation::relu, 2 * config.latent_dim,
                              nn::Activation::linear, {}, rng);
  m.decoder = nn::Mlp::glorot(config.latent_dim, config.decoder_hidden, nn::Activation::relu, width,
                              nn::Activation::softmax_blocks, schema.cardinalities(), rng);
  return m;
}

double gaussian_kl(std::span<const double> mean, std::span<const double> log_var) {
  if (mean.size() != log_var.size()) throw ShapeError("mean and log-variance differ in length");
  double kl = 0.0;
  for (std::size_t d = 0; d < mean.size(); ++d)
    kl += 0.5 * (mean[d] * mean[d] + std::exp(log_var[d]) - 1.0 - log_var[d]);
  return kl;
}

VaeLoss vae_loss(const VaeModel& model, const Matrix& batch, const Matrix& noise) {
  const std::size_t rows = batch.rows(), latent = model.latent_dim;
  if (noise.rows() != rows || noise.cols() != latent) throw ShapeError("noise must be batch x latent_dim");
  if (rows == 0) throw ShapeError("empty batch");

  const auto enc = nn::forward(model.encoder, batch);
  const Matrix& stats = enc.output();  // [means | log-variances]

  Matrix z(rows, latent);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t d = 0; d < latent; ++d)
      z(r, d) = stats(r, d) + std::exp(0.5 * stats(r, latent + d)) * noise(r, d);

  const auto dec = nn::forward(model.decoder, z);
  const auto ce = nn::cross_entropy_blocks(dec.output(), batch, model.schema.cardinalities());

  VaeLoss out;
  out.reconstruction = ce.loss;
  out.decoder = nn::backward(model.decoder, dec, ce.logit_gradient, nn::GradientSite::pre_activation);
  const Matrix& grad_z = out.decoder.input;

  const double scale = 1.0 / static_cast<double>(rows);
  double kl_total = 0.0;
  Matrix grad_stats(rows, 2 * latent);
  for (std::size_t r = 0; r < rows; ++r) {
    auto row = stats.row(r);
    kl_total += gaussian_kl(row.subspan(0, latent), row.subspan(latent, latent));
    for (std::size_t d = 0; d < latent; ++d) {
      const double mean = row[d], log_var = row[latent + d];
      const double sigma = std::exp(0.5 * log_var);
      grad_stats(r, d) = grad_z(r, d) + model.kl_weight * mean * scale;
      grad_stats(r, latent + d) = grad_z(r, d) * 0.5 * sigma * noise(r, d) +
                                  model.kl_weight * 0.5 * (sigma * sigma - 1.0) * scale;
    }
  }
  out.kl = kl_total * scale;
  out.loss = out.reconstruction + model.kl_weight * out.kl;
  if (!std::isfinite(out.loss)) throw DivergenceError("VAE loss is not finite");
  out.encoder = nn::backward(model.encoder, enc, grad_stats);
  return out;
}

TrainingLog fit_vae(VaeModel& model, const Matrix& train, const TrainConfig& config) {
  config.validate();
  if (train.rows() == 0) throw ConfigError("empty training data");
  if (train.cols() != model.schema.one_hot_width()) throw ShapeError("training matrix width does not match the schema");

  auto encoder_opt = nn::AdamState::for_model(model.encoder, config.vae_learning_rate);
  auto decoder_opt = nn::AdamState::for_model(model.decoder, config.vae_learning_rate);
  Rng shuffle_rng = Rng::stream(config.seed, "train/shuffle");
  Rng noise_rng = Rng::stream(config.seed, "train/noise");

  TrainingLog log{{"epoch", "loss", "reconstruction", "kl"}, {}};
  const std::size_t n = train.rows();
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto order = detail::shuffled_indices(n, shuffle_rng);
    double loss_sum = 0.0, rec_sum = 0.0, kl_sum = 0.0;
    for (std::size_t first = 0; first < n; first += config.batch_size) {
      const std::size_t count = std::min(config.batch_size, n - first);
      const Matrix batch = detail::gather_rows(train, order, first, count);
      const Matrix noise = detail::standard_normal(count, model.latent_dim, noise_rng);
      auto result = vae_loss(model, batch, noise);
      nn::adam_step(model.encoder, result.encoder, encoder_opt);
      nn::adam_step(model.decoder, result.decoder, decoder_opt);
      const auto w = static_cast<double>(count);
      loss_sum += result.loss * w;
      rec_sum += result.reconstruction * w;
      kl_sum += result.kl * w;
    }
    const auto total = static_cast<double>(n);
    log.rows.push_back({static_cast<double>(epoch), loss_sum / total, rec_sum / total, kl_sum / total});
  }
  return log;
}

data::CodedTable vae_sample(const VaeModel& model, std::size_t n, std::uint64_t seed) {
  Rng rng = Rng::stream(seed, "sample");
  data::CodedTable out(model.schema);
  out.reserve(n);
  for (std::size_t done = 0; done < n; done += detail::kSampleChunk) {
    const std::size_t count = std::min(detail::kSampleChunk, n - done);
    const Matrix z = detail::standard_normal(count, model.latent_dim, rng);
    const auto pass = nn::forward(model.decoder, z);
    detail::append_categorical_rows(pass.output(), model.schema, rng, out);
  }
  return out;
}

}  // namespace synthpop::models
