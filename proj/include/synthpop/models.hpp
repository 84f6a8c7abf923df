#pragma once

// Population synthesizers: a variational autoencoder, an adversarial
// generator (Wasserstein critic by default, standard-GAN loss as a variant),
// and the marginal and uniform baselines. Every model exposes fitting on a
// coded training table and seeded sampling of new coded agents.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "synthpop/data.hpp"
#include "synthpop/nn.hpp"
#include "synthpop/rng.hpp"

namespace synthpop::models {

enum class GanLoss { wasserstein, standard };
enum class Relaxation { gumbel_softmax, softmax };

struct TrainConfig {
  std::size_t epochs = 200;
  std::size_t batch_size = 256;
  double vae_learning_rate = 1e-3;
  double generator_learning_rate = 5e-5;
  double critic_learning_rate = 5e-5;
  std::size_t latent_dim = 16;
  double clip_c = 0.01;
  std::size_t n_critic = 5;
  double gumbel_temperature = 0.5;
  double kl_weight = 1.0;
  std::uint64_t seed = 1;
  std::vector<std::size_t> encoder_hidden{64, 64};
  std::vector<std::size_t> decoder_hidden{64, 64};
  std::vector<std::size_t> generator_hidden{64, 64};
  std::vector<std::size_t> critic_hidden{64, 64};
  GanLoss gan_loss = GanLoss::wasserstein;
  Relaxation relaxation = Relaxation::gumbel_softmax;

  /// Throws ConfigError for non-positive counts or rates.
  void validate() const;
  nlohmann::json to_json() const;
  /// Fields absent from `j` keep the values in `defaults`.
  static TrainConfig from_json(const nlohmann::json& j, const TrainConfig& defaults);
  static TrainConfig from_json(const nlohmann::json& j);

  bool operator==(const TrainConfig&) const = default;
};

/// Per-epoch training record; `columns[0]` is "epoch".
struct TrainingLog {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void write_csv(std::ostream& out) const;
};

// ---------------------------------------------------------------- VAE

struct VaeModel {
  data::Schema schema;
  nn::Mlp encoder;  // one-hot width -> 2 * latent_dim (means, then log-variances)
  nn::Mlp decoder;  // latent_dim -> one-hot width, softmax blocks
  std::size_t latent_dim = 0;
  double kl_weight = 1.0;

  static VaeModel create(const data::Schema& schema, const TrainConfig& config, Rng& rng);
};

/// Gaussian KL against the standard normal for one row: sum of
/// (mean^2 + exp(log_var) - 1 - log_var) / 2.
double gaussian_kl(std::span<const double> mean, std::span<const double> log_var);

struct VaeLoss {
  double loss = 0.0;
  double reconstruction = 0.0;
  double kl = 0.0;
  nn::Gradients encoder;
  nn::Gradients decoder;
};

/// Reconstruction cross-entropy of the decoded reparameterized sample plus the
/// weighted KL term, both averaged over rows. `noise` is standard normal,
/// batch x latent_dim.
VaeLoss vae_loss(const VaeModel& model, const Matrix& batch, const Matrix& noise);

TrainingLog fit_vae(VaeModel& model, const Matrix& train, const TrainConfig& config);

data::CodedTable vae_sample(const VaeModel& model, std::size_t n, std::uint64_t seed);

// ---------------------------------------------------------------- GAN

struct GanModel {
  data::Schema schema;
  nn::Mlp generator;  // latent_dim -> one-hot width, softmax blocks
  nn::Mlp critic;     // one-hot width -> 1 (linear score, or sigmoid for the standard loss)
  std::size_t latent_dim = 0;
  double clip_c = 0.01;
  std::size_t n_critic = 5;
  GanLoss loss = GanLoss::wasserstein;

  static GanModel create(const data::Schema& schema, const TrainConfig& config, Rng& rng);
};

struct LossPair {
  double discriminator = 0.0;
  double generator = 0.0;
};

/// Standard-GAN losses for discriminator probabilities (clamped away from 0 and 1).
LossPair gan_losses(double d_real, double d_fake);

/// Wasserstein losses on raw critic scores: -[d_real + (1 - d_fake)] and 1 - d_fake.
LossPair wgan_losses(double d_real, double d_fake);

struct GanTrainState {
  nn::AdamState generator;
  nn::AdamState critic;
  Rng rng;

  static GanTrainState create(const GanModel& model, const TrainConfig& config, Rng rng);
};

struct GanStepLosses {
  double critic_loss = 0.0;     // last critic update
  double generator_loss = 0.0;
  double score_gap = 0.0;       // mean real score - mean fake score, last critic update
};

/// n_critic critic updates (clipped after each for the Wasserstein loss), then
/// one generator update. Critic update k uses real_batches[k % size].
GanStepLosses gan_train_step(GanModel& model, std::span<const Matrix> real_batches, const TrainConfig& config,
                             GanTrainState& state);

/// Block-wise relaxation of generator logits into soft one-hot rows.
Matrix relax_logits(const Matrix& logits, std::span<const std::size_t> blocks, Relaxation mode, double temperature,
                    Rng& rng);
/// Gradient of the relaxation: d loss / d logits from d loss / d relaxed rows.
Matrix relax_backward(const Matrix& relaxed, const Matrix& grad, std::span<const std::size_t> blocks,
                      Relaxation mode, double temperature);

TrainingLog fit_gan(GanModel& model, const Matrix& train, const TrainConfig& config);

data::CodedTable gan_sample(const GanModel& model, std::size_t n, std::uint64_t seed);

// ---------------------------------------------------------------- baselines

struct MarginalModel {
  data::Schema schema;
  std::vector<std::vector<double>> frequencies;  // per variable, sums to 1
};

MarginalModel marginal_fit(const data::CodedTable& train);
data::CodedTable marginal_sample(const MarginalModel& model, std::size_t n, std::uint64_t seed);

struct UniformModel {
  data::Schema schema;
};

data::CodedTable uniform_sample(const data::Schema& schema, std::size_t n, std::uint64_t seed);

// ---------------------------------------------------------------- any model

using AnyModel = std::variant<VaeModel, GanModel, MarginalModel, UniformModel>;

/// "vae", "wgan", "gan", "marginal" or "uniform".
std::string kind_name(const AnyModel& model);
const data::Schema& model_schema(const AnyModel& model);
data::CodedTable sample(const AnyModel& model, std::size_t n, std::uint64_t seed);

struct FitResult {
  AnyModel model;
  TrainingLog log;
};

/// Builds and trains a model of the named kind. "gan" selects the standard loss.
FitResult fit_model(const std::string& kind, const data::CodedTable& train, const TrainConfig& config);

// Model directory: model.json sidecar (kind, train config, schema hash,
// baseline frequencies) plus one parameter file per network.
void save_model(const std::filesystem::path& dir, const AnyModel& model, const TrainConfig& config);

struct LoadedModel {
  AnyModel model;
  TrainConfig config;
};

/// Throws SchemaError when the sidecar's schema hash differs from `schema`.
LoadedModel load_model(const std::filesystem::path& dir, const data::Schema& schema);

/// Files save_model writes for a model of this kind, relative to the directory.
std::vector<std::string> model_files(const std::string& kind);

// ---------------------------------------------------------------- search

struct SearchSpace {
  std::size_t trials = 8;
  double learning_rate_min = 1e-5;
  double learning_rate_max = 3e-3;
  std::vector<std::size_t> latent_dims{8, 16, 32};
  std::vector<std::size_t> hidden_widths{32, 64, 128};
  std::vector<std::size_t> hidden_depths{1, 2};

  static SearchSpace from_json(const nlohmann::json& j);
};

struct Trial {
  std::size_t index = 0;
  TrainConfig config;
  double validation_srmse = 0.0;
};

struct SearchResult {
  std::vector<Trial> trials;  // sorted by validation SRMSE, ascending
  FitResult best;
};

/// Mean SRMSE over every two-variable joint (the single marginal for a
/// one-variable schema) between `validation` and a same-sized sample.
double validation_score(const AnyModel& model, const data::CodedTable& validation, std::uint64_t seed);

/// Seeded random search over learning rate, latent size and hidden layout.
SearchResult random_search(const std::string& kind, const data::CodedTable& train,
                           const data::CodedTable& validation, const TrainConfig& base, const SearchSpace& space,
                           std::uint64_t seed);

void write_trials_csv(std::ostream& out, std::span<const Trial> trials);

}  // namespace synthpop::models
