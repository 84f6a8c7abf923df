#include <ostream>

#include "synthpop/error.hpp"
#include "synthpop/eval.hpp"
#include "synthpop/models.hpp"

namespace synthpop::models {

void TrainConfig::validate() const {
  auto positive_count = [](std::size_t v, const char* name) {
    if (v < 1) throw ConfigError(std::string(name) + " must be at least 1");
  };
  auto positive_real = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(name) + " must be a positive number");
  };
  positive_count(epochs, "epochs");
  positive_count(batch_size, "batch_size");
  positive_count(latent_dim, "latent_dim");
  positive_count(n_critic, "n_critic");
  positive_real(vae_learning_rate, "vae_learning_rate");
  positive_real(generator_learning_rate, "generator_learning_rate");
  positive_real(critic_learning_rate, "critic_learning_rate");
  positive_real(clip_c, "clip_c");
  positive_real(gumbel_temperature, "gumbel_temperature");
  if (!(kl_weight >= 0.0) || !std::isfinite(kl_weight)) throw ConfigError("kl_weight must be nonnegative");
  for (const auto* layers : {&encoder_hidden, &decoder_hidden, &generator_hidden, &critic_hidden})
    for (auto w : *layers) positive_count(w, "hidden layer width");
}

nlohmann::json TrainConfig::to_json() const {
  return {
      {"epochs", epochs},
      {"batch_size", batch_size},
      {"vae_learning_rate", vae_learning_rate},
      {"generator_learning_rate", generator_learning_rate},
      {"critic_learning_rate", critic_learning_rate},
      {"latent_dim", latent_dim},
      {"clip_c", clip_c},
      {"n_critic", n_critic},
      {"gumbel_temperature", gumbel_temperature},
      {"kl_weight", kl_weight},
      {"seed", seed},
      {"encoder_hidden", encoder_hidden},
      {"decoder_hidden", decoder_hidden},
      {"generator_hidden", generator_hidden},
      {"critic_hidden", critic_hidden},
      {"gan_loss", gan_loss == GanLoss::wasserstein ? "wasserstein" : "standard"},
      {"relaxation", relaxation == Relaxation::gumbel_softmax ? "gumbel_softmax" : "softmax"},
  };
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j, const TrainConfig& defaults) {
  if (!j.is_object()) throw ConfigError("train config must be a JSON object");
  static const std::vector<std::string> known{
      "epochs", "batch_size", "vae_learning_rate", "generator_learning_rate", "critic_learning_rate",
      "latent_dim", "clip_c", "n_critic", "gumbel_temperature", "kl_weight", "seed", "encoder_hidden",
      "decoder_hidden", "generator_hidden", "critic_hidden", "gan_loss", "relaxation"};
  for (const auto& [key, value] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError("unknown train config field '" + key + "'");
  TrainConfig c = defaults;
  try {
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.vae_learning_rate = j.value("vae_learning_rate", c.vae_learning_rate);
    c.generator_learning_rate = j.value("generator_learning_rate", c.generator_learning_rate);
    c.critic_learning_rate = j.value("critic_learning_rate", c.critic_learning_rate);
    c.latent_dim = j.value("latent_dim", c.latent_dim);
    c.clip_c = j.value("clip_c", c.clip_c);
    c.n_critic = j.value("n_critic", c.n_critic);
    c.gumbel_temperature = j.value("gumbel_temperature", c.gumbel_temperature);
    c.kl_weight = j.value("kl_weight", c.kl_weight);
    c.seed = j.value("seed", c.seed);
    c.encoder_hidden = j.value("encoder_hidden", c.encoder_hidden);
    c.decoder_hidden = j.value("decoder_hidden", c.decoder_hidden);
    c.generator_hidden = j.value("generator_hidden", c.generator_hidden);
    c.critic_hidden = j.value("critic_hidden", c.critic_hidden);
    if (j.contains("gan_loss")) {
      const auto s = j.at("gan_loss").get<std::string>();
      if (s == "wasserstein") c.gan_loss = GanLoss::wasserstein;
      else if (s == "standard") c.gan_loss = GanLoss::standard;
      else throw ConfigError("gan_loss must be 'wasserstein' or 'standard'");
    }
    if (j.contains("relaxation")) {
      const auto s = j.at("relaxation").get<std::string>();
      if (s == "gumbel_softmax") c.relaxation = Relaxation::gumbel_softmax;
      else if (s == "softmax") c.relaxation = Relaxation::softmax;
      else throw ConfigError("relaxation must be 'gumbel_softmax' or 'softmax'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid train config: ") + e.what());
  }
  c.validate();
  return c;
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) { return from_json(j, TrainConfig{}); }

void TrainingLog::write_csv(std::ostream& out) const {
  for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << eval::format_number(row[c]);
    out << '\n';
  }
}

}  // namespace synthpop::models
