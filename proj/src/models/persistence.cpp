#include <fstream>

#include "synthpop/error.hpp"
#include "synthpop/models.hpp"

namespace synthpop::models {

namespace {

constexpr const char* kSidecar = "model.json";
constexpr int kSidecarVersion = 1;

}  // namespace

std::vector<std::string> model_files(const std::string& kind) {
  if (kind == "vae") return {kSidecar, "encoder.spzn", "decoder.spzn"};
  if (kind == "wgan" || kind == "gan") return {kSidecar, "generator.spzn", "critic.spzn"};
  if (kind == "marginal" || kind == "uniform") return {kSidecar};
  throw ConfigError("unknown model kind '" + kind + "'");
}

void save_model(const std::filesystem::path& dir, const AnyModel& model, const TrainConfig& config) {
  std::filesystem::create_directories(dir);
  const std::string kind = kind_name(model);
  nlohmann::json side{{"format", "synthpop-model"},
                      {"version", kSidecarVersion},
                      {"kind", kind},
                      {"schema_hash", model_schema(model).hash()},
                      {"train_config", config.to_json()}};
  if (const auto* vae = std::get_if<VaeModel>(&model)) {
    side["latent_dim"] = vae->latent_dim;
    side["kl_weight"] = vae->kl_weight;
    nn::save_mlp(dir / "encoder.spzn", vae->encoder);
    nn::save_mlp(dir / "decoder.spzn", vae->decoder);
  } else if (const auto* gan = std::get_if<GanModel>(&model)) {
    side["latent_dim"] = gan->latent_dim;
    side["clip_c"] = gan->clip_c;
    side["n_critic"] = gan->n_critic;
    nn::save_mlp(dir / "generator.spzn", gan->generator);
    nn::save_mlp(dir / "critic.spzn", gan->critic);
  } else if (const auto* marginal = std::get_if<MarginalModel>(&model)) {
    side["frequencies"] = marginal->frequencies;
  }
  std::ofstream out(dir / kSidecar, std::ios::trunc);
  if (!out) throw FormatError("cannot write " + (dir / kSidecar).string());
  out << side.dump(2) << '\n';
}

LoadedModel load_model(const std::filesystem::path& dir, const data::Schema& schema) {
  std::ifstream in(dir / kSidecar);
  if (!in) throw FormatError("no model sidecar at " + (dir / kSidecar).string());
  nlohmann::json side;
  try {
    side = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("malformed model sidecar: ") + e.what());
  }
  if (side.value("format", "") != "synthpop-model" || side.value("version", 0) != kSidecarVersion)
    throw FormatError("unsupported model sidecar format");
  if (side.at("schema_hash").get<std::string>() != schema.hash())
    throw SchemaError("model was trained on a different schema (hash mismatch)");

  LoadedModel loaded{UniformModel{schema}, TrainConfig::from_json(side.at("train_config"))};
  const auto kind = side.at("kind").get<std::string>();
  if (kind == "vae") {
    VaeModel m;
    m.schema = schema;
    m.latent_dim = side.at("latent_dim").get<std::size_t>();
    m.kl_weight = side.at("kl_weight").get<double>();
    m.encoder = nn::load_mlp(dir / "encoder.spzn");
    m.decoder = nn::load_mlp(dir / "decoder.spzn");
    if (m.decoder.input_dim() != m.latent_dim || m.decoder.output_dim() != schema.one_hot_width())
      throw FormatError("decoder shape does not match the schema");
    loaded.model = std::move(m);
  } else if (kind == "wgan" || kind == "gan") {
    GanModel m;
    m.schema = schema;
    m.latent_dim = side.at("latent_dim").get<std::size_t>();
    m.clip_c = side.at("clip_c").get<double>();
    m.n_critic = side.at("n_critic").get<std::size_t>();
    m.loss = kind == "wgan" ? GanLoss::wasserstein : GanLoss::standard;
    m.generator = nn::load_mlp(dir / "generator.spzn");
    m.critic = nn::load_mlp(dir / "critic.spzn");
    if (m.generator.input_dim() != m.latent_dim || m.generator.output_dim() != schema.one_hot_width())
      throw FormatError("generator shape does not match the schema");
    loaded.model = std::move(m);
  } else if (kind == "marginal") {
    MarginalModel m{schema, side.at("frequencies").get<std::vector<std::vector<double>>>()};
    if (m.frequencies.size() != schema.size()) throw FormatError("marginal frequencies do not match the schema");
    for (std::size_t v = 0; v < schema.size(); ++v)
      if (m.frequencies[v].size() != schema[v].cardinality)
        throw FormatError("marginal frequencies do not match the schema");
    loaded.model = std::move(m);
  } else if (kind != "uniform") {
    throw FormatError("unknown model kind '" + kind + "' in sidecar");
  }
  return loaded;
}

}  // namespace synthpop::models
