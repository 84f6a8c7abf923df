#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "synthpop/error.hpp"
#include "synthpop/nn.hpp"

namespace synthpop::nn {

namespace {

constexpr std::array<char, 4> kMagic{'S', 'P', 'Z', 'N'};

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(std::is_unsigned_v<T>);
  std::array<char, sizeof(T)> bytes{};
  for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFFu);
  out.write(bytes.data(), bytes.size());
}

template <typename T>
T get_le(std::istream& in) {
  std::array<unsigned char, sizeof(T)> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (!in) throw FormatError("truncated parameter file");
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(bytes[i]) << (8 * i);
  return value;
}

void put_f64(std::ostream& out, double v) { put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v)); }
double get_f64(std::istream& in) { return std::bit_cast<double>(get_le<std::uint64_t>(in)); }

std::uint32_t checked_u32(std::size_t v) {
  if (v > UINT32_MAX) throw FormatError("dimension exceeds the u32 range of the parameter format");
  return static_cast<std::uint32_t>(v);
}

}  // namespace

void write_mlp(std::ostream& out, const Mlp& mlp) {
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, kFormatVersion);
  put_le<std::uint32_t>(out, checked_u32(mlp.layers().size()));
  for (const auto& layer : mlp.layers()) {
    put_le<std::uint32_t>(out, checked_u32(layer.in_dim()));
    put_le<std::uint32_t>(out, checked_u32(layer.out_dim()));
    put_le<std::uint8_t>(out, static_cast<std::uint8_t>(layer.activation));
    put_le<std::uint32_t>(out, checked_u32(layer.blocks.size()));
    for (auto b : layer.blocks) put_le<std::uint32_t>(out, checked_u32(b));
    for (double w : layer.weights.values()) put_f64(out, w);
    for (double b : layer.bias) put_f64(out, b);
  }
  if (!out) throw FormatError("failed writing parameter stream");
}

Mlp read_mlp(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw FormatError("not a parameter file (bad magic bytes)");
  const auto version = get_le<std::uint32_t>(in);
  if (version != kFormatVersion)
    throw FormatError("unsupported parameter format version " + std::to_string(version));
  const auto n_layers = get_le<std::uint32_t>(in);
  std::vector<DenseLayer> layers;
  for (std::uint32_t l = 0; l < n_layers; ++l) {
    const auto n_in = get_le<std::uint32_t>(in);
    const auto n_out = get_le<std::uint32_t>(in);
    const auto tag = get_le<std::uint8_t>(in);
    if (tag > static_cast<std::uint8_t>(Activation::softmax_blocks))
      throw FormatError("unknown activation tag " + std::to_string(tag));
    DenseLayer layer;
    layer.activation = static_cast<Activation>(tag);
    const auto n_blocks = get_le<std::uint32_t>(in);
    if (n_blocks > n_out) throw FormatError("block count exceeds layer width");
    for (std::uint32_t b = 0; b < n_blocks; ++b) layer.blocks.push_back(get_le<std::uint32_t>(in));
    layer.weights = Matrix(n_out, n_in);
    for (double& w : layer.weights.values()) w = get_f64(in);
    layer.bias.resize(n_out);
    for (double& b : layer.bias) b = get_f64(in);
    layers.push_back(std::move(layer));
  }
  return Mlp(std::move(layers));
}

void save_mlp(const std::filesystem::path& path, const Mlp& mlp) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  write_mlp(out, mlp);
}

Mlp load_mlp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_mlp(in);
}

}  // namespace synthpop::nn
