#include "deepchess/model_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <vector>

namespace deepchess::nn {

namespace {

using Kind = ModelFormatError::Kind;

// Guards against absurd allocations from corrupt headers.
constexpr std::uint32_t kMaxDim = 1U << 16;

template <typename T>
void put(std::ostream& out, T v) {
  std::array<char, sizeof(T)> b{};
  for (std::size_t i = 0; i < sizeof(T); ++i) b[i] = static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xFF);
  out.write(b.data(), b.size());
}

void put_f32(std::ostream& out, float f) { put<std::uint32_t>(out, std::bit_cast<std::uint32_t>(f)); }

template <typename T>
T get(std::istream& in, const char* what) {
  std::array<unsigned char, sizeof(T)> b{};
  in.read(reinterpret_cast<char*>(b.data()), b.size());
  if (in.gcount() != static_cast<std::streamsize>(b.size()))
    throw ModelFormatError(Kind::DimensionMismatch, std::string("truncated model file while reading ") + what);
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return static_cast<T>(v);
}

void write_layers(std::ostream& out, const std::vector<const DenseLayer<float>*>& layers, std::uint16_t flags) {
  out.write("DCHS", 4);
  put<std::uint16_t>(out, kModelVersion);
  put<std::uint16_t>(out, flags);
  put<std::uint16_t>(out, static_cast<std::uint16_t>(layers.size()));
  for (const auto* l : layers) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(l->in_dim()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(l->out_dim()));
    put<std::uint8_t>(out, static_cast<std::uint8_t>(l->activation));
    for (int r = 0; r < l->out_dim(); ++r)
      for (int c = 0; c < l->in_dim(); ++c) put_f32(out, l->weights(r, c));
    for (int r = 0; r < l->out_dim(); ++r) put_f32(out, l->bias(r));
  }
  if (!out) throw ModelFormatError(Kind::Io, "model write failed");
}

struct RawModel {
  std::uint16_t flags = 0;
  std::vector<DenseLayer<float>> layers;
};

RawModel read_layers(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), 4);
  if (in.gcount() != 4 || std::memcmp(magic.data(), "DCHS", 4) != 0)
    throw ModelFormatError(Kind::BadMagic, "not a model file (bad magic)");
  const auto version = get<std::uint16_t>(in, "version");
  if (version != kModelVersion)
    throw ModelFormatError(Kind::VersionMismatch, "unsupported model version " + std::to_string(version));
  RawModel raw;
  raw.flags = get<std::uint16_t>(in, "flags");
  const auto count = get<std::uint16_t>(in, "layer count");
  if (count == 0) throw ModelFormatError(Kind::DimensionMismatch, "model has no layers");
  for (std::uint16_t k = 0; k < count; ++k) {
    const auto in_dim = get<std::uint32_t>(in, "in_dim");
    const auto out_dim = get<std::uint32_t>(in, "out_dim");
    const auto act = get<std::uint8_t>(in, "activation");
    if (in_dim == 0 || out_dim == 0 || in_dim > kMaxDim || out_dim > kMaxDim)
      throw ModelFormatError(Kind::DimensionMismatch, "implausible layer dimensions");
    if (act > static_cast<std::uint8_t>(Activation::Softmax2))
      throw ModelFormatError(Kind::DimensionMismatch, "unknown activation code");
    if (!raw.layers.empty() && raw.layers.back().out_dim() != static_cast<int>(in_dim) &&
        2 * raw.layers.back().out_dim() != static_cast<int>(in_dim))
      throw ModelFormatError(Kind::DimensionMismatch, "layer dimensions do not chain");
    DenseLayer<float> l{Matrix<float>(out_dim, in_dim), Vector<float>(out_dim), static_cast<Activation>(act)};
    for (std::uint32_t r = 0; r < out_dim; ++r)
      for (std::uint32_t c = 0; c < in_dim; ++c) l.weights(r, c) = std::bit_cast<float>(get<std::uint32_t>(in, "weights"));
    for (std::uint32_t r = 0; r < out_dim; ++r) l.bias(r) = std::bit_cast<float>(get<std::uint32_t>(in, "biases"));
    raw.layers.push_back(std::move(l));
  }
  return raw;
}

void validate_or_throw(const auto& model) {
  try {
    model.validate();
  } catch (const NetworkShapeError& e) {
    throw ModelFormatError(Kind::DimensionMismatch, e.what());
  }
}

}  // namespace

void write_model(std::ostream& out, const SiameseNetwork<float>& net) {
  net.validate();
  std::vector<const DenseLayer<float>*> layers;
  for (const auto& l : net.extractor.layers) layers.push_back(&l);
  for (const auto& l : net.head) layers.push_back(&l);
  write_layers(out, layers, 0);
}

SiameseNetwork<float> read_model(std::istream& in) {
  RawModel raw = read_layers(in);
  if (raw.flags & kExtractorOnlyFlag) throw ModelFormatError(Kind::DimensionMismatch, "file holds only a feature extractor");
  SiameseNetwork<float> net;
  for (auto& l : raw.layers) {
    const bool in_head = !net.head.empty() ||
                         (!net.extractor.layers.empty() && l.in_dim() == 2 * net.extractor.layers.back().out_dim());
    (in_head ? net.head : net.extractor.layers).push_back(std::move(l));
  }
  validate_or_throw(net);
  return net;
}

void save_model(const SiameseNetwork<float>& net, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ModelFormatError(Kind::Io, "cannot open " + path.string() + " for writing");
  write_model(out, net);
}

SiameseNetwork<float> load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelFormatError(Kind::Io, "cannot open " + path.string());
  return read_model(in);
}

void save_extractor(const FeatureExtractor<float>& fe, const std::filesystem::path& path) {
  fe.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ModelFormatError(Kind::Io, "cannot open " + path.string() + " for writing");
  std::vector<const DenseLayer<float>*> layers;
  for (const auto& l : fe.layers) layers.push_back(&l);
  write_layers(out, layers, kExtractorOnlyFlag);
}

FeatureExtractor<float> load_extractor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelFormatError(Kind::Io, "cannot open " + path.string());
  RawModel raw = read_layers(in);
  FeatureExtractor<float> fe;
  for (auto& l : raw.layers) {
    if (!fe.layers.empty() && l.in_dim() == 2 * fe.layers.back().out_dim()) break;
    fe.layers.push_back(std::move(l));
  }
  validate_or_throw(fe);
  return fe;
}

}  // namespace deepchess::nn
