#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "deepchess/network.hpp"

namespace deepchess::nn {

// Model file layout (little-endian):
//   "DCHS" | version u16 | flags u16 | layer count u16
//   per layer: in_dim u32 | out_dim u32 | activation u8 | weights (row-major f32) | biases (f32)
// Layers are the extractor followed by the head. The head starts at the first layer whose input
// is twice the previous layer's output; flag bit 0 marks an extractor-only file.

inline constexpr std::uint16_t kModelVersion = 1;
inline constexpr std::uint16_t kExtractorOnlyFlag = 1;

class ModelFormatError : public std::runtime_error {
 public:
  enum class Kind { BadMagic, VersionMismatch, DimensionMismatch, Io };

  ModelFormatError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

void write_model(std::ostream& out, const SiameseNetwork<float>& net);
SiameseNetwork<float> read_model(std::istream& in);

void save_model(const SiameseNetwork<float>& net, const std::filesystem::path& path);
SiameseNetwork<float> load_model(const std::filesystem::path& path);

void save_extractor(const FeatureExtractor<float>& fe, const std::filesystem::path& path);
FeatureExtractor<float> load_extractor(const std::filesystem::path& path);

}  // namespace deepchess::nn
