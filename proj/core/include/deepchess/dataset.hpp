#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "deepchess/encoding.hpp"
#include "deepchess/pgn.hpp"

namespace deepchess {

using Rng = std::mt19937_64;

/// W = sampled from a game White won, L = from a game White lost.
enum class Label : std::uint8_t { L = 0, W = 1 };

struct LabeledPosition {
  BitVector773 vector;
  Label label = Label::W;
  std::uint32_t game_id = 0;
  std::uint16_t ply = 0;
};

/// How the opening is excluded from sampling.
enum class OpeningExclusion {
  FullMoves,  ///< position's fullmove number must exceed `opening_moves`
  Plies,      ///< position's ply index (0-based, from the game start) must be >= `opening_moves`
};

struct ExtractConfig {
  std::size_t per_game = 10;
  int opening_moves = 5;
  OpeningExclusion exclusion = OpeningExclusion::FullMoves;
};

/// Plies of `game` whose position may be sampled: past the opening and the move played there is
/// not a capture (en passant included).
std::vector<std::uint16_t> eligible_plies(const PgnGame& game, const ExtractConfig& cfg);

/// Samples up to cfg.per_game eligible positions without replacement.
/// Requires a decisive outcome; throws std::invalid_argument otherwise.
std::vector<LabeledPosition> extract_positions(const PgnGame& game, Rng& rng, const ExtractConfig& cfg = {});

struct ExtractStats {
  std::size_t games = 0;
  std::size_t white_wins = 0;
  std::size_t black_wins = 0;
  std::size_t draws_discarded = 0;
  std::size_t unknown_discarded = 0;
  std::size_t malformed = 0;
  std::size_t positions = 0;
};

/// Streams a PGN corpus through extract_positions, discarding draws and unfinished games.
std::vector<LabeledPosition> extract_corpus(std::istream& pgn, std::uint64_t seed, const ExtractConfig& cfg,
                                            ExtractStats* stats = nullptr);

class InsufficientData : public std::runtime_error {
 public:
  InsufficientData(std::size_t w, std::size_t l, std::size_t needed)
      : std::runtime_error("insufficient data: " + std::to_string(w) + " W / " + std::to_string(l) +
                           " L positions, need more than " + std::to_string(needed) + " per class"),
        w_count(w),
        l_count(l) {}
  std::size_t w_count;
  std::size_t l_count;
};

struct SplitDataset {
  std::vector<LabeledPosition> train_w, train_l, val_w, val_l;
  std::uint64_t seed = 0;
};

/// Holds out `val_per_class` positions of each label, drawn uniformly under `seed`.
SplitDataset split(std::vector<LabeledPosition> positions, std::size_t val_per_class, std::uint64_t seed);

struct PairSample {
  BitVector773 first;
  BitVector773 second;
  /// True when `first` is the W position, i.e. target (1, 0).
  bool first_is_win = true;

  std::array<float, 2> target() const { return first_is_win ? std::array{1.0F, 0.0F} : std::array{0.0F, 1.0F}; }
};

/// Endless stream of randomly ordered (W, L) pairs drawn with replacement.
class PairSampler {
 public:
  PairSampler(const std::vector<LabeledPosition>& w, const std::vector<LabeledPosition>& l, Rng& rng);

  PairSample next();

 private:
  const std::vector<LabeledPosition>& w_;
  const std::vector<LabeledPosition>& l_;
  Rng& rng_;
};

std::vector<PairSample> sample_pairs(const SplitDataset& ds, std::size_t n, Rng& rng);

/// Fixed validation pairs from the held-out sets.
std::vector<PairSample> validation_pairs(const SplitDataset& ds, std::size_t n, std::uint64_t seed);

class DatasetFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// "DCDS" file: magic, u16 version, then fixed 104-byte little-endian records until EOF.
inline constexpr std::uint16_t kDatasetVersion = 1;
inline constexpr std::size_t kDatasetRecordBytes = BitVector773::kPackedBytes + 1 + 4 + 2;

void write_dataset(const std::filesystem::path& path, const std::vector<LabeledPosition>& positions);
std::vector<LabeledPosition> read_dataset(const std::filesystem::path& path);

}  // namespace deepchess
