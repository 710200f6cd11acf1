#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "deepchess/comparator.hpp"
#include "deepchess/pgn.hpp"
#include "deepchess/search.hpp"

namespace deepchess {

enum class ComparatorKind { Learned, Material, Random };

std::string_view to_string(ComparatorKind k);
/// Throws std::invalid_argument for unknown names.
ComparatorKind parse_comparator_kind(std::string_view name);

struct EngineConfig {
  std::string name;
  ComparatorKind comparator = ComparatorKind::Material;
  std::filesystem::path model_path;  // required iff comparator is Learned
  std::size_t cache_mb = 16;
  bool deterministic = false;  // ignore wall-clock limits and search to max_depth
  std::uint64_t seed = 1;
  int max_depth = 3;

  /// Throws std::invalid_argument.
  void validate() const;
  std::string display_name() const;
};

/// An in-process engine: a comparator plus search. Learned networks are loaded once at construction.
class Engine {
 public:
  explicit Engine(EngineConfig cfg);
  Engine(EngineConfig cfg, std::shared_ptr<const nn::SiameseNetwork<float>> net);

  /// Resets per-game state; the random comparator is reseeded from cfg.seed and `game_seed`.
  void new_game(std::uint64_t game_seed);
  SearchResult think(const Position& p, SearchLimits limits);

  const EngineConfig& config() const { return cfg_; }
  PositionComparator& comparator() { return *cmp_; }
  FeatureCache* cache() const { return cache_.get(); }

 private:
  EngineConfig cfg_;
  std::shared_ptr<const nn::SiameseNetwork<float>> net_;
  std::shared_ptr<FeatureCache> cache_;
  std::unique_ptr<PositionComparator> cmp_;
};

class EngineFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Opening {
  Position start = Position::startpos();
  std::vector<Move> moves;

  Position final_position() const;
};

/// One FEN per line, or PGN games whose moves become the opening line.
std::vector<Opening> load_openings(const std::filesystem::path& path);

enum class GameEnd {
  None,
  Checkmate,
  Stalemate,
  ThreefoldRepetition,
  FiftyMoveRule,
  InsufficientMaterial,
  PlyLimit,
  TimeForfeit,
};

std::string_view describe(GameEnd e);

bool insufficient_material(const Position& p);

/// Tracks positions for repetition detection; en passant rights distinguish otherwise equal positions.
class GameHistory {
 public:
  explicit GameHistory(const Position& start) { push(start); }
  void push(const Position& p);
  int occurrences(const Position& p) const;
  std::size_t plies() const { return keys_.size() - 1; }

 private:
  static std::uint64_t repetition_key(const Position& p);
  std::vector<std::uint64_t> keys_;
};

/// Terminal and draw rules applied after every move; ply_limit 0 disables the cap.
GameEnd adjudicate(const Position& p, const GameHistory& history, std::size_t ply_limit);

/// Winner implied by an adjudication, from the side to move in the final position.
GameOutcome outcome_of(GameEnd end, const Position& final_position);

struct MatchSpec {
  std::array<EngineConfig, 2> engines;
  std::size_t games = 2;
  /// Per-engine clock for the whole game; engines without a clock search to their depth.
  std::array<std::optional<std::chrono::milliseconds>, 2> time_per_game;
  std::vector<Opening> openings;
  bool alternate_colors = true;
  std::size_t max_plies = 400;
  std::uint64_t seed = 1;

  void validate() const;
};

struct GameRecord {
  PgnGame pgn;
  GameEnd end = GameEnd::None;
  bool first_engine_white = true;
};

struct MatchReport {
  std::size_t wins = 0;  // for the first engine
  std::size_t losses = 0;
  std::size_t draws = 0;
  double points_fraction = 0;
  std::optional<double> elo_diff;  // absent for a shutout
  std::vector<GameRecord> games;
  std::optional<std::string> failure;

  std::size_t played() const { return wins + losses + draws; }
  std::string pgn_text() const;
};

using GameCallback = std::function<void(const GameRecord&, const MatchReport&)>;

/// Plays the match sequentially. Games 2k and 2k+1 share opening and seed with colors reversed.
/// An engine error ends the match early with `failure` set.
MatchReport run_match(const MatchSpec& spec, const GameCallback& on_game = {});

/// Recomputes a report's score from PGN text alone; `first_engine` names the first engine.
MatchReport score_from_pgn(std::string_view pgn_text, const std::string& first_engine);

class UndefinedForShutout : public std::domain_error {
 public:
  UndefinedForShutout() : std::domain_error("rating difference undefined for a score of 0 or 1") {}
};

/// -400 log10(1/s - 1) for 0 < s < 1.
double elo_from_fraction(double s);

/// Same rating difference from raw counts: 400 (log10(w + d/2) - log10(l + d/2)). Swapping wins and
/// losses negates the result exactly.
double elo_from_counts(std::size_t wins, std::size_t losses, std::size_t draws);

}  // namespace deepchess
