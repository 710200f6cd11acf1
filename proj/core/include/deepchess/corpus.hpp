#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "deepchess/comparator.hpp"
#include "deepchess/position.hpp"

namespace deepchess {

/// Positions reached by uniformly random legal play from the start position, each taken at a
/// random ply in [min_ply, max_ply].
std::vector<Position> random_playout_positions(std::size_t count, std::uint64_t seed, int min_ply = 8,
                                               int max_ply = 80);

struct SelfPlayConfig {
  /// Upper bound on games played.
  std::size_t games = 100;
  /// Stop once this many decisive games exist (0: play all `games`).
  std::size_t decisive_target = 0;
  std::uint64_t seed = 1;
  int depth = 1;
  /// Chance of a uniformly random move instead of the searched one.
  double random_move_rate = 0.1;
  /// Uniformly random plies played before the engines take over.
  int opening_random_plies = 4;
  std::size_t max_plies = 300;
  /// At the ply cap, a material lead of at least this much is scored as a win; otherwise a draw.
  int adjudication_margin = 3;
};

struct SelfPlayStats {
  std::size_t games = 0;
  std::size_t white_wins = 0;
  std::size_t black_wins = 0;
  std::size_t draws = 0;
  std::size_t checkmates = 0;
};

/// Plays noisy material-search games against itself and writes them as PGN. The search breaks
/// material ties with a per-game hash so games differ; results at the ply cap are adjudicated by material.
SelfPlayStats generate_selfplay_games(const SelfPlayConfig& cfg, std::ostream& pgn);

struct AuditReport {
  std::size_t triples = 0;
  std::size_t cycles = 0;
  std::size_t pairs = 0;
  /// Pairs whose ordering does not flip when the arguments are swapped.
  std::size_t asymmetric_pairs = 0;

  double cycle_rate() const { return triples ? static_cast<double>(cycles) / static_cast<double>(triples) : 0.0; }
  double swap_consistency() const {
    return pairs ? 1.0 - static_cast<double>(asymmetric_pairs) / static_cast<double>(pairs) : 1.0;
  }
};

/// Samples position triples and pairs to measure how far a comparator is from a total order.
AuditReport consistency_audit(PositionComparator& cmp, std::span<const Position> positions, std::size_t triples,
                              std::uint64_t seed);

}  // namespace deepchess
