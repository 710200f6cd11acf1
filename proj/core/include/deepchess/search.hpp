#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "deepchess/comparator.hpp"
#include "deepchess/position.hpp"

namespace deepchess {

/// A search bound is a concrete outcome rather than a score: a leaf position, a terminal result,
/// or one of the two window sentinels.
struct Bound {
  enum class Kind { MinSentinel, Loss, Draw, Pos, MaxSentinel };

  Kind kind = Kind::MinSentinel;
  Color loser = Color::White;  // Loss only
  int ply = 0;                 // Loss only: distance from the search root
  std::optional<Position> position;

  static Bound min_sentinel() { return {}; }
  static Bound max_sentinel() { return {Kind::MaxSentinel, Color::White, 0, std::nullopt}; }
  static Bound loss(Color loser, int ply) { return {Kind::Loss, loser, ply, std::nullopt}; }
  static Bound draw() { return {Kind::Draw, Color::White, 0, std::nullopt}; }
  static Bound pos(const Position& p) { return {Kind::Pos, Color::White, 0, p}; }

  bool is_sentinel() const { return kind == Kind::MinSentinel || kind == Kind::MaxSentinel; }
};

/// Window flip between plies: sentinels swap, concrete outcomes are unchanged.
Bound negate(const Bound& b);

enum class BoundOrder { Less, Equal, Greater };

/// Orders two bounds for the side `perspective`. Sentinels are extremal; a loss for `perspective` sits
/// below every position and draw (later mates preferred), a loss for the opponent above them
/// (sooner mates preferred). Positions are ordered by the White-perspective comparator, the result
/// inverted for Black. A draw is compared as the bare-kings position.
BoundOrder bound_compare(const Bound& x, const Bound& y, PositionComparator& cmp, Color perspective);

/// Reference position standing in for a draw in comparisons.
const Position& draw_reference();

struct SearchStats {
  std::uint64_t nodes = 0;
  std::uint64_t cutoffs = 0;
};

struct NodeResult {
  Bound value;
  std::optional<Move> move;
};

/// Captures first by victim value (stable), then quiet moves in generation order; `first` leads when present.
void order_moves(const Position& p, MoveList& moves, const std::optional<Move>& first = std::nullopt);

/// Fail-soft comparison alpha-beta from the side to move's perspective. `ply` is the distance from the root.
NodeResult alphabeta_cmp(const Position& p, int depth, Bound alpha, Bound beta, PositionComparator& cmp,
                         SearchStats& stats, int ply = 0);

class NoLegalMoves : public std::runtime_error {
 public:
  NoLegalMoves() : std::runtime_error("position has no legal moves") {}
};

struct SearchLimits {
  int max_depth = 4;
  std::optional<std::chrono::milliseconds> soft_time;
  std::optional<std::chrono::milliseconds> hard_time;
  std::optional<std::uint64_t> node_cap;
  const std::atomic<bool>* stop = nullptr;

  /// soft = remaining / 30, hard = 2 x soft, both kept below the remaining time.
  static SearchLimits for_clock(std::chrono::milliseconds remaining, int max_depth = 64);
};

struct SearchResult {
  Move best_move;
  std::vector<Move> line;
  Bound value;
  std::uint64_t nodes = 0;
  std::uint64_t cutoffs = 0;
  std::uint64_t cache_hits = 0;
  int depth_reached = 0;
};

using IterationCallback = std::function<void(const SearchResult&)>;

/// Iterative deepening over depths 1..max_depth. Depth 1 always completes; deeper iterations stop
/// on hard time, node cap or the stop flag, and the last completed iteration is reported.
SearchResult search_root(const Position& p, const SearchLimits& limits, PositionComparator& cmp,
                         const IterationCallback& on_iteration = {});

}  // namespace deepchess
