#include "deepchess/search.hpp"

#include <algorithm>
#include <array>

namespace deepchess {

namespace {

using Clock = std::chrono::steady_clock;

BoundOrder flip(BoundOrder o) {
  switch (o) {
    case BoundOrder::Less: return BoundOrder::Greater;
    case BoundOrder::Greater: return BoundOrder::Less;
    case BoundOrder::Equal: return BoundOrder::Equal;
  }
  return o;
}

BoundOrder order_ints(int a, int b) {
  if (a < b) return BoundOrder::Less;
  if (a > b) return BoundOrder::Greater;
  return BoundOrder::Equal;
}

// 0: White is mated, 1: ordinary position or draw, 2: Black is mated.
int outcome_class(const Bound& b) {
  if (b.kind != Bound::Kind::Loss) return 1;
  return b.loser == Color::White ? 0 : 2;
}

BoundOrder white_order(const Bound& x, const Bound& y, PositionComparator& cmp) {
  const int cx = outcome_class(x);
  const int cy = outcome_class(y);
  if (cx != cy) return order_ints(cx, cy);
  if (cx == 0) return order_ints(x.ply, y.ply);
  if (cx == 2) return order_ints(y.ply, x.ply);
  if (x.kind == Bound::Kind::Draw && y.kind == Bound::Kind::Draw) return BoundOrder::Equal;
  const Position& a = x.kind == Bound::Kind::Pos ? *x.position : draw_reference();
  const Position& b = y.kind == Bound::Kind::Pos ? *y.position : draw_reference();
  return cmp.compare(a, b) == Ordering::FirstBetter ? BoundOrder::Greater : BoundOrder::Less;
}

constexpr std::array<int, kPieceTypeCount> kVictimValue{1, 3, 3, 5, 9, 100};

int victim_value(const Position& p, const Move& m) {
  if (m.is_en_passant()) return kVictimValue[0];
  const auto piece = p.piece_at(m.to);
  return piece ? kVictimValue[index_of(piece->type)] : 0;
}

class Searcher {
 public:
  Searcher(PositionComparator& cmp, SearchStats& stats) : cmp_(cmp), stats_(stats), pv_(kMaxPly + 1) {}

  void set_limits(std::optional<Clock::time_point> deadline, std::optional<std::uint64_t> node_cap,
                  const std::atomic<bool>* stop) {
    deadline_ = deadline;
    node_cap_ = node_cap;
    stop_ = stop;
  }
  void set_abortable(bool on) { abortable_ = on; }
  bool aborted() const { return aborted_; }
  const std::vector<Move>& line() const { return pv_[0]; }

  NodeResult search(const Position& p, int depth, Bound alpha, Bound beta, int ply,
                    const std::optional<Move>& first = std::nullopt) {
    ++stats_.nodes;
    pv_[ply].clear();
    if (abortable_ && should_abort()) {
      aborted_ = true;
      return {Bound::draw(), std::nullopt};
    }
    if (depth <= 0 || ply >= kMaxPly) return {Bound::pos(p), std::nullopt};

    MoveList moves = legal_moves(p);
    if (moves.empty()) {
      if (p.in_check()) return {Bound::loss(p.side_to_move(), ply), std::nullopt};
      return {Bound::draw(), std::nullopt};
    }
    order_moves(p, moves, first);

    const Color us = p.side_to_move();
    NodeResult best{Bound::min_sentinel(), std::nullopt};
    for (const Move& m : moves) {
      const Position child = p.play_unchecked(m);
      NodeResult r = search(child, depth - 1, negate(beta), negate(alpha), ply + 1);
      if (aborted_) return best;
      if (!best.move || bound_compare(r.value, best.value, cmp_, us) == BoundOrder::Greater) {
        best.value = std::move(r.value);
        best.move = m;
        auto& line = pv_[ply];
        line.assign(1, m);
        line.insert(line.end(), pv_[ply + 1].begin(), pv_[ply + 1].end());
        if (bound_compare(best.value, beta, cmp_, us) != BoundOrder::Less) {
          ++stats_.cutoffs;
          break;
        }
        if (bound_compare(best.value, alpha, cmp_, us) == BoundOrder::Greater) alpha = best.value;
      }
    }
    return best;
  }

 private:
  static constexpr int kMaxPly = 128;

  bool should_abort() const {
    if (stop_ && stop_->load(std::memory_order_relaxed)) return true;
    if (node_cap_ && stats_.nodes > *node_cap_) return true;
    if (deadline_ && (stats_.nodes & 31) == 0 && Clock::now() >= *deadline_) return true;
    return false;
  }

  PositionComparator& cmp_;
  SearchStats& stats_;
  std::vector<std::vector<Move>> pv_;
  std::optional<Clock::time_point> deadline_;
  std::optional<std::uint64_t> node_cap_;
  const std::atomic<bool>* stop_ = nullptr;
  bool abortable_ = false;
  bool aborted_ = false;
};

}  // namespace

Bound negate(const Bound& b) {
  if (b.kind == Bound::Kind::MinSentinel) return Bound::max_sentinel();
  if (b.kind == Bound::Kind::MaxSentinel) return Bound::min_sentinel();
  return b;
}

const Position& draw_reference() {
  static const Position kBareKings = parse_fen("4k3/8/8/8/8/8/8/4K3 w - - 0 1");
  return kBareKings;
}

BoundOrder bound_compare(const Bound& x, const Bound& y, PositionComparator& cmp, Color perspective) {
  if (x.is_sentinel() && x.kind == y.kind) return BoundOrder::Equal;
  if (x.kind == Bound::Kind::MinSentinel || y.kind == Bound::Kind::MaxSentinel) return BoundOrder::Less;
  if (x.kind == Bound::Kind::MaxSentinel || y.kind == Bound::Kind::MinSentinel) return BoundOrder::Greater;
  const BoundOrder white = white_order(x, y, cmp);
  return perspective == Color::White ? white : flip(white);
}

void order_moves(const Position& p, MoveList& moves, const std::optional<Move>& first) {
  std::stable_sort(moves.begin(), moves.end(), [&](const Move& a, const Move& b) {
    if (first) {
      const bool fa = a == *first;
      const bool fb = b == *first;
      if (fa != fb) return fa;
    }
    return victim_value(p, a) > victim_value(p, b);
  });
}

NodeResult alphabeta_cmp(const Position& p, int depth, Bound alpha, Bound beta, PositionComparator& cmp,
                         SearchStats& stats, int ply) {
  Searcher s(cmp, stats);
  return s.search(p, depth, std::move(alpha), std::move(beta), ply);
}

SearchLimits SearchLimits::for_clock(std::chrono::milliseconds remaining, int max_depth) {
  using std::chrono::milliseconds;
  SearchLimits limits;
  limits.max_depth = max_depth;
  const auto ceiling = std::max(milliseconds(1), remaining - milliseconds(20));
  limits.soft_time = std::clamp(remaining / 30, milliseconds(1), ceiling);
  limits.hard_time = std::clamp(*limits.soft_time * 2, milliseconds(1), ceiling);
  return limits;
}

SearchResult search_root(const Position& p, const SearchLimits& limits, PositionComparator& cmp,
                         const IterationCallback& on_iteration) {
  if (legal_moves(p).empty()) throw NoLegalMoves();
  const auto start = Clock::now();
  const std::uint64_t hits_before = cmp.cache_hits();

  SearchStats stats;
  Searcher searcher(cmp, stats);
  std::optional<Clock::time_point> deadline;
  if (limits.hard_time) deadline = start + *limits.hard_time;
  searcher.set_limits(deadline, limits.node_cap, limits.stop);

  SearchResult result;
  std::optional<Move> previous;
  const int max_depth = std::max(1, limits.max_depth);
  for (int depth = 1; depth <= max_depth; ++depth) {
    if (depth > 1) {
      if (limits.soft_time && Clock::now() - start >= *limits.soft_time) break;
      if (limits.stop && limits.stop->load()) break;
    }
    searcher.set_abortable(depth > 1);
    NodeResult r = searcher.search(p, depth, Bound::min_sentinel(), Bound::max_sentinel(), 0, previous);
    if (searcher.aborted()) break;
    result.best_move = *r.move;
    result.line = searcher.line();
    result.value = std::move(r.value);
    result.depth_reached = depth;
    previous = result.best_move;
    result.nodes = stats.nodes;
    result.cutoffs = stats.cutoffs;
    result.cache_hits = cmp.cache_hits() - hits_before;
    if (on_iteration) on_iteration(result);
  }
  result.nodes = stats.nodes;
  result.cutoffs = stats.cutoffs;
  result.cache_hits = cmp.cache_hits() - hits_before;
  return result;
}

}  // namespace deepchess
