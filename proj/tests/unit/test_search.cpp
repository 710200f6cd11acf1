#include <gtest/gtest.h>

#include <chrono>
#include <thread>

#include "deepchess/corpus.hpp"
#include "deepchess/search.hpp"
#include "scalar_search.hpp"

using namespace deepchess;

namespace {

int scalar_of(const Bound& b) {
  switch (b.kind) {
    case Bound::Kind::Pos: return oracle::material(oracle::from_fen(to_fen(*b.position)));
    case Bound::Kind::Draw: return 0;
    case Bound::Kind::Loss: return b.loser == Color::White ? -(oracle::kMate - b.ply) : oracle::kMate - b.ply;
    default: ADD_FAILURE() << "sentinel escaped the search"; return 0;
  }
}

// Counts every comparison so tests can check the search is not comparing more than it must.
class CountingComparator final : public PositionComparator {
 public:
  Ordering compare(const Position& a, const Position& b) override {
    ++calls;
    return inner.compare(a, b);
  }
  std::string_view name() const override { return "counting"; }
  MaterialComparator inner;
  std::uint64_t calls = 0;
};

}  // namespace

TEST(BoundOrder, SentinelsAndOutcomes) {
  MaterialComparator cmp;
  const Bound pos = Bound::pos(Position::startpos());
  for (Color c : {Color::White, Color::Black}) {
    EXPECT_EQ(bound_compare(Bound::min_sentinel(), pos, cmp, c), BoundOrder::Less);
    EXPECT_EQ(bound_compare(Bound::max_sentinel(), pos, cmp, c), BoundOrder::Greater);
    EXPECT_EQ(bound_compare(Bound::max_sentinel(), Bound::max_sentinel(), cmp, c), BoundOrder::Equal);
    EXPECT_EQ(bound_compare(Bound::draw(), Bound::draw(), cmp, c), BoundOrder::Equal);
  }
  // White getting mated is the worst outcome for White, and a later mate beats a sooner one.
  EXPECT_EQ(bound_compare(Bound::loss(Color::White, 3), pos, cmp, Color::White), BoundOrder::Less);
  EXPECT_EQ(bound_compare(Bound::loss(Color::White, 5), Bound::loss(Color::White, 3), cmp, Color::White),
            BoundOrder::Greater);
  EXPECT_EQ(bound_compare(Bound::loss(Color::Black, 1), Bound::loss(Color::Black, 3), cmp, Color::White),
            BoundOrder::Greater);
  EXPECT_EQ(bound_compare(Bound::loss(Color::Black, 1), Bound::loss(Color::Black, 3), cmp, Color::Black),
            BoundOrder::Less);
  EXPECT_EQ(bound_compare(Bound::loss(Color::Black, 9), pos, cmp, Color::Black), BoundOrder::Less);

  const Bound up = Bound::pos(parse_fen("4k3/8/8/8/8/8/8/3QK3 w - - 0 1"));
  EXPECT_EQ(bound_compare(up, Bound::draw(), cmp, Color::White), BoundOrder::Greater);
  EXPECT_EQ(bound_compare(up, Bound::draw(), cmp, Color::Black), BoundOrder::Less);
}

TEST(BoundOrder, NegateSwapsOnlySentinels) {
  EXPECT_EQ(negate(Bound::min_sentinel()).kind, Bound::Kind::MaxSentinel);
  EXPECT_EQ(negate(Bound::max_sentinel()).kind, Bound::Kind::MinSentinel);
  const Bound loss = negate(Bound::loss(Color::Black, 4));
  EXPECT_EQ(loss.kind, Bound::Kind::Loss);
  EXPECT_EQ(loss.loser, Color::Black);
  EXPECT_EQ(loss.ply, 4);
  EXPECT_EQ(negate(Bound::draw()).kind, Bound::Kind::Draw);
}

TEST(MoveOrdering, CapturesByVictimThenQuietInGenerationOrder) {
  const Position p = parse_fen("4k3/8/8/3q1r2/4P3/8/8/4K3 w - - 0 1");
  MoveList moves = legal_moves(p);
  const MoveList original = moves;
  order_moves(p, moves);
  EXPECT_EQ(to_uci(moves[0]), "e4d5");
  EXPECT_EQ(to_uci(moves[1]), "e4f5");
  std::vector<std::string> quiet_before, quiet_after;
  for (const Move& m : original)
    if (!m.is_capture()) quiet_before.push_back(to_uci(m));
  for (int i = 2; i < moves.size(); ++i) quiet_after.push_back(to_uci(moves[i]));
  EXPECT_EQ(quiet_before, quiet_after);

  const Move pv = *parse_uci_move(p, "e1e2");
  order_moves(p, moves, pv);
  EXPECT_EQ(moves[0], pv);
  EXPECT_EQ(to_uci(moves[1]), "e4d5");
}

TEST(AlphaBeta, AgreesWithScalarOracleAndPrunes) {
  const auto positions = random_playout_positions(40, 21, 6, 60);
  for (const Position& p : positions) {
    if (legal_moves(p).empty()) continue;
    const auto board = oracle::from_fen(to_fen(p));
    for (int depth : {1, 2, 3}) {
      MaterialComparator cmp;
      SearchStats stats;
      const NodeResult r = alphabeta_cmp(p, depth, Bound::min_sentinel(), Bound::max_sentinel(), cmp, stats);
      ASSERT_EQ(scalar_of(r.value), oracle::white_value(board, depth)) << to_fen(p) << " depth " << depth;
      ASSERT_LE(stats.nodes, oracle::minimax_nodes(board, depth));
    }
  }
}

TEST(AlphaBeta, TerminalNodesAndLeafRule) {
  MaterialComparator cmp;
  SearchStats stats;
  const Position mated = parse_fen("R5k1/5ppp/8/8/8/8/8/4K3 b - - 0 1");
  const NodeResult r = alphabeta_cmp(mated, 2, Bound::min_sentinel(), Bound::max_sentinel(), cmp, stats, 3);
  EXPECT_EQ(r.value.kind, Bound::Kind::Loss);
  EXPECT_EQ(r.value.loser, Color::Black);
  EXPECT_EQ(r.value.ply, 3);
  EXPECT_FALSE(r.move.has_value());

  // Depth zero evaluates the position as it stands, mated or not.
  const NodeResult leaf = alphabeta_cmp(mated, 0, Bound::min_sentinel(), Bound::max_sentinel(), cmp, stats);
  EXPECT_EQ(leaf.value.kind, Bound::Kind::Pos);

  const Position stalemate = parse_fen("7k/5Q2/6K1/8/8/8/8/8 b - - 0 1");
  EXPECT_EQ(alphabeta_cmp(stalemate, 1, Bound::min_sentinel(), Bound::max_sentinel(), cmp, stats).value.kind,
            Bound::Kind::Draw);
}

TEST(SearchRoot, FindsMateInOne) {
  MaterialComparator cmp;
  SearchLimits limits;
  limits.max_depth = 2;
  const SearchResult r = search_root(parse_fen("6k1/5ppp/8/8/8/8/8/R3K3 w - - 0 1"), limits, cmp);
  EXPECT_EQ(to_uci(r.best_move), "a1a8");
  EXPECT_EQ(r.value.kind, Bound::Kind::Loss);
  EXPECT_EQ(r.value.loser, Color::Black);
  EXPECT_EQ(r.value.ply, 1);
}

TEST(SearchRoot, DepthOneTakesTheBiggestPiece) {
  MaterialComparator cmp;
  SearchLimits limits;
  limits.max_depth = 1;
  const SearchResult r = search_root(parse_fen("4k3/8/8/3q1r2/4P3/8/8/4K3 w - - 0 1"), limits, cmp);
  EXPECT_EQ(to_uci(r.best_move), "e4d5");
  EXPECT_EQ(r.depth_reached, 1);
  EXPECT_EQ(r.line.size(), 1u);
}

TEST(SearchRoot, DeterministicAndLineIsLegal) {
  const Position p = random_playout_positions(1, 30, 20, 20)[0];
  SearchLimits limits;
  limits.max_depth = 4;
  MaterialComparator c1, c2;
  const SearchResult a = search_root(p, limits, c1);
  const SearchResult b = search_root(p, limits, c2);
  EXPECT_EQ(a.best_move, b.best_move);
  EXPECT_EQ(a.nodes, b.nodes);
  EXPECT_EQ(a.line, b.line);
  ASSERT_FALSE(a.line.empty());
  EXPECT_EQ(a.line.front(), a.best_move);
  Position q = p;
  for (const Move& m : a.line) q = apply_move(q, m);
}

TEST(SearchRoot, HardTimeIsRespected) {
  MaterialComparator cmp;
  SearchLimits limits;
  limits.max_depth = 64;
  limits.hard_time = std::chrono::milliseconds(10);
  const auto start = std::chrono::steady_clock::now();
  const SearchResult r = search_root(Position::startpos(), limits, cmp);
  const auto elapsed = std::chrono::steady_clock::now() - start;
  EXPECT_GE(r.depth_reached, 1);
  EXPECT_LT(elapsed, std::chrono::milliseconds(60));
}

TEST(SearchRoot, NodeCapAndStopFlag) {
  MaterialComparator cmp;
  SearchLimits limits;
  limits.max_depth = 64;
  limits.node_cap = 5000;
  const SearchResult capped = search_root(Position::startpos(), limits, cmp);
  EXPECT_GE(capped.depth_reached, 1);
  EXPECT_LT(capped.depth_reached, 64);

  std::atomic<bool> stop{false};
  SearchLimits open;
  open.max_depth = 64;
  open.stop = &stop;
  std::thread stopper([&] {
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    stop = true;
  });
  const SearchResult stopped = search_root(Position::startpos(), open, cmp);
  stopper.join();
  EXPECT_GE(stopped.depth_reached, 1);
  EXPECT_THROW(search_root(parse_fen("R5k1/5ppp/8/8/8/8/8/4K3 b - - 0 1"), open, cmp), NoLegalMoves);
}

TEST(SearchRoot, ClockBudget) {
  const auto l = SearchLimits::for_clock(std::chrono::milliseconds(3000));
  EXPECT_EQ(*l.soft_time, std::chrono::milliseconds(100));
  EXPECT_EQ(*l.hard_time, std::chrono::milliseconds(200));
  const auto tight = SearchLimits::for_clock(std::chrono::milliseconds(30));
  EXPECT_LE(*tight.hard_time, std::chrono::milliseconds(10));
}

TEST(SearchRoot, CountsComparisons) {
  CountingComparator cmp;
  SearchLimits limits;
  limits.max_depth = 3;
  const SearchResult r = search_root(Position::startpos(), limits, cmp);
  EXPECT_GT(cmp.calls, 0u);
  EXPECT_GT(r.nodes, 400u);
  EXPECT_GT(r.cutoffs, 0u);
}
