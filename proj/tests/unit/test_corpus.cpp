#include <gtest/gtest.h>

#include <sstream>

#include "deepchess/corpus.hpp"
#include "deepchess/pgn.hpp"

using namespace deepchess;

TEST(Corpus, RandomPlayoutsAreDeterministicAndInRange) {
  const auto a = random_playout_positions(30, 5, 10, 20);
  const auto b = random_playout_positions(30, 5, 10, 20);
  ASSERT_EQ(a.size(), 30u);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(to_fen(a[i]), to_fen(b[i]));
  const auto c = random_playout_positions(30, 6, 10, 20);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) differs |= to_fen(a[i]) != to_fen(c[i]);
  EXPECT_TRUE(differs);
}

TEST(Corpus, AuditOfTotalOrdersFindsNoCycles) {
  const auto positions = random_playout_positions(200, 9);
  RandomComparator random(3);
  const AuditReport r = consistency_audit(random, positions, 500, 1);
  EXPECT_EQ(r.triples, 500u);
  EXPECT_EQ(r.pairs, 1500u);
  EXPECT_EQ(r.cycles, 0u);
  EXPECT_GE(r.swap_consistency(), 0.99);

  // Material ties answer SecondBetter both ways, so swaps are inconsistent there.
  MaterialComparator material;
  const AuditReport m = consistency_audit(material, positions, 500, 1);
  EXPECT_EQ(m.cycles, 0u);
  EXPECT_LT(m.swap_consistency(), 1.0);
  EXPECT_THROW(consistency_audit(material, std::span(positions).first(2), 1, 1), std::invalid_argument);
}

TEST(Corpus, SelfPlayWritesParsableGames) {
  SelfPlayConfig cfg;
  cfg.games = 6;
  cfg.max_plies = 80;
  cfg.seed = 11;
  std::ostringstream out;
  const SelfPlayStats s = generate_selfplay_games(cfg, out);
  EXPECT_EQ(s.games, 6u);
  EXPECT_EQ(s.white_wins + s.black_wins + s.draws, s.games);

  std::istringstream in(out.str());
  std::vector<PgnError> errors;
  EXPECT_EQ(read_all_games(in, &errors).size(), 6u);
  EXPECT_TRUE(errors.empty());

  std::ostringstream again;
  generate_selfplay_games(cfg, again);
  EXPECT_EQ(again.str(), out.str());
}
