#include "deepchess/corpus.hpp"

#include <random>
#include <stdexcept>

#include "deepchess/match.hpp"
#include "deepchess/pgn.hpp"
#include "deepchess/search.hpp"

namespace deepchess {

namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Material first, then a seeded hash: a total order that varies from game to game.
class NoisyMaterialComparator final : public PositionComparator {
 public:
  explicit NoisyMaterialComparator(std::uint64_t seed) : seed_(seed) {}

  Ordering compare(const Position& a, const Position& b) override {
    const int ma = material_balance(a);
    const int mb = material_balance(b);
    if (ma != mb) return ma > mb ? Ordering::FirstBetter : Ordering::SecondBetter;
    return mix(a.key() ^ seed_) > mix(b.key() ^ seed_) ? Ordering::FirstBetter : Ordering::SecondBetter;
  }
  std::string_view name() const override { return "noisy-material"; }

 private:
  std::uint64_t seed_;
};

Move random_move(const MoveList& moves, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(0, moves.size() - 1);
  return moves[pick(rng)];
}

}  // namespace

std::vector<Position> random_playout_positions(std::size_t count, std::uint64_t seed, int min_ply, int max_ply) {
  if (min_ply < 0 || max_ply < min_ply) throw std::invalid_argument("bad ply range");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> target_ply(min_ply, max_ply);
  std::vector<Position> out;
  out.reserve(count);
  while (out.size() < count) {
    const int target = target_ply(rng);
    Position p = Position::startpos();
    bool reached = true;
    for (int ply = 0; ply < target; ++ply) {
      const MoveList moves = legal_moves(p);
      if (moves.empty()) {
        reached = false;
        break;
      }
      p = p.play_unchecked(random_move(moves, rng));
    }
    if (reached) out.push_back(p);
  }
  return out;
}

SelfPlayStats generate_selfplay_games(const SelfPlayConfig& cfg, std::ostream& pgn) {
  SelfPlayStats stats;
  std::bernoulli_distribution explore(cfg.random_move_rate);
  for (std::size_t g = 0; g < cfg.games; ++g) {
    if (cfg.decisive_target > 0 && stats.white_wins + stats.black_wins >= cfg.decisive_target) break;
    const std::uint64_t game_seed = mix(cfg.seed * 0x100000001B3ULL + g);
    std::mt19937_64 rng(game_seed);
    NoisyMaterialComparator cmp(game_seed);

    PgnGame game;
    game.index = g;
    game.tags["Event"] = "self-play";
    game.tags["Site"] = "local";
    game.tags["Round"] = std::to_string(g + 1);
    game.tags["White"] = "material";
    game.tags["Black"] = "material";

    Position pos = game.start;
    GameHistory history(pos);
    GameEnd end = GameEnd::None;
    for (int ply = 0; end == GameEnd::None; ++ply) {
      const MoveList moves = legal_moves(pos);
      Move m;
      if (ply < cfg.opening_random_plies || explore(rng)) {
        m = random_move(moves, rng);
      } else {
        SearchLimits limits;
        limits.max_depth = cfg.depth;
        m = search_root(pos, limits, cmp).best_move;
      }
      game.moves.push_back(m);
      pos = pos.play_unchecked(m);
      history.push(pos);
      end = adjudicate(pos, history, cfg.max_plies);
    }

    game.outcome = outcome_of(end, pos);
    if (end == GameEnd::PlyLimit) {
      const int balance = material_balance(pos);
      if (balance >= cfg.adjudication_margin) game.outcome = GameOutcome::WhiteWins;
      else if (balance <= -cfg.adjudication_margin) game.outcome = GameOutcome::BlackWins;
    }
    game.tags["Termination"] = std::string(describe(end));
    if (end == GameEnd::Checkmate) ++stats.checkmates;
    switch (game.outcome) {
      case GameOutcome::WhiteWins: ++stats.white_wins; break;
      case GameOutcome::BlackWins: ++stats.black_wins; break;
      default: ++stats.draws; break;
    }
    ++stats.games;
    pgn << write_pgn(game);
  }
  return stats;
}

AuditReport consistency_audit(PositionComparator& cmp, std::span<const Position> positions, std::size_t triples,
                              std::uint64_t seed) {
  if (positions.size() < 3) throw std::invalid_argument("audit needs at least three positions");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, positions.size() - 1);
  auto beats = [&](const Position& x, const Position& y) { return cmp.compare(x, y) == Ordering::FirstBetter; };

  AuditReport report;
  for (std::size_t t = 0; t < triples; ++t) {
    std::size_t i = pick(rng), j = pick(rng), k = pick(rng);
    if (i == j || j == k || i == k) {
      --t;
      continue;
    }
    const Position& a = positions[i];
    const Position& b = positions[j];
    const Position& c = positions[k];
    const bool ab = beats(a, b);
    const bool ba = beats(b, a);
    const bool bc = beats(b, c);
    const bool ca = beats(c, a);
    const bool cb = beats(c, b);
    const bool ac = beats(a, c);
    ++report.triples;
    if ((ab && bc && ca) || (ba && cb && ac)) ++report.cycles;
    report.pairs += 3;
    report.asymmetric_pairs += static_cast<std::size_t>(ab == ba) + (bc == cb) + (ca == ac);
  }
  return report;
}

}  // namespace deepchess
