#include "deepchess/match.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "deepchess/model_io.hpp"

namespace deepchess {

namespace {

using std::chrono::milliseconds;
using Clock = std::chrono::steady_clock;

std::uint64_t mix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::unique_ptr<PositionComparator> make_comparator(const EngineConfig& cfg,
                                                    const std::shared_ptr<const nn::SiameseNetwork<float>>& net,
                                                    const std::shared_ptr<FeatureCache>& cache, std::uint64_t seed) {
  switch (cfg.comparator) {
    case ComparatorKind::Material: return std::make_unique<MaterialComparator>();
    case ComparatorKind::Random: return std::make_unique<RandomComparator>(seed);
    case ComparatorKind::Learned: return std::make_unique<LearnedComparator>(net, cache);
  }
  throw std::invalid_argument("unknown comparator");
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::string_view to_string(ComparatorKind k) {
  switch (k) {
    case ComparatorKind::Learned: return "learned";
    case ComparatorKind::Material: return "material";
    case ComparatorKind::Random: return "random";
  }
  return "?";
}

ComparatorKind parse_comparator_kind(std::string_view name) {
  if (name == "learned") return ComparatorKind::Learned;
  if (name == "material") return ComparatorKind::Material;
  if (name == "random") return ComparatorKind::Random;
  throw std::invalid_argument("unknown comparator '" + std::string(name) + "' (learned, material, random)");
}

void EngineConfig::validate() const {
  if (comparator == ComparatorKind::Learned && model_path.empty())
    throw std::invalid_argument("the learned comparator needs a model path");
  if (comparator != ComparatorKind::Learned && !model_path.empty())
    throw std::invalid_argument("a model path is only meaningful with the learned comparator");
  if (max_depth < 1) throw std::invalid_argument("max_depth must be at least 1");
}

std::string EngineConfig::display_name() const {
  if (!name.empty()) return name;
  return std::string(to_string(comparator)) + "-d" + std::to_string(max_depth);
}

Engine::Engine(EngineConfig cfg) : Engine(cfg, nullptr) {}

Engine::Engine(EngineConfig cfg, std::shared_ptr<const nn::SiameseNetwork<float>> net)
    : cfg_(std::move(cfg)), net_(std::move(net)) {
  cfg_.validate();
  if (cfg_.comparator == ComparatorKind::Learned) {
    if (!net_) net_ = std::make_shared<const nn::SiameseNetwork<float>>(nn::load_model(cfg_.model_path));
    const int dim = net_->extractor.output_dim();
    if (cfg_.cache_mb > 0)
      cache_ = std::make_shared<FeatureCache>(FeatureCache::entries_for_megabytes(cfg_.cache_mb, dim), dim);
  }
  cmp_ = make_comparator(cfg_, net_, cache_, cfg_.seed);
}

void Engine::new_game(std::uint64_t game_seed) {
  if (cfg_.comparator == ComparatorKind::Random) cmp_ = make_comparator(cfg_, net_, cache_, mix(cfg_.seed ^ mix(game_seed)));
}

SearchResult Engine::think(const Position& p, SearchLimits limits) {
  if (cfg_.deterministic) {
    limits.soft_time.reset();
    limits.hard_time.reset();
  }
  return search_root(p, limits, *cmp_);
}

Position Opening::final_position() const {
  Position p = start;
  for (const Move& m : moves) p = apply_move(p, m);
  return p;
}

std::vector<Opening> load_openings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open openings file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();

  std::istringstream lines(text);
  std::string first;
  while (std::getline(lines, first) && trim(first).empty()) {
  }
  std::vector<Opening> out;
  const std::string head = trim(first);
  if (!head.empty() && (head[0] == '[' || std::isdigit(static_cast<unsigned char>(head[0])))) {
    std::istringstream pgn(text);
    for (auto& g : read_all_games(pgn)) out.push_back({g.start, std::move(g.moves)});
    return out;
  }
  std::istringstream fens(text);
  for (std::string line; std::getline(fens, line);) {
    const std::string fen = trim(line);
    if (fen.empty() || fen[0] == '#') continue;
    out.push_back({parse_fen(fen), {}});
  }
  return out;
}

std::string_view describe(GameEnd e) {
  switch (e) {
    case GameEnd::None: return "in progress";
    case GameEnd::Checkmate: return "checkmate";
    case GameEnd::Stalemate: return "stalemate";
    case GameEnd::ThreefoldRepetition: return "threefold repetition";
    case GameEnd::FiftyMoveRule: return "fifty-move rule";
    case GameEnd::InsufficientMaterial: return "insufficient material";
    case GameEnd::PlyLimit: return "ply limit";
    case GameEnd::TimeForfeit: return "time forfeit";
  }
  return "?";
}

bool insufficient_material(const Position& p) {
  for (Color c : {Color::White, Color::Black})
    if (p.pieces(c, PieceType::Pawn) | p.pieces(c, PieceType::Rook) | p.pieces(c, PieceType::Queen)) return false;
  const Bitboard knights = p.pieces(Color::White, PieceType::Knight) | p.pieces(Color::Black, PieceType::Knight);
  const Bitboard bishops = p.pieces(Color::White, PieceType::Bishop) | p.pieces(Color::Black, PieceType::Bishop);
  const int minors = std::popcount(knights) + std::popcount(bishops);
  if (minors <= 1) return true;
  if (knights) return false;
  constexpr Bitboard kDarkSquares = 0xAA55AA55AA55AA55ULL;
  return (bishops & kDarkSquares) == 0 || (bishops & ~kDarkSquares) == 0;
}

std::uint64_t GameHistory::repetition_key(const Position& p) {
  std::uint64_t key = p.key();
  if (const auto ep = p.en_passant_square()) {
    const Color us = p.side_to_move();
    if (attacks::pawn(!us, *ep) & p.pieces(us, PieceType::Pawn)) key ^= mix(0xE9 + *ep);
  }
  return key;
}

void GameHistory::push(const Position& p) { keys_.push_back(repetition_key(p)); }

int GameHistory::occurrences(const Position& p) const {
  return static_cast<int>(std::count(keys_.begin(), keys_.end(), repetition_key(p)));
}

GameEnd adjudicate(const Position& p, const GameHistory& history, std::size_t ply_limit) {
  switch (termination(p)) {
    case Termination::Checkmate: return GameEnd::Checkmate;
    case Termination::Stalemate: return GameEnd::Stalemate;
    case Termination::None: break;
  }
  if (history.occurrences(p) >= 3) return GameEnd::ThreefoldRepetition;
  if (p.halfmove_clock() >= 100) return GameEnd::FiftyMoveRule;
  if (insufficient_material(p)) return GameEnd::InsufficientMaterial;
  if (ply_limit > 0 && history.plies() >= ply_limit) return GameEnd::PlyLimit;
  return GameEnd::None;
}

GameOutcome outcome_of(GameEnd end, const Position& final_position) {
  switch (end) {
    case GameEnd::None: return GameOutcome::Unknown;
    case GameEnd::Checkmate:
    case GameEnd::TimeForfeit:
      return final_position.side_to_move() == Color::White ? GameOutcome::BlackWins : GameOutcome::WhiteWins;
    default: return GameOutcome::Draw;
  }
}

void MatchSpec::validate() const {
  if (games < 1) throw std::invalid_argument("a match needs at least one game");
  if (alternate_colors && games % 2 != 0) throw std::invalid_argument("alternating colors needs an even game count");
  for (const auto& e : engines) e.validate();
}

std::string MatchReport::pgn_text() const {
  std::string out;
  for (const auto& g : games) out += write_pgn(g.pgn);
  return out;
}

namespace {

void tally(MatchReport& r, GameOutcome o, bool first_white) {
  if (o == GameOutcome::Draw) ++r.draws;
  else if ((o == GameOutcome::WhiteWins) == first_white) ++r.wins;
  else ++r.losses;
}

void finalize(MatchReport& r) {
  const std::size_t n = r.played();
  r.points_fraction = n == 0 ? 0.0 : (static_cast<double>(r.wins) + 0.5 * static_cast<double>(r.draws)) / static_cast<double>(n);
  r.elo_diff.reset();
  if (n > 0 && r.wins * 2 + r.draws > 0 && r.losses * 2 + r.draws > 0) r.elo_diff = elo_from_counts(r.wins, r.losses, r.draws);
}

GameRecord play_game(const MatchSpec& spec, std::array<Engine*, 2> engines, std::array<std::string, 2> names,
                     std::size_t index, const Opening& opening, bool first_white) {
  // seat 0 plays White.
  const std::array<std::size_t, 2> seat_engine = first_white ? std::array<std::size_t, 2>{0, 1} : std::array<std::size_t, 2>{1, 0};
  std::array<std::optional<milliseconds>, 2> clock{spec.time_per_game[seat_engine[0]], spec.time_per_game[seat_engine[1]]};

  GameRecord rec;
  rec.first_engine_white = first_white;
  rec.pgn.start = opening.start;
  rec.pgn.moves = opening.moves;
  rec.pgn.index = index;
  rec.pgn.tags["Event"] = "deepchess match";
  rec.pgn.tags["Site"] = "local";
  rec.pgn.tags["Date"] = "????.??.??";
  rec.pgn.tags["Round"] = std::to_string(index + 1);
  rec.pgn.tags["White"] = names[seat_engine[0]];
  rec.pgn.tags["Black"] = names[seat_engine[1]];
  if (to_fen(opening.start) != kStartFen) {
    rec.pgn.tags["SetUp"] = "1";
    rec.pgn.tags["FEN"] = to_fen(opening.start);
  }

  Position pos = opening.start;
  GameHistory history(pos);
  for (const Move& m : opening.moves) {
    pos = apply_move(pos, m);
    history.push(pos);
  }

  GameEnd end = adjudicate(pos, history, spec.max_plies);
  while (end == GameEnd::None) {
    const int seat = index_of(pos.side_to_move());
    Engine& engine = *engines[seat_engine[seat]];
    SearchLimits limits;
    limits.max_depth = engine.config().max_depth;
    if (clock[seat]) limits = SearchLimits::for_clock(*clock[seat], engine.config().deterministic ? engine.config().max_depth : 64);
    const auto t0 = Clock::now();
    SearchResult r;
    try {
      r = engine.think(pos, limits);
    } catch (const std::exception& e) {
      throw EngineFailure(names[seat_engine[seat]] + ": " + e.what());
    }
    if (clock[seat]) {
      *clock[seat] -= std::chrono::duration_cast<milliseconds>(Clock::now() - t0);
      if (clock[seat]->count() <= 0) {
        end = GameEnd::TimeForfeit;
        break;
      }
    }
    if (!parse_uci_move(pos, to_uci(r.best_move)))
      throw EngineFailure(names[seat_engine[seat]] + " returned illegal move " + to_uci(r.best_move));
    rec.pgn.moves.push_back(r.best_move);
    pos = pos.play_unchecked(r.best_move);
    history.push(pos);
    end = adjudicate(pos, history, spec.max_plies);
  }
  rec.end = end;
  rec.pgn.outcome = outcome_of(end, pos);
  rec.pgn.tags["Termination"] = std::string(describe(end));
  return rec;
}

}  // namespace

MatchReport run_match(const MatchSpec& spec, const GameCallback& on_game) {
  spec.validate();
  MatchReport report;
  std::array<std::string, 2> names{spec.engines[0].display_name(), spec.engines[1].display_name()};
  if (names[0] == names[1]) {
    names[0] += " (1)";
    names[1] += " (2)";
  }
  std::optional<Engine> a;
  std::optional<Engine> b;
  try {
    a.emplace(spec.engines[0]);
    b.emplace(spec.engines[1]);
  } catch (const std::exception& e) {
    report.failure = std::string("engine setup failed: ") + e.what();
    return report;
  }

  for (std::size_t g = 0; g < spec.games; ++g) {
    const std::size_t pair = spec.alternate_colors ? g / 2 : g;
    const bool first_white = !spec.alternate_colors || g % 2 == 0;
    const Opening opening = spec.openings.empty() ? Opening{} : spec.openings[pair % spec.openings.size()];
    const std::uint64_t game_seed = mix(spec.seed + pair);
    a->new_game(game_seed);
    b->new_game(game_seed);
    try {
      GameRecord rec = play_game(spec, {&*a, &*b}, names, g, opening, first_white);
      tally(report, rec.pgn.outcome, first_white);
      report.games.push_back(std::move(rec));
    } catch (const EngineFailure& e) {
      report.failure = e.what();
      break;
    }
    finalize(report);
    if (on_game) on_game(report.games.back(), report);
  }
  finalize(report);
  return report;
}

MatchReport score_from_pgn(std::string_view pgn_text, const std::string& first_engine) {
  std::istringstream in{std::string(pgn_text)};
  MatchReport report;
  for (auto& g : read_all_games(in)) {
    const bool first_white = g.tags["White"] == first_engine;
    if (!first_white && g.tags["Black"] != first_engine)
      throw std::invalid_argument("game " + std::to_string(g.index + 1) + " does not involve " + first_engine);
    if (g.outcome == GameOutcome::Unknown) continue;
    tally(report, g.outcome, first_white);
    report.games.push_back({std::move(g), GameEnd::None, first_white});
  }
  finalize(report);
  return report;
}

double elo_from_fraction(double s) {
  if (!(s > 0.0 && s < 1.0)) throw UndefinedForShutout();
  return -400.0 * std::log10(1.0 / s - 1.0);
}

double elo_from_counts(std::size_t wins, std::size_t losses, std::size_t draws) {
  const double w = static_cast<double>(wins) + 0.5 * static_cast<double>(draws);
  const double l = static_cast<double>(losses) + 0.5 * static_cast<double>(draws);
  if (w <= 0.0 || l <= 0.0) throw UndefinedForShutout();
  return 400.0 * (std::log10(w) - std::log10(l));
}

}  // namespace deepchess
