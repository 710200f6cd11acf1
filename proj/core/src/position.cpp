#include "deepchess/position.hpp"

#include <charconv>
#include <cstdlib>
#include <sstream>
#include <vector>

#include "deepchess/zobrist.hpp"

namespace deepchess {

namespace {

constexpr std::int8_t kEmpty = -1;

constexpr std::int8_t code_of(Piece p) { return static_cast<std::int8_t>(zobrist::plane(p)); }
constexpr Piece piece_of(std::int8_t code) {
  return Piece{static_cast<Color>(code / kPieceTypeCount), static_cast<PieceType>(code % kPieceTypeCount)};
}

// Castling rights that survive a move touching each square.
constexpr std::array<std::uint8_t, 64> make_castling_mask() {
  std::array<std::uint8_t, 64> m{};
  for (auto& v : m) v = kAllCastling;
  m[make_square(4, 0)] &= ~(kWhiteKingside | kWhiteQueenside);
  m[make_square(7, 0)] &= ~kWhiteKingside;
  m[make_square(0, 0)] &= ~kWhiteQueenside;
  m[make_square(4, 7)] &= ~(kBlackKingside | kBlackQueenside);
  m[make_square(7, 7)] &= ~kBlackKingside;
  m[make_square(0, 7)] &= ~kBlackQueenside;
  return m;
}

constexpr auto kCastlingMask = make_castling_mask();

std::vector<std::string_view> split_ws(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < text.size() && text[i] != ' ' && text[i] != '\t') ++i;
    if (i > start) out.push_back(text.substr(start, i - start));
  }
  return out;
}

int parse_count(std::string_view field, int index) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size() || v < 0)
    throw MalformedFen(index, "expected a non-negative integer, got '" + std::string(field) + "'");
  return v;
}

void add_pawn_moves(const Position& p, MoveList& out) {
  const Color us = p.side_to_move();
  const Bitboard occ = p.occupied();
  const Bitboard enemies = p.occupied(!us);
  const int forward = us == Color::White ? 8 : -8;
  const int start_rank = us == Color::White ? 1 : 6;
  const int promo_rank = us == Color::White ? 7 : 0;

  auto emit = [&](Square from, Square to, std::uint8_t flags) {
    if (rank_of(to) == promo_rank) {
      for (PieceType t : {PieceType::Queen, PieceType::Rook, PieceType::Bishop, PieceType::Knight})
        out.push_back(Move{from, to, t, flags});
    } else {
      out.push_back(Move{from, to, std::nullopt, flags});
    }
  };

  Bitboard pawns = p.pieces(us, PieceType::Pawn);
  while (pawns) {
    const Square from = pop_lsb(pawns);
    const int one = from + forward;
    if (!(occ & square_bb(static_cast<Square>(one)))) {
      emit(from, static_cast<Square>(one), 0);
      const int two = one + forward;
      if (rank_of(from) == start_rank && !(occ & square_bb(static_cast<Square>(two))))
        out.push_back(Move{from, static_cast<Square>(two), std::nullopt, Move::kDoublePush});
    }
    Bitboard caps = attacks::pawn(us, from) & enemies;
    while (caps) emit(from, pop_lsb(caps), Move::kCapture);
    if (const auto ep = p.en_passant_square(); ep && (attacks::pawn(us, from) & square_bb(*ep)))
      out.push_back(Move{from, *ep, std::nullopt, Move::kCapture | Move::kEnPassant});
  }
}

void add_piece_moves(const Position& p, MoveList& out) {
  const Color us = p.side_to_move();
  const Bitboard own = p.occupied(us);
  const Bitboard enemies = p.occupied(!us);
  const Bitboard occ = p.occupied();
  for (PieceType t : {PieceType::Knight, PieceType::Bishop, PieceType::Rook, PieceType::Queen, PieceType::King}) {
    Bitboard pieces = p.pieces(us, t);
    while (pieces) {
      const Square from = pop_lsb(pieces);
      Bitboard targets = 0;
      switch (t) {
        case PieceType::Knight: targets = attacks::knight(from); break;
        case PieceType::Bishop: targets = attacks::bishop(from, occ); break;
        case PieceType::Rook: targets = attacks::rook(from, occ); break;
        case PieceType::Queen: targets = attacks::queen(from, occ); break;
        default: targets = attacks::king(from); break;
      }
      targets &= ~own;
      while (targets) {
        const Square to = pop_lsb(targets);
        out.push_back(Move{from, to, std::nullopt,
                           static_cast<std::uint8_t>((enemies & square_bb(to)) ? Move::kCapture : 0)});
      }
    }
  }
}

void add_castling_moves(const Position& p, MoveList& out) {
  const Color us = p.side_to_move();
  const Color them = !us;
  const int rank = us == Color::White ? 0 : 7;
  const Square king_from = make_square(4, rank);
  const Bitboard occ = p.occupied();
  const auto kingside = us == Color::White ? kWhiteKingside : kBlackKingside;
  const auto queenside = us == Color::White ? kWhiteQueenside : kBlackQueenside;
  if (!p.can_castle(kingside) && !p.can_castle(queenside)) return;
  if (p.is_attacked(king_from, them)) return;

  if (p.can_castle(kingside)) {
    const Square f = make_square(5, rank), g = make_square(6, rank);
    if (!(occ & (square_bb(f) | square_bb(g))) && !p.is_attacked(f, them))
      out.push_back(Move{king_from, g, std::nullopt, Move::kCastle});
  }
  if (p.can_castle(queenside)) {
    const Square d = make_square(3, rank), c = make_square(2, rank), b = make_square(1, rank);
    if (!(occ & (square_bb(d) | square_bb(c) | square_bb(b))) && !p.is_attacked(d, them))
      out.push_back(Move{king_from, c, std::nullopt, Move::kCastle});
  }
}

}  // namespace

std::string square_name(Square s) {
  return {static_cast<char>('a' + file_of(s)), static_cast<char>('1' + rank_of(s))};
}

std::optional<Square> parse_square(std::string_view text) {
  if (text.size() != 2 || text[0] < 'a' || text[0] > 'h' || text[1] < '1' || text[1] > '8') return std::nullopt;
  return make_square(text[0] - 'a', text[1] - '1');
}

char piece_char(Piece p) {
  constexpr std::string_view letters = "pnbrqk";
  const char c = letters[index_of(p.type)];
  return p.color == Color::White ? static_cast<char>(c - 'a' + 'A') : c;
}

std::optional<Piece> piece_from_char(char c) {
  constexpr std::string_view letters = "pnbrqk";
  const bool white = c >= 'A' && c <= 'Z';
  const char lower = white ? static_cast<char>(c - 'A' + 'a') : c;
  const auto idx = letters.find(lower);
  if (idx == std::string_view::npos) return std::nullopt;
  return Piece{white ? Color::White : Color::Black, static_cast<PieceType>(idx)};
}

std::string_view outcome_token(GameOutcome o) {
  switch (o) {
    case GameOutcome::WhiteWins: return "1-0";
    case GameOutcome::BlackWins: return "0-1";
    case GameOutcome::Draw: return "1/2-1/2";
    default: return "*";
  }
}

std::string to_uci(const Move& m) {
  std::string s = square_name(m.from) + square_name(m.to);
  if (m.promotion) s += static_cast<char>(piece_char(Piece{Color::Black, *m.promotion}));
  return s;
}

std::string_view describe(SetupProblem p) {
  switch (p) {
    case SetupProblem::None: return "valid";
    case SetupProblem::KingCount: return "each side needs exactly one king";
    case SetupProblem::PawnOnBackRank: return "pawn on first or last rank";
    case SetupProblem::CastlingWithoutPieces: return "castling right without king and rook on home squares";
    case SetupProblem::OpponentInCheck: return "side not to move is in check";
    case SetupProblem::BadEnPassant: return "inconsistent en passant square";
    case SetupProblem::BadCounters: return "invalid move counters";
  }
  return "unknown";
}

SetupProblem check_setup(const PositionSetup& s) {
  int kings[2] = {0, 0};
  for (int sq = 0; sq < 64; ++sq) {
    const auto& pc = s.placement[sq];
    if (!pc) continue;
    if (pc->type == PieceType::King) ++kings[index_of(pc->color)];
    if (pc->type == PieceType::Pawn && (rank_of(static_cast<Square>(sq)) == 0 || rank_of(static_cast<Square>(sq)) == 7))
      return SetupProblem::PawnOnBackRank;
  }
  if (kings[0] != 1 || kings[1] != 1) return SetupProblem::KingCount;

  auto has = [&](int file, int rank, Piece p) { return s.placement[make_square(file, rank)] == p; };
  const Piece wk{Color::White, PieceType::King}, bk{Color::Black, PieceType::King};
  const Piece wr{Color::White, PieceType::Rook}, br{Color::Black, PieceType::Rook};
  if ((s.castling & kWhiteKingside) && !(has(4, 0, wk) && has(7, 0, wr))) return SetupProblem::CastlingWithoutPieces;
  if ((s.castling & kWhiteQueenside) && !(has(4, 0, wk) && has(0, 0, wr))) return SetupProblem::CastlingWithoutPieces;
  if ((s.castling & kBlackKingside) && !(has(4, 7, bk) && has(7, 7, br))) return SetupProblem::CastlingWithoutPieces;
  if ((s.castling & kBlackQueenside) && !(has(4, 7, bk) && has(0, 7, br))) return SetupProblem::CastlingWithoutPieces;
  if (s.castling > kAllCastling) return SetupProblem::CastlingWithoutPieces;

  if (s.en_passant) {
    // The square behind a pawn of the side that just moved, with both squares it crossed empty.
    const Square ep = *s.en_passant;
    const bool white_to_move = s.side_to_move == Color::White;
    const int ep_rank = white_to_move ? 5 : 2;
    if (rank_of(ep) != ep_rank) return SetupProblem::BadEnPassant;
    const int dir = white_to_move ? -8 : 8;
    const Piece pusher{white_to_move ? Color::Black : Color::White, PieceType::Pawn};
    if (s.placement[ep + dir] != pusher || s.placement[ep] || s.placement[ep - dir])
      return SetupProblem::BadEnPassant;
  }
  if (s.halfmove_clock < 0 || s.fullmove_number < 1) return SetupProblem::BadCounters;

  // Defer the attack test to a constructed position.
  return SetupProblem::None;
}

void Position::put(Square s, Piece p) {
  pieces_[index_of(p.color)][index_of(p.type)] |= square_bb(s);
  by_color_[index_of(p.color)] |= square_bb(s);
  board_[s] = code_of(p);
  key_ ^= zobrist::piece_code(p, s);
}

void Position::remove(Square s) {
  const Piece p = piece_of(board_[s]);
  pieces_[index_of(p.color)][index_of(p.type)] &= ~square_bb(s);
  by_color_[index_of(p.color)] &= ~square_bb(s);
  board_[s] = kEmpty;
  key_ ^= zobrist::piece_code(p, s);
}

Position Position::from_setup(const PositionSetup& setup) {
  if (const auto problem = check_setup(setup); problem != SetupProblem::None) throw InvalidPosition(problem);
  Position p;
  p.board_.fill(kEmpty);
  for (int sq = 0; sq < 64; ++sq)
    if (setup.placement[sq]) p.put(static_cast<Square>(sq), *setup.placement[sq]);
  p.side_to_move_ = setup.side_to_move;
  p.castling_ = setup.castling;
  p.en_passant_ = setup.en_passant;
  p.halfmove_clock_ = setup.halfmove_clock;
  p.fullmove_number_ = setup.fullmove_number;
  if (p.side_to_move_ == Color::Black) p.key_ ^= zobrist::kCodes.black_to_move;
  p.key_ ^= zobrist::kCodes.castling[p.castling_];
  if (p.is_attacked(p.king_square(!p.side_to_move_), p.side_to_move_)) throw InvalidPosition(SetupProblem::OpponentInCheck);
  return p;
}

Position Position::startpos() { return parse_fen(kStartFen); }

PositionSetup Position::setup() const {
  PositionSetup s;
  for (int sq = 0; sq < 64; ++sq)
    if (board_[sq] != kEmpty) s.placement[sq] = piece_of(board_[sq]);
  s.side_to_move = side_to_move_;
  s.castling = castling_;
  s.en_passant = en_passant_;
  s.halfmove_clock = halfmove_clock_;
  s.fullmove_number = fullmove_number_;
  return s;
}

std::optional<Piece> Position::piece_at(Square s) const {
  if (board_[s] == kEmpty) return std::nullopt;
  return piece_of(board_[s]);
}

bool Position::is_attacked(Square s, Color by) const {
  const Bitboard occ = occupied();
  if (attacks::pawn(!by, s) & pieces(by, PieceType::Pawn)) return true;
  if (attacks::knight(s) & pieces(by, PieceType::Knight)) return true;
  if (attacks::king(s) & pieces(by, PieceType::King)) return true;
  const Bitboard queens = pieces(by, PieceType::Queen);
  if (attacks::bishop(s, occ) & (pieces(by, PieceType::Bishop) | queens)) return true;
  if (attacks::rook(s, occ) & (pieces(by, PieceType::Rook) | queens)) return true;
  return false;
}

Move Position::annotate(Move m) const {
  m.flags = 0;
  if (board_[m.from] == kEmpty) return m;
  const Piece moving = piece_of(board_[m.from]);
  if (board_[m.to] != kEmpty) m.flags |= Move::kCapture;
  if (moving.type == PieceType::Pawn) {
    if (en_passant_ && m.to == *en_passant_ && file_of(m.from) != file_of(m.to))
      m.flags |= Move::kCapture | Move::kEnPassant;
    if (std::abs(rank_of(m.to) - rank_of(m.from)) == 2) m.flags |= Move::kDoublePush;
  }
  if (moving.type == PieceType::King && std::abs(file_of(m.to) - file_of(m.from)) == 2) m.flags |= Move::kCastle;
  return m;
}

Position Position::play_unchecked(const Move& move) const {
  const Move m = annotate(move);
  Position n = *this;
  const Color us = side_to_move_;
  const Piece moving = piece_of(board_[m.from]);

  n.key_ ^= zobrist::kCodes.castling[castling_];
  n.en_passant_.reset();
  ++n.halfmove_clock_;

  if (m.is_en_passant()) {
    n.remove(static_cast<Square>(us == Color::White ? m.to - 8 : m.to + 8));
  } else if (board_[m.to] != kEmpty) {
    n.remove(m.to);
  }
  if (m.is_capture() || moving.type == PieceType::Pawn) n.halfmove_clock_ = 0;

  n.remove(m.from);
  n.put(m.to, m.promotion ? Piece{us, *m.promotion} : moving);

  if (m.is_castle()) {
    const int rank = rank_of(m.from);
    const bool kingside = file_of(m.to) == 6;
    const Square rook_from = make_square(kingside ? 7 : 0, rank);
    const Square rook_to = make_square(kingside ? 5 : 3, rank);
    n.remove(rook_from);
    n.put(rook_to, Piece{us, PieceType::Rook});
  }
  if (m.is_double_push()) n.en_passant_ = static_cast<Square>((m.from + m.to) / 2);

  n.castling_ = castling_ & kCastlingMask[m.from] & kCastlingMask[m.to];
  n.key_ ^= zobrist::kCodes.castling[n.castling_];

  n.side_to_move_ = !us;
  n.key_ ^= zobrist::kCodes.black_to_move;
  if (us == Color::Black) ++n.fullmove_number_;
  return n;
}

bool operator==(const Position& a, const Position& b) {
  return a.board_ == b.board_ && a.side_to_move_ == b.side_to_move_ && a.castling_ == b.castling_ &&
         a.en_passant_ == b.en_passant_ && a.halfmove_clock_ == b.halfmove_clock_ &&
         a.fullmove_number_ == b.fullmove_number_;
}

Position parse_fen(std::string_view text) {
  const auto fields = split_ws(text);
  if (fields.size() != 6) throw MalformedFen(static_cast<int>(std::min<std::size_t>(fields.size(), 6)), "expected 6 fields");

  PositionSetup s;
  int rank = 7, file = 0;
  for (char c : fields[0]) {
    if (c == '/') {
      if (file != 8 || rank == 0) throw MalformedFen(0, "bad rank separator");
      --rank;
      file = 0;
    } else if (c >= '1' && c <= '8') {
      file += c - '0';
      if (file > 8) throw MalformedFen(0, "rank overflows");
    } else if (const auto piece = piece_from_char(c)) {
      if (file >= 8) throw MalformedFen(0, "rank overflows");
      s.placement[make_square(file, rank)] = *piece;
      ++file;
    } else {
      throw MalformedFen(0, std::string("illegal character '") + c + "'");
    }
  }
  if (rank != 0 || file != 8) throw MalformedFen(0, "placement does not cover 64 squares");

  if (fields[1] == "w") s.side_to_move = Color::White;
  else if (fields[1] == "b") s.side_to_move = Color::Black;
  else throw MalformedFen(1, "side to move must be 'w' or 'b'");

  if (fields[2] != "-") {
    for (char c : fields[2]) {
      std::uint8_t bit = 0;
      switch (c) {
        case 'K': bit = kWhiteKingside; break;
        case 'Q': bit = kWhiteQueenside; break;
        case 'k': bit = kBlackKingside; break;
        case 'q': bit = kBlackQueenside; break;
        default: throw MalformedFen(2, std::string("illegal castling character '") + c + "'");
      }
      if (s.castling & bit) throw MalformedFen(2, "repeated castling right");
      s.castling |= bit;
    }
  }

  if (fields[3] != "-") {
    const auto sq = parse_square(fields[3]);
    if (!sq) throw MalformedFen(3, "bad en passant square");
    s.en_passant = *sq;
  }

  s.halfmove_clock = parse_count(fields[4], 4);
  s.fullmove_number = parse_count(fields[5], 5);
  if (s.fullmove_number < 1) throw MalformedFen(5, "fullmove number must be >= 1");

  try {
    return Position::from_setup(s);
  } catch (const InvalidPosition& e) {
    int field = 0;
    switch (e.problem()) {
      case SetupProblem::OpponentInCheck: field = 1; break;
      case SetupProblem::CastlingWithoutPieces: field = 2; break;
      case SetupProblem::BadEnPassant: field = 3; break;
      case SetupProblem::BadCounters: field = 4; break;
      default: field = 0; break;
    }
    throw MalformedFen(field, e.what());
  }
}

std::string to_fen(const Position& p) {
  std::ostringstream out;
  for (int rank = 7; rank >= 0; --rank) {
    int empty = 0;
    for (int file = 0; file < 8; ++file) {
      const auto pc = p.piece_at(make_square(file, rank));
      if (!pc) {
        ++empty;
        continue;
      }
      if (empty) out << empty;
      empty = 0;
      out << piece_char(*pc);
    }
    if (empty) out << empty;
    if (rank) out << '/';
  }
  out << (p.side_to_move() == Color::White ? " w " : " b ");
  if (!p.castling_rights()) out << '-';
  if (p.can_castle(kWhiteKingside)) out << 'K';
  if (p.can_castle(kWhiteQueenside)) out << 'Q';
  if (p.can_castle(kBlackKingside)) out << 'k';
  if (p.can_castle(kBlackQueenside)) out << 'q';
  out << ' ' << (p.en_passant_square() ? square_name(*p.en_passant_square()) : "-");
  out << ' ' << p.halfmove_clock() << ' ' << p.fullmove_number();
  return out.str();
}

MoveList legal_moves(const Position& p) {
  MoveList pseudo;
  add_pawn_moves(p, pseudo);
  add_piece_moves(p, pseudo);
  add_castling_moves(p, pseudo);

  MoveList legal;
  const Color us = p.side_to_move();
  for (const Move& m : pseudo) {
    const Position next = p.play_unchecked(m);
    if (!next.is_attacked(next.king_square(us), !us)) legal.push_back(m);
  }
  return legal;
}

Position apply_move(const Position& p, const Move& m) {
  for (const Move& legal : legal_moves(p))
    if (legal == m) return p.play_unchecked(legal);
  throw IllegalMove("illegal move " + to_uci(m) + " in " + to_fen(p));
}

std::uint64_t perft(const Position& p, int depth) {
  if (depth <= 0) return 1;
  const MoveList moves = legal_moves(p);
  if (depth == 1) return static_cast<std::uint64_t>(moves.size());
  std::uint64_t nodes = 0;
  for (const Move& m : moves) nodes += perft(p.play_unchecked(m), depth - 1);
  return nodes;
}

std::optional<Move> parse_uci_move(const Position& p, std::string_view text) {
  if (text.size() < 4 || text.size() > 5) return std::nullopt;
  const auto from = parse_square(text.substr(0, 2));
  const auto to = parse_square(text.substr(2, 2));
  if (!from || !to) return std::nullopt;
  std::optional<PieceType> promo;
  if (text.size() == 5) {
    const auto pc = piece_from_char(text[4]);
    if (!pc || pc->color != Color::Black) return std::nullopt;
    promo = pc->type;
  }
  const Move wanted{*from, *to, promo, 0};
  for (const Move& m : legal_moves(p))
    if (m == wanted) return m;
  return std::nullopt;
}

Termination termination(const Position& p) {
  if (!legal_moves(p).empty()) return Termination::None;
  return p.in_check() ? Termination::Checkmate : Termination::Stalemate;
}

namespace zobrist {

std::uint64_t compute_key(const Position& p) {
  std::uint64_t key = 0;
  for (int sq = 0; sq < 64; ++sq)
    if (const auto pc = p.piece_at(static_cast<Square>(sq))) key ^= piece_code(*pc, static_cast<Square>(sq));
  if (p.side_to_move() == Color::Black) key ^= kCodes.black_to_move;
  key ^= kCodes.castling[p.castling_rights()];
  return key;
}

}  // namespace zobrist

}  // namespace deepchess
