#include <string>

#include "deepchess/position.hpp"

namespace deepchess {

namespace {

char san_letter(PieceType t) { return "PNBRQK"[index_of(t)]; }

std::optional<PieceType> piece_from_san_letter(char c) {
  switch (c) {
    case 'N': return PieceType::Knight;
    case 'B': return PieceType::Bishop;
    case 'R': return PieceType::Rook;
    case 'Q': return PieceType::Queen;
    case 'K': return PieceType::King;
    default: return std::nullopt;
  }
}

}  // namespace

std::string to_san(const Position& p, const Move& move) {
  const Move m = p.annotate(move);
  std::string san;
  const auto moving = p.piece_at(m.from);
  if (!moving) throw IllegalMove("no piece on " + square_name(m.from));

  if (m.is_castle()) {
    san = file_of(m.to) == 6 ? "O-O" : "O-O-O";
  } else if (moving->type == PieceType::Pawn) {
    if (m.is_capture()) {
      san += static_cast<char>('a' + file_of(m.from));
      san += 'x';
    }
    san += square_name(m.to);
    if (m.promotion) {
      san += '=';
      san += san_letter(*m.promotion);
    }
  } else {
    san += san_letter(moving->type);
    bool ambiguous = false, same_file = false, same_rank = false;
    for (const Move& other : legal_moves(p)) {
      if (other.to != m.to || other.from == m.from) continue;
      const auto pc = p.piece_at(other.from);
      if (!pc || pc->type != moving->type) continue;
      ambiguous = true;
      if (file_of(other.from) == file_of(m.from)) same_file = true;
      if (rank_of(other.from) == rank_of(m.from)) same_rank = true;
    }
    if (ambiguous) {
      if (!same_file) san += static_cast<char>('a' + file_of(m.from));
      else if (!same_rank) san += static_cast<char>('1' + rank_of(m.from));
      else san += square_name(m.from);
    }
    if (m.is_capture()) san += 'x';
    san += square_name(m.to);
  }

  const Position next = p.play_unchecked(m);
  if (next.in_check()) san += legal_moves(next).empty() ? '#' : '+';
  return san;
}

Move parse_san(const Position& p, std::string_view token) {
  std::string t(token);
  while (!t.empty() && (t.back() == '+' || t.back() == '#' || t.back() == '!' || t.back() == '?')) t.pop_back();
  if (t.empty()) throw IllegalMove("empty SAN token");

  const MoveList moves = legal_moves(p);

  if (t == "O-O" || t == "0-0" || t == "O-O-O" || t == "0-0-0") {
    const int file = t.size() == 3 ? 6 : 2;
    for (const Move& m : moves)
      if (m.is_castle() && file_of(m.to) == file) return m;
    throw IllegalMove("castling not legal: " + std::string(token));
  }

  PieceType type = PieceType::Pawn;
  std::size_t i = 0;
  if (const auto pt = piece_from_san_letter(t[0])) {
    type = *pt;
    i = 1;
  }

  std::optional<PieceType> promotion;
  if (const auto eq = t.find('='); eq != std::string::npos) {
    if (eq + 2 != t.size()) throw IllegalMove("bad promotion in " + std::string(token));
    promotion = piece_from_san_letter(t[eq + 1]);
    if (!promotion || *promotion == PieceType::King) throw IllegalMove("bad promotion in " + std::string(token));
    t.resize(eq);
  } else if (type == PieceType::Pawn && t.size() >= 3) {
    // Tolerate the "e8Q" form.
    if (const auto pt = piece_from_san_letter(t.back()); pt && *pt != PieceType::King) {
      promotion = pt;
      t.pop_back();
    }
  }

  if (t.size() < i + 2) throw IllegalMove("SAN token too short: " + std::string(token));
  const auto to = parse_square(std::string_view(t).substr(t.size() - 2));
  if (!to) throw IllegalMove("bad target square in " + std::string(token));

  int from_file = -1, from_rank = -1;
  for (std::size_t k = i; k + 2 < t.size(); ++k) {
    const char c = t[k];
    if (c == 'x' || c == ':' || c == '-') continue;
    if (c >= 'a' && c <= 'h') from_file = c - 'a';
    else if (c >= '1' && c <= '8') from_rank = c - '1';
    else throw IllegalMove("unexpected character in " + std::string(token));
  }

  std::optional<Move> found;
  for (const Move& m : moves) {
    if (m.to != *to || m.promotion != promotion) continue;
    const auto pc = p.piece_at(m.from);
    if (!pc || pc->type != type) continue;
    if (from_file >= 0 && file_of(m.from) != from_file) continue;
    if (from_rank >= 0 && rank_of(m.from) != from_rank) continue;
    if (found) throw IllegalMove("ambiguous SAN " + std::string(token));
    found = m;
  }
  if (!found) throw IllegalMove("no legal move matches " + std::string(token) + " in " + to_fen(p));
  return *found;
}

}  // namespace deepchess
