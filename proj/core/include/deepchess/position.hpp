#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "deepchess/bitboard.hpp"
#include "deepchess/types.hpp"

namespace deepchess {

struct Move {
  enum Flag : std::uint8_t {
    kCapture = 1,
    kCastle = 2,
    kEnPassant = 4,
    kDoublePush = 8,
  };

  Square from = 0;
  Square to = 0;
  std::optional<PieceType> promotion;
  std::uint8_t flags = 0;

  bool is_capture() const { return (flags & kCapture) != 0; }
  bool is_castle() const { return (flags & kCastle) != 0; }
  bool is_en_passant() const { return (flags & kEnPassant) != 0; }
  bool is_double_push() const { return (flags & kDoublePush) != 0; }

  // Flags are derived from the position, so identity is (from, to, promotion).
  friend bool operator==(const Move& a, const Move& b) {
    return a.from == b.from && a.to == b.to && a.promotion == b.promotion;
  }
};

/// Long algebraic coordinate notation as used by UCI ("e2e4", "e7e8q").
std::string to_uci(const Move& m);

class MoveList {
 public:
  static constexpr int kCapacity = 256;

  void push_back(const Move& m) { moves_[size_++] = m; }
  int size() const { return size_; }
  bool empty() const { return size_ == 0; }
  const Move& operator[](int i) const { return moves_[i]; }
  Move& operator[](int i) { return moves_[i]; }
  const Move* begin() const { return moves_.data(); }
  const Move* end() const { return moves_.data() + size_; }
  Move* begin() { return moves_.data(); }
  Move* end() { return moves_.data() + size_; }

 private:
  std::array<Move, kCapacity> moves_{};
  int size_ = 0;
};

class ChessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// FEN fields are indexed 0 (placement) .. 5 (fullmove number).
class MalformedFen : public ChessError {
 public:
  MalformedFen(int field, const std::string& what)
      : ChessError("malformed FEN (field " + std::to_string(field) + "): " + what), field_(field) {}
  int field() const { return field_; }

 private:
  int field_;
};

class IllegalMove : public ChessError {
 public:
  using ChessError::ChessError;
};

enum class SetupProblem {
  None,
  KingCount,
  PawnOnBackRank,
  CastlingWithoutPieces,
  OpponentInCheck,
  BadEnPassant,
  BadCounters,
};

std::string_view describe(SetupProblem p);

class InvalidPosition : public ChessError {
 public:
  explicit InvalidPosition(SetupProblem p) : ChessError(std::string(describe(p))), problem_(p) {}
  SetupProblem problem() const { return problem_; }

 private:
  SetupProblem problem_;
};

/// Plain field bag used to construct a Position; no invariants enforced.
struct PositionSetup {
  std::array<std::optional<Piece>, kSquareCount> placement{};
  Color side_to_move = Color::White;
  std::uint8_t castling = 0;
  std::optional<Square> en_passant;
  int halfmove_clock = 0;
  int fullmove_number = 1;
};

SetupProblem check_setup(const PositionSetup& setup);

/// Immutable legal chess position. Moves produce new values.
class Position {
 public:
  /// Validates all invariants; throws InvalidPosition.
  static Position from_setup(const PositionSetup& setup);
  static Position startpos();

  PositionSetup setup() const;

  std::optional<Piece> piece_at(Square s) const;
  Color side_to_move() const { return side_to_move_; }
  std::uint8_t castling_rights() const { return castling_; }
  bool can_castle(CastlingRight r) const { return (castling_ & r) != 0; }
  std::optional<Square> en_passant_square() const { return en_passant_; }
  int halfmove_clock() const { return halfmove_clock_; }
  int fullmove_number() const { return fullmove_number_; }

  Bitboard pieces(Color c, PieceType t) const { return pieces_[index_of(c)][index_of(t)]; }
  Bitboard occupied(Color c) const { return by_color_[index_of(c)]; }
  Bitboard occupied() const { return by_color_[0] | by_color_[1]; }
  Square king_square(Color c) const { return lsb(pieces(c, PieceType::King)); }

  /// Zobrist key over placement, side to move and castling rights, maintained incrementally.
  std::uint64_t key() const { return key_; }

  bool is_attacked(Square s, Color by) const;
  bool in_check() const { return is_attacked(king_square(side_to_move_), !side_to_move_); }

  /// Plays a move assumed legal; flags are recomputed from the board.
  Position play_unchecked(const Move& m) const;

  /// Fills in capture / castle / en-passant / double-push flags for a from-to-promotion triple.
  Move annotate(Move m) const;

  friend bool operator==(const Position& a, const Position& b);

 private:
  Position() = default;

  void put(Square s, Piece p);
  void remove(Square s);

  std::array<std::array<Bitboard, kPieceTypeCount>, 2> pieces_{};
  std::array<Bitboard, 2> by_color_{};
  std::array<std::int8_t, kSquareCount> board_{};
  Color side_to_move_ = Color::White;
  std::uint8_t castling_ = 0;
  std::optional<Square> en_passant_;
  int halfmove_clock_ = 0;
  int fullmove_number_ = 1;
  std::uint64_t key_ = 0;
};

inline constexpr std::string_view kStartFen = "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1";

Position parse_fen(std::string_view text);
std::string to_fen(const Position& p);

MoveList legal_moves(const Position& p);

/// Checked move application; throws IllegalMove when `m` is not legal in `p`.
Position apply_move(const Position& p, const Move& m);

std::uint64_t perft(const Position& p, int depth);

/// Resolves a coordinate string such as "e2e4" against the legal moves of `p`.
std::optional<Move> parse_uci_move(const Position& p, std::string_view text);

std::string to_san(const Position& p, const Move& m);

/// Resolves a SAN token (annotations such as '+', '#', '!' tolerated). Throws IllegalMove.
Move parse_san(const Position& p, std::string_view token);

enum class Termination { None, Checkmate, Stalemate };

Termination termination(const Position& p);

}  // namespace deepchess
