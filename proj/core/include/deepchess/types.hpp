#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace deepchess {

enum class Color : std::uint8_t { White = 0, Black = 1 };

constexpr Color operator!(Color c) { return c == Color::White ? Color::Black : Color::White; }
constexpr int index_of(Color c) { return static_cast<int>(c); }

enum class PieceType : std::uint8_t { Pawn = 0, Knight, Bishop, Rook, Queen, King };

constexpr int kPieceTypeCount = 6;
constexpr int index_of(PieceType t) { return static_cast<int>(t); }

struct Piece {
  Color color;
  PieceType type;

  friend constexpr bool operator==(Piece, Piece) = default;
};

/// Squares are numbered rank-major, a1 = 0, b1 = 1, ..., h8 = 63.
using Square = std::uint8_t;

constexpr int kSquareCount = 64;

constexpr Square make_square(int file, int rank) { return static_cast<Square>(rank * 8 + file); }
constexpr int file_of(Square s) { return s & 7; }
constexpr int rank_of(Square s) { return s >> 3; }

std::string square_name(Square s);
std::optional<Square> parse_square(std::string_view text);

/// FEN letter: uppercase for White.
char piece_char(Piece p);
std::optional<Piece> piece_from_char(char c);

/// Castling right bits.
enum CastlingRight : std::uint8_t {
  kWhiteKingside = 1,
  kWhiteQueenside = 2,
  kBlackKingside = 4,
  kBlackQueenside = 8,
  kAllCastling = 15,
};

enum class GameOutcome : std::uint8_t { WhiteWins, BlackWins, Draw, Unknown };

std::string_view outcome_token(GameOutcome o);

}  // namespace deepchess
