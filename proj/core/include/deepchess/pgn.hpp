#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "deepchess/position.hpp"

namespace deepchess {

struct PgnGame {
  std::map<std::string, std::string> tags;
  Position start = Position::startpos();
  std::vector<Move> moves;
  GameOutcome outcome = GameOutcome::Unknown;
  /// Zero-based index of the game within its stream, malformed games included.
  std::size_t index = 0;
};

struct PgnError {
  std::size_t game_index = 0;
  std::size_t line = 0;
  std::string message;
};

GameOutcome outcome_from_token(std::string_view token);

/// Lazy reader over PGN export text. Malformed games are skipped and recorded in errors();
/// variations, comments and NAGs are discarded.
class PgnReader {
 public:
  explicit PgnReader(std::istream& in) : in_(in) {}

  std::optional<PgnGame> next();

  const std::vector<PgnError>& errors() const { return errors_; }
  std::size_t games_seen() const { return games_seen_; }

 private:
  struct RawGame {
    std::map<std::string, std::string> tags;
    std::string movetext;
    std::size_t first_line = 0;
    bool empty = true;
  };

  std::optional<RawGame> read_raw();
  bool getline(std::string& line);

  std::istream& in_;
  std::vector<PgnError> errors_;
  std::size_t games_seen_ = 0;
  std::size_t line_no_ = 0;
  std::optional<std::string> pending_;
};

std::vector<PgnGame> read_all_games(std::istream& in, std::vector<PgnError>* errors = nullptr);

/// PGN export text for one game (tags in the given map order after the seven-tag roster).
std::string write_pgn(const PgnGame& game);

}  // namespace deepchess
