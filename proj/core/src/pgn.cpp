#include "deepchess/pgn.hpp"

#include <array>
#include <cctype>
#include <sstream>

namespace deepchess {

namespace {

bool is_blank(const std::string& line) {
  for (char c : line)
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  return true;
}

std::string_view trim_left(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  return s;
}

bool is_tag_line(const std::string& line) { return trim_left(line).starts_with("["); }

bool parse_tag(std::string_view line, std::string& name, std::string& value) {
  line = trim_left(line);
  if (!line.starts_with("[")) return false;
  std::size_t i = 1;
  while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])) && line[i] != '"') name += line[i++];
  const auto q1 = line.find('"', i);
  if (name.empty() || q1 == std::string_view::npos) return false;
  std::size_t j = q1 + 1;
  for (; j < line.size() && line[j] != '"'; ++j) {
    if (line[j] == '\\' && j + 1 < line.size()) ++j;
    value += line[j];
  }
  return j < line.size() && line.find(']', j) != std::string_view::npos;
}

bool is_result_token(std::string_view tok) {
  return tok == "1-0" || tok == "0-1" || tok == "1/2-1/2" || tok == "*";
}

// Splits movetext into SAN tokens, dropping comments, variations, NAGs and move numbers.
std::vector<std::string> movetext_tokens(const std::string& text, std::string& result, std::string& error) {
  std::vector<std::string> out;
  int variation_depth = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '{') {
      const auto end = text.find('}', i);
      if (end == std::string::npos) {
        error = "unterminated comment";
        return out;
      }
      i = end + 1;
    } else if (c == ';') {
      const auto end = text.find('\n', i);
      i = end == std::string::npos ? text.size() : end + 1;
    } else if (c == '(') {
      ++variation_depth;
      ++i;
    } else if (c == ')') {
      if (variation_depth == 0) {
        error = "unbalanced ')'";
        return out;
      }
      --variation_depth;
      ++i;
    } else {
      std::size_t j = i;
      while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j])) && text[j] != '{' &&
             text[j] != '(' && text[j] != ')' && text[j] != ';')
        ++j;
      std::string tok = text.substr(i, j - i);
      i = j;
      if (variation_depth > 0 || tok.empty() || tok[0] == '$') continue;
      if (is_result_token(tok)) {
        result = tok;
        continue;
      }
      // Strip a leading move number such as "12." or "12...".
      std::size_t k = 0;
      while (k < tok.size() && std::isdigit(static_cast<unsigned char>(tok[k]))) ++k;
      if (k > 0 && k < tok.size() && tok[k] == '.') {
        while (k < tok.size() && tok[k] == '.') ++k;
        tok = tok.substr(k);
      } else if (k == tok.size()) {
        continue;
      }
      if (tok.empty()) continue;
      if (tok == "--") {
        error = "null move";
        return out;
      }
      out.push_back(std::move(tok));
    }
  }
  if (variation_depth != 0) error = "unterminated variation";
  return out;
}

}  // namespace

GameOutcome outcome_from_token(std::string_view token) {
  if (token == "1-0") return GameOutcome::WhiteWins;
  if (token == "0-1") return GameOutcome::BlackWins;
  if (token == "1/2-1/2") return GameOutcome::Draw;
  return GameOutcome::Unknown;
}

bool PgnReader::getline(std::string& line) {
  if (pending_) {
    line = std::move(*pending_);
    pending_.reset();
    return true;
  }
  if (!std::getline(in_, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  ++line_no_;
  return true;
}

std::optional<PgnReader::RawGame> PgnReader::read_raw() {
  RawGame raw;
  std::string line;
  bool in_movetext = false;
  while (getline(line)) {
    if (is_blank(line)) continue;
    if (line[0] == '%') continue;  // escape mechanism
    if (is_tag_line(line) && !in_movetext) {
      std::string name, value;
      if (raw.empty) raw.first_line = line_no_;
      raw.empty = false;
      if (parse_tag(line, name, value)) raw.tags[name] = value;
      continue;
    }
    if (is_tag_line(line) && in_movetext) {
      pending_ = line;
      return raw;
    }
    if (raw.empty) raw.first_line = line_no_;
    raw.empty = false;
    in_movetext = true;
    raw.movetext += line;
    raw.movetext += '\n';
    // A result token terminates the game.
    std::istringstream words(line);
    std::string last;
    for (std::string w; words >> w;) last = w;
    if (is_result_token(last) && line.find('{') == std::string::npos) return raw;
  }
  if (raw.empty) return std::nullopt;
  return raw;
}

std::optional<PgnGame> PgnReader::next() {
  while (auto raw = read_raw()) {
    PgnGame game;
    game.index = games_seen_++;
    game.tags = std::move(raw->tags);
    auto fail = [&](const std::string& msg) { errors_.push_back(PgnError{game.index, raw->first_line, msg}); };

    try {
      if (const auto it = game.tags.find("FEN"); it != game.tags.end()) game.start = parse_fen(it->second);
    } catch (const ChessError& e) {
      fail(std::string("bad FEN tag: ") + e.what());
      continue;
    }

    std::string result_token, error;
    const auto tokens = movetext_tokens(raw->movetext, result_token, error);
    if (!error.empty()) {
      fail(error);
      continue;
    }

    try {
      Position pos = game.start;
      for (const auto& tok : tokens) {
        const Move m = parse_san(pos, tok);
        game.moves.push_back(m);
        pos = pos.play_unchecked(m);
      }
    } catch (const ChessError& e) {
      fail(e.what());
      continue;
    }

    const auto tag = game.tags.find("Result");
    game.outcome = outcome_from_token(tag != game.tags.end() ? tag->second : result_token);
    if (game.outcome == GameOutcome::Unknown) game.outcome = outcome_from_token(result_token);
    return game;
  }
  return std::nullopt;
}

std::vector<PgnGame> read_all_games(std::istream& in, std::vector<PgnError>* errors) {
  PgnReader reader(in);
  std::vector<PgnGame> games;
  while (auto g = reader.next()) games.push_back(std::move(*g));
  if (errors) *errors = reader.errors();
  return games;
}

std::string write_pgn(const PgnGame& game) {
  static constexpr std::array<const char*, 7> kRoster = {"Event", "Site", "Date", "Round", "White", "Black", "Result"};
  std::ostringstream out;
  for (const char* name : kRoster) {
    std::string value = name == std::string_view("Result") ? std::string(outcome_token(game.outcome)) : "?";
    if (const auto it = game.tags.find(name); it != game.tags.end() && name != std::string_view("Result"))
      value = it->second;
    out << '[' << name << " \"" << value << "\"]\n";
  }
  for (const auto& [name, value] : game.tags) {
    bool roster = false;
    for (const char* r : kRoster) roster = roster || name == r;
    if (!roster) out << '[' << name << " \"" << value << "\"]\n";
  }
  out << '\n';

  std::string line;
  auto emit = [&](const std::string& word) {
    if (!line.empty() && line.size() + 1 + word.size() > 79) {
      out << line << '\n';
      line.clear();
    }
    if (!line.empty()) line += ' ';
    line += word;
  };

  Position pos = game.start;
  bool first = true;
  for (const Move& m : game.moves) {
    if (pos.side_to_move() == Color::White) emit(std::to_string(pos.fullmove_number()) + ".");
    else if (first) emit(std::to_string(pos.fullmove_number()) + "...");
    emit(to_san(pos, m));
    pos = pos.play_unchecked(m);
    first = false;
  }
  emit(std::string(outcome_token(game.outcome)));
  out << line << "\n\n";
  return out.str();
}

}  // namespace deepchess
