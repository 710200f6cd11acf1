#include "deepchess/uci.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace deepchess {

namespace {

using std::chrono::milliseconds;

constexpr int kMaxUciDepth = 64;

std::vector<std::string> split(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> words;
  for (std::string w; in >> w;) words.push_back(w);
  return words;
}

std::optional<long long> parse_int(const std::string& s) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

class Session {
 public:
  Session(const EngineConfig& cfg, std::ostream& out) : cfg_(cfg), out_(out), engine_(std::make_unique<Engine>(cfg)) {}
  ~Session() { halt(); }

  /// Waits for a bounded search to finish; an infinite one is stopped.
  void finish() {
    if (infinite_) stop_ = true;
    if (worker_.joinable()) worker_.join();
    stop_ = false;
  }

  bool handle(const std::string& line) {
    const auto words = split(line);
    if (words.empty()) return true;
    const std::string& cmd = words[0];
    if (cmd == "quit") return false;
    if (cmd == "uci") {
      say("id name deepchess");
      say("id author deepchess developers");
      say("option name Hash type spin default " + std::to_string(cfg_.cache_mb) + " min 0 max 4096");
      say("option name Depth type spin default " + std::to_string(cfg_.max_depth) + " min 1 max " +
          std::to_string(kMaxUciDepth));
      say("uciok");
    } else if (cmd == "isready") {
      say("readyok");
    } else if (cmd == "ucinewgame") {
      finish();
      position_ = Position::startpos();
      engine_->new_game(cfg_.seed);
    } else if (cmd == "position") {
      finish();
      set_position(words);
    } else if (cmd == "go") {
      finish();
      go(words);
    } else if (cmd == "stop") {
      halt();
    } else if (cmd == "setoption") {
      finish();
      set_option(words);
    } else if (cmd == "debug" || cmd == "register" || cmd == "ponderhit") {
      // accepted and ignored
    } else {
      info("unknown command: " + cmd.substr(0, 64));
    }
    return true;
  }

  void halt() {
    stop_ = true;
    if (worker_.joinable()) worker_.join();
    stop_ = false;
  }

 private:
  void say(const std::string& text) {
    std::lock_guard lock(out_mu_);
    out_ << text << '\n' << std::flush;
  }
  void info(const std::string& text) { say("info string " + text); }

  void set_position(const std::vector<std::string>& words) {
    std::size_t i = 1;
    try {
      Position p = Position::startpos();
      if (i < words.size() && words[i] == "startpos") {
        ++i;
      } else if (i < words.size() && words[i] == "fen") {
        std::string fen;
        for (++i; i < words.size() && words[i] != "moves"; ++i) fen += (fen.empty() ? "" : " ") + words[i];
        p = parse_fen(fen);
      } else {
        info("position: expected 'startpos' or 'fen'");
        return;
      }
      if (i < words.size() && words[i] == "moves") {
        for (++i; i < words.size(); ++i) {
          const auto m = parse_uci_move(p, words[i]);
          if (!m) {
            info("position: illegal move " + words[i].substr(0, 16));
            return;
          }
          p = p.play_unchecked(*m);
        }
      } else if (i < words.size()) {
        info("position: unexpected token " + words[i].substr(0, 16));
        return;
      }
      position_ = p;
    } catch (const std::exception& e) {
      info(std::string("position: ") + e.what());
    }
  }

  void set_option(const std::vector<std::string>& words) {
    std::string name;
    std::string value;
    std::string* target = nullptr;
    for (std::size_t i = 1; i < words.size(); ++i) {
      if (words[i] == "name") target = &name;
      else if (words[i] == "value") target = &value;
      else if (target) *target += (target->empty() ? "" : " ") + words[i];
    }
    const auto number = parse_int(value);
    if (name == "Hash" && number && *number >= 0 && *number <= 4096) {
      cfg_.cache_mb = static_cast<std::size_t>(*number);
      rebuild();
    } else if (name == "Depth" && number && *number >= 1 && *number <= kMaxUciDepth) {
      cfg_.max_depth = static_cast<int>(*number);
      rebuild();
    } else {
      info("setoption: unsupported option or value");
    }
  }

  void rebuild() {
    try {
      engine_ = std::make_unique<Engine>(cfg_);
    } catch (const std::exception& e) {
      info(std::string("setoption failed: ") + e.what());
    }
  }

  void go(const std::vector<std::string>& words) {
    SearchLimits limits;
    limits.max_depth = cfg_.max_depth;
    std::optional<long long> depth, wtime, btime, movetime;
    infinite_ = false;
    for (std::size_t i = 1; i < words.size(); ++i) {
      const std::string& w = words[i];
      if (w == "infinite") {
        infinite_ = true;
        continue;
      }
      if (w == "ponder") continue;
      std::optional<long long> v = i + 1 < words.size() ? parse_int(words[i + 1]) : std::nullopt;
      if (!v || *v < 0) {
        info("go: bad or missing value for " + w.substr(0, 16));
        continue;
      }
      ++i;
      if (w == "depth") depth = v;
      else if (w == "movetime") movetime = v;
      else if (w == "wtime") wtime = v;
      else if (w == "btime") btime = v;
      else if (w == "nodes") limits.node_cap = static_cast<std::uint64_t>(*v);
      else if (w == "winc" || w == "binc" || w == "movestogo" || w == "mate") {
      } else info("go: unknown parameter " + w.substr(0, 16));
    }
    const auto remaining = position_.side_to_move() == Color::White ? wtime : btime;
    if (movetime) {
      const auto budget = milliseconds(std::max<long long>(1, *movetime - 10));
      limits.max_depth = kMaxUciDepth;
      limits.soft_time = budget;
      limits.hard_time = budget;
    } else if (remaining) {
      limits = SearchLimits::for_clock(milliseconds(*remaining), kMaxUciDepth);
    } else if (infinite_) {
      limits.max_depth = kMaxUciDepth;
    }
    if (depth) limits.max_depth = static_cast<int>(std::clamp<long long>(*depth, 1, kMaxUciDepth));
    limits.stop = &stop_;

    const Position root = position_;
    worker_ = std::thread([this, root, limits] { run_search(root, limits); });
  }

  void run_search(const Position& root, const SearchLimits& limits) {
    const MoveList moves = legal_moves(root);
    if (moves.empty()) {
      info("no legal moves");
      say("bestmove 0000");
      return;
    }
    try {
      const SearchResult r = engine_->think(root, limits);
      std::string pv;
      for (const Move& m : r.line) pv += " " + to_uci(m);
      say("info depth " + std::to_string(r.depth_reached) + " nodes " + std::to_string(r.nodes) + " pv" + pv);
      say("bestmove " + to_uci(r.best_move));
    } catch (const std::exception& e) {
      info(std::string("search failed: ") + e.what());
      say("bestmove " + to_uci(moves[0]));
    }
  }

  EngineConfig cfg_;
  std::ostream& out_;
  std::mutex out_mu_;
  std::unique_ptr<Engine> engine_;
  Position position_ = Position::startpos();
  std::atomic<bool> stop_{false};
  bool infinite_ = false;
  std::thread worker_;
};

}  // namespace

void uci_loop(const EngineConfig& cfg, std::istream& in, std::ostream& out) {
  Session session(cfg, out);
  for (std::string line; std::getline(in, line);) {
    if (!session.handle(line)) break;
  }
  session.finish();
}

}  // namespace deepchess
