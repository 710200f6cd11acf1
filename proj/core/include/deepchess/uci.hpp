#pragma once

#include <istream>
#include <ostream>

#include "deepchess/match.hpp"

namespace deepchess {

/// Runs the UCI protocol until `quit` or end of input; either lets a bounded search finish and stops an
/// infinite one. Searches run on a worker thread so `stop` and `isready` stay responsive. Malformed
/// commands are answered with `info string` lines.
/// Throws when the engine itself cannot be constructed (for example an unreadable model).
void uci_loop(const EngineConfig& cfg, std::istream& in, std::ostream& out);

}  // namespace deepchess
