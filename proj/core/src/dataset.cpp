#include "deepchess/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace deepchess {

namespace {

template <typename T>
void put_le(std::ostream& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.put(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF));
}

template <typename T>
T get_le(const std::uint8_t* bytes) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return static_cast<T>(v);
}

std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

}  // namespace

std::vector<std::uint16_t> eligible_plies(const PgnGame& game, const ExtractConfig& cfg) {
  std::vector<std::uint16_t> plies;
  Position pos = game.start;
  for (std::size_t ply = 0; ply < game.moves.size(); ++ply) {
    const Move played = pos.annotate(game.moves[ply]);
    const bool past_opening = cfg.exclusion == OpeningExclusion::FullMoves
                                  ? pos.fullmove_number() > cfg.opening_moves
                                  : ply >= static_cast<std::size_t>(cfg.opening_moves);
    if (past_opening && !played.is_capture()) plies.push_back(static_cast<std::uint16_t>(ply));
    pos = pos.play_unchecked(played);
  }
  return plies;
}

std::vector<LabeledPosition> extract_positions(const PgnGame& game, Rng& rng, const ExtractConfig& cfg) {
  if (game.outcome != GameOutcome::WhiteWins && game.outcome != GameOutcome::BlackWins)
    throw std::invalid_argument("extract_positions requires a decisive game");
  const Label label = game.outcome == GameOutcome::WhiteWins ? Label::W : Label::L;

  std::vector<std::uint16_t> plies = eligible_plies(game, cfg);
  if (plies.size() > cfg.per_game) {
    // Partial Fisher-Yates: the first per_game entries become a uniform sample.
    for (std::size_t i = 0; i < cfg.per_game; ++i) std::swap(plies[i], plies[i + uniform_index(rng, plies.size() - i)]);
    plies.resize(cfg.per_game);
  }
  std::sort(plies.begin(), plies.end());

  std::vector<LabeledPosition> out;
  out.reserve(plies.size());
  Position pos = game.start;
  std::size_t next = 0;
  for (std::size_t ply = 0; ply < game.moves.size() && next < plies.size(); ++ply) {
    if (ply == plies[next]) {
      out.push_back(LabeledPosition{encode(pos), label, static_cast<std::uint32_t>(game.index),
                                    static_cast<std::uint16_t>(ply)});
      ++next;
    }
    pos = pos.play_unchecked(game.moves[ply]);
  }
  return out;
}

std::vector<LabeledPosition> extract_corpus(std::istream& pgn, std::uint64_t seed, const ExtractConfig& cfg,
                                            ExtractStats* stats) {
  PgnReader reader(pgn);
  Rng rng(seed);
  ExtractStats s;
  std::vector<LabeledPosition> out;
  while (auto game = reader.next()) {
    ++s.games;
    switch (game->outcome) {
      case GameOutcome::WhiteWins: ++s.white_wins; break;
      case GameOutcome::BlackWins: ++s.black_wins; break;
      case GameOutcome::Draw: ++s.draws_discarded; continue;
      case GameOutcome::Unknown: ++s.unknown_discarded; continue;
    }
    auto positions = extract_positions(*game, rng, cfg);
    out.insert(out.end(), positions.begin(), positions.end());
  }
  s.malformed = reader.errors().size();
  s.positions = out.size();
  if (stats) *stats = s;
  return out;
}

SplitDataset split(std::vector<LabeledPosition> positions, std::size_t val_per_class, std::uint64_t seed) {
  SplitDataset ds;
  ds.seed = seed;
  std::vector<LabeledPosition> w, l;
  for (auto& p : positions) (p.label == Label::W ? w : l).push_back(std::move(p));
  if (w.size() <= val_per_class || l.size() <= val_per_class) throw InsufficientData(w.size(), l.size(), val_per_class);

  Rng rng(seed);
  auto carve = [&](std::vector<LabeledPosition>& pool, std::vector<LabeledPosition>& train,
                   std::vector<LabeledPosition>& val) {
    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = 0; i < val_per_class; ++i) std::swap(order[i], order[i + uniform_index(rng, order.size() - i)]);
    std::vector<bool> held(pool.size(), false);
    for (std::size_t i = 0; i < val_per_class; ++i) {
      held[order[i]] = true;
      val.push_back(pool[order[i]]);
    }
    for (std::size_t i = 0; i < pool.size(); ++i)
      if (!held[i]) train.push_back(std::move(pool[i]));
  };
  carve(w, ds.train_w, ds.val_w);
  carve(l, ds.train_l, ds.val_l);
  return ds;
}

PairSampler::PairSampler(const std::vector<LabeledPosition>& w, const std::vector<LabeledPosition>& l, Rng& rng)
    : w_(w), l_(l), rng_(rng) {
  if (w_.empty() || l_.empty()) throw InsufficientData(w_.size(), l_.size(), 0);
}

PairSample PairSampler::next() {
  const auto& win = w_[uniform_index(rng_, w_.size())].vector;
  const auto& loss = l_[uniform_index(rng_, l_.size())].vector;
  const bool win_first = std::bernoulli_distribution(0.5)(rng_);
  return win_first ? PairSample{win, loss, true} : PairSample{loss, win, false};
}

std::vector<PairSample> sample_pairs(const SplitDataset& ds, std::size_t n, Rng& rng) {
  PairSampler sampler(ds.train_w, ds.train_l, rng);
  std::vector<PairSample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(sampler.next());
  return out;
}

std::vector<PairSample> validation_pairs(const SplitDataset& ds, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  PairSampler sampler(ds.val_w, ds.val_l, rng);
  std::vector<PairSample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(sampler.next());
  return out;
}

void write_dataset(const std::filesystem::path& path, const std::vector<LabeledPosition>& positions) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DatasetFormatError("cannot open " + path.string() + " for writing");
  out.write("DCDS", 4);
  put_le<std::uint16_t>(out, kDatasetVersion);
  for (const auto& p : positions) {
    const auto bytes = p.vector.pack();
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.put(static_cast<char>(p.label));
    put_le<std::uint32_t>(out, p.game_id);
    put_le<std::uint16_t>(out, p.ply);
  }
  if (!out) throw DatasetFormatError("write failed for " + path.string());
}

std::vector<LabeledPosition> read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetFormatError("cannot open " + path.string());
  std::array<std::uint8_t, 6> header{};
  in.read(reinterpret_cast<char*>(header.data()), header.size());
  if (in.gcount() != 6 || header[0] != 'D' || header[1] != 'C' || header[2] != 'D' || header[3] != 'S')
    throw DatasetFormatError("bad magic in " + path.string());
  if (get_le<std::uint16_t>(header.data() + 4) != kDatasetVersion)
    throw DatasetFormatError("unsupported dataset version in " + path.string());

  std::vector<LabeledPosition> out;
  std::array<std::uint8_t, kDatasetRecordBytes> rec{};
  while (true) {
    in.read(reinterpret_cast<char*>(rec.data()), rec.size());
    const auto got = static_cast<std::size_t>(in.gcount());
    if (got == 0) break;
    if (got != rec.size()) throw DatasetFormatError("truncated record in " + path.string());
    LabeledPosition p;
    p.vector = BitVector773::unpack(std::span<const std::uint8_t, BitVector773::kPackedBytes>(rec.data(), BitVector773::kPackedBytes));
    const std::uint8_t label = rec[BitVector773::kPackedBytes];
    if (label > 1) throw DatasetFormatError("bad label byte in " + path.string());
    p.label = static_cast<Label>(label);
    p.game_id = get_le<std::uint32_t>(rec.data() + BitVector773::kPackedBytes + 1);
    p.ply = get_le<std::uint16_t>(rec.data() + BitVector773::kPackedBytes + 5);
    out.push_back(p);
  }
  return out;
}

}  // namespace deepchess
