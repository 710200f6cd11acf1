#include "deepchess/bench.hpp"

#include <chrono>
#include <sstream>

#include "deepchess/comparator.hpp"
#include "deepchess/corpus.hpp"
#include "deepchess/search.hpp"

namespace deepchess {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

}  // namespace

BenchReport run_bench(const nn::SiameseNetwork<float>& net, const BenchConfig& cfg) {
  net.validate();
  BenchReport r;
  const auto positions = random_playout_positions(std::max<std::size_t>(cfg.positions, 2), cfg.seed);
  const int dim = net.extractor.output_dim();
  auto shared = std::make_shared<const nn::SiameseNetwork<float>>(net);
  auto cache = std::make_shared<FeatureCache>(FeatureCache::entries_for_megabytes(cfg.cache_mb, dim), dim);
  LearnedComparator cmp(shared, cache);

  volatile int sink = 0;
  auto run_compares = [&] {
    const auto t0 = Clock::now();
    for (std::size_t i = 0; i + 1 < positions.size(); ++i)
      sink = sink + static_cast<int>(cmp.compare(positions[i], positions[i + 1]));
    return static_cast<double>(positions.size() - 1) / seconds_since(t0);
  };
  r.compares_per_sec_cold = run_compares();
  r.compares_per_sec_warm = run_compares();

  const auto& first = net.extractor.layers.front();
  std::vector<BitVector773> inputs;
  for (const auto& p : positions) inputs.push_back(encode(p));
  {
    const auto t0 = Clock::now();
    float acc = 0;
    for (const auto& v : inputs) acc += sparse_affine(first, v.active_indices())(0);
    r.sparse_first_layer_us = seconds_since(t0) * 1e6 / static_cast<double>(inputs.size());
    sink = sink + static_cast<int>(acc);
  }
  {
    Features dense_in(BitVector773::kSize);
    const auto t0 = Clock::now();
    float acc = 0;
    for (const auto& v : inputs) {
      for (std::size_t i = 0; i < BitVector773::kSize; ++i) dense_in(static_cast<Eigen::Index>(i)) = v.test(i) ? 1.0F : 0.0F;
      const Features out = first.weights * dense_in + first.bias;
      acc += out(0);
    }
    r.dense_first_layer_us = seconds_since(t0) * 1e6 / static_cast<double>(inputs.size());
    sink = sink + static_cast<int>(acc);
  }
  r.sparse_speedup = r.sparse_first_layer_us > 0 ? r.dense_first_layer_us / r.sparse_first_layer_us : 0;

  cache->clear();
  SearchLimits limits;
  limits.max_depth = cfg.search_depth;
  const std::size_t n = std::min(cfg.search_positions, positions.size());
  const auto t0 = Clock::now();
  for (std::size_t i = 0; i < n; ++i) {
    if (legal_moves(positions[i]).empty()) continue;
    r.search_nodes += search_root(positions[i], limits, cmp).nodes;
  }
  r.nodes_per_sec = static_cast<double>(r.search_nodes) / seconds_since(t0);
  for (std::size_t i = 0; i < n; ++i) {
    if (legal_moves(positions[i]).empty()) continue;
    r.warm_research_cache_hits += search_root(positions[i], limits, cmp).cache_hits;
  }
  return r;
}

std::string format_bench(const BenchReport& r) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(1);
  out << "compares/s (cold cache)   " << r.compares_per_sec_cold << '\n'
      << "compares/s (warm cache)   " << r.compares_per_sec_warm << '\n'
      << "first layer sparse (us)   " << r.sparse_first_layer_us << '\n'
      << "first layer dense (us)    " << r.dense_first_layer_us << '\n'
      << "sparse speedup            " << r.sparse_speedup << "x\n"
      << "search nodes              " << r.search_nodes << '\n'
      << "nodes/s                   " << r.nodes_per_sec << '\n'
      << "warm re-search cache hits " << r.warm_research_cache_hits << '\n';
  return out.str();
}

}  // namespace deepchess
