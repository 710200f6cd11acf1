#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>

#include "deepchess/network.hpp"

namespace deepchess {

struct BenchConfig {
  std::size_t positions = 200;
  int search_depth = 3;
  std::size_t search_positions = 5;
  std::size_t cache_mb = 64;
  std::uint64_t seed = 1;
};

struct BenchReport {
  double compares_per_sec_cold = 0;
  double compares_per_sec_warm = 0;
  double sparse_first_layer_us = 0;
  double dense_first_layer_us = 0;
  double sparse_speedup = 0;
  std::uint64_t search_nodes = 0;
  double nodes_per_sec = 0;
  std::uint64_t warm_research_cache_hits = 0;
};

/// Throughput of the learned comparator: comparisons with a cold and a warm cache, sparse versus
/// dense first layer, and search speed at a fixed depth. Node counts depend only on the inputs.
BenchReport run_bench(const nn::SiameseNetwork<float>& net, const BenchConfig& cfg);

std::string format_bench(const BenchReport& r);

}  // namespace deepchess
