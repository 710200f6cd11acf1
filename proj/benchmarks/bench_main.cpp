#include <benchmark/benchmark.h>

#include <random>

#include "deepchess/comparator.hpp"
#include "deepchess/corpus.hpp"
#include "deepchess/encoding.hpp"
#include "deepchess/inference.hpp"
#include "deepchess/search.hpp"

using namespace deepchess;

namespace {

const Position kKiwipete = parse_fen("r3k2r/p1ppqpb1/bn2pnp1/3PN3/1p2P3/2N2Q1p/PPPBBPPP/R3K2R w KQkq - 0 1");

std::shared_ptr<const nn::SiameseNetwork<float>> teacher_net() {
  static const auto net = [] {
    std::mt19937_64 rng(1);
    return std::make_shared<const nn::SiameseNetwork<float>>(
        nn::make_siamese<float>(nn::kTeacherExtractorDims, nn::kTeacherHeadDims, rng));
  }();
  return net;
}

void BM_Perft(benchmark::State& state) {
  const int depth = static_cast<int>(state.range(0));
  std::uint64_t nodes = 0;
  for (auto _ : state) nodes += perft(kKiwipete, depth);
  state.counters["nodes/s"] = benchmark::Counter(static_cast<double>(nodes), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_Perft)->Arg(2)->Arg(3);

void BM_Encode(benchmark::State& state) {
  const auto positions = random_playout_positions(256, 1);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(encode(positions[i++ % positions.size()]));
}
BENCHMARK(BM_Encode);

void BM_FirstLayerSparse(benchmark::State& state) {
  const auto& layer = teacher_net()->extractor.layers.front();
  const auto active = encode(kKiwipete).active_indices();
  for (auto _ : state) benchmark::DoNotOptimize(sparse_affine(layer, active));
}
BENCHMARK(BM_FirstLayerSparse);

void BM_FirstLayerDense(benchmark::State& state) {
  const auto& layer = teacher_net()->extractor.layers.front();
  Eigen::VectorXf x = Eigen::VectorXf::Zero(773);
  for (auto i : encode(kKiwipete).active_indices()) x(i) = 1.0F;
  Eigen::VectorXf y;
  for (auto _ : state) {
    y.noalias() = layer.weights * x + layer.bias;
    benchmark::DoNotOptimize(y.data());
  }
}
BENCHMARK(BM_FirstLayerDense);

void BM_CompareCold(benchmark::State& state) {
  const auto net = teacher_net();
  const auto positions = random_playout_positions(256, 2);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(compare_white_perspective(*net, positions[i % 256], positions[(i + 1) % 256], nullptr));
    ++i;
  }
}
BENCHMARK(BM_CompareCold);

void BM_CompareWarm(benchmark::State& state) {
  const auto net = teacher_net();
  const auto positions = random_playout_positions(256, 2);
  FeatureCache cache(4096, net->extractor.output_dim());
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(compare_white_perspective(*net, positions[i % 256], positions[(i + 1) % 256], &cache));
    ++i;
  }
}
BENCHMARK(BM_CompareWarm);

void BM_SearchMaterial(benchmark::State& state) {
  SearchLimits limits;
  limits.max_depth = static_cast<int>(state.range(0));
  std::uint64_t nodes = 0;
  for (auto _ : state) {
    MaterialComparator cmp;
    nodes += search_root(kKiwipete, limits, cmp).nodes;
  }
  state.counters["nodes/s"] = benchmark::Counter(static_cast<double>(nodes), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_SearchMaterial)->Arg(3)->Arg(4);

void BM_SearchLearned(benchmark::State& state) {
  SearchLimits limits;
  limits.max_depth = 2;
  std::uint64_t nodes = 0;
  for (auto _ : state) {
    LearnedComparator cmp(teacher_net(), std::make_shared<FeatureCache>(1 << 14, 100));
    nodes += search_root(kKiwipete, limits, cmp).nodes;
  }
  state.counters["nodes/s"] = benchmark::Counter(static_cast<double>(nodes), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_SearchLearned);

}  // namespace
BENCHMARK_MAIN();
