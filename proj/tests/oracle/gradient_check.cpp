#include "gradient_check.hpp"

#include <algorithm>
#include <functional>
#include <random>
#include <set>
#include <vector>

#include "deepchess/training.hpp"
#include "naive_nn.hpp"

namespace oracle {

namespace {

using deepchess::nn::Activation;
using deepchess::nn::DenseLayer;
using deepchess::nn::Matrix;
using Layers = std::vector<DenseLayer<double>>;
using Grads = deepchess::nn::StackGrad<double>;
using Selector = std::function<bool(std::size_t layer, int row, int col)>;

void randomize_bias(Layers& layers, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  for (auto& l : layers)
    for (int r = 0; r < l.out_dim(); ++r) l.bias(r) = u(rng);
}

void record(GradientReport& rep, double analytic, double numeric) {
  rep.max_relative_error = std::max(rep.max_relative_error, relative_error(analytic, numeric));
  ++rep.parameters_checked;
}

void probe(Layers& layers, const Grads& grads, const std::function<double()>& loss, const Selector& keep,
           GradientReport& rep) {
  for (std::size_t k = 0; k < layers.size(); ++k) {
    auto& l = layers[k];
    for (int r = 0; r < l.out_dim(); ++r) {
      for (int c = 0; c < l.in_dim(); ++c)
        if (keep(k, r, c)) record(rep, grads[k].weights(r, c), central_difference(l.weights(r, c), loss));
      record(rep, grads[k].bias(r), central_difference(l.bias(r), loss));
    }
  }
}

std::vector<std::uint16_t> random_active(std::mt19937_64& rng, std::size_t count) {
  std::set<std::uint16_t> s;
  std::uniform_int_distribution<int> pick(0, 772);
  while (s.size() < count) s.insert(static_cast<std::uint16_t>(pick(rng)));
  return {s.begin(), s.end()};
}

std::vector<double> dense_of(const std::vector<std::uint16_t>& active) {
  std::vector<double> x(773, 0.0);
  for (auto i : active) x[i] = 1.0;
  return x;
}

// First-layer weights: every active column plus a handful of inactive ones (whose gradient is zero).
Selector sparse_first_layer(const std::vector<std::vector<std::uint16_t>>& inputs, std::mt19937_64& rng) {
  std::set<int> cols;
  for (const auto& in : inputs) cols.insert(in.begin(), in.end());
  for (auto extra : random_active(rng, 5)) cols.insert(extra);
  return [cols](std::size_t layer, int, int c) { return layer != 0 || cols.contains(c); };
}

}  // namespace

GradientReport check_dense_stack(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> width(2, 6);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int in = width(rng), h1 = width(rng), h2 = width(rng), out = width(rng);
  const int batch = 1 + static_cast<int>(seed % 4);

  Layers layers{deepchess::nn::make_layer<double>(in, h1, Activation::Relu, rng),
                deepchess::nn::make_layer<double>(h1, h2, Activation::Relu, rng),
                deepchess::nn::make_layer<double>(h2, out, Activation::Linear, rng)};
  randomize_bias(layers, rng);
  Matrix<double> x(in, batch), target(out, batch);
  for (int c = 0; c < batch; ++c) {
    for (int r = 0; r < in; ++r) x(r, c) = u(rng);
    for (int r = 0; r < out; ++r) target(r, c) = u(rng);
  }

  deepchess::nn::Tape<double> tape;
  const deepchess::nn::BatchInput<double> input{&x, nullptr};
  const Matrix<double> y = deepchess::nn::forward_stack(layers, input, &tape);
  Grads grads = deepchess::nn::zero_grad(layers);
  Matrix<double> input_grad;
  deepchess::nn::backward_stack(layers, tape, deepchess::nn::mean_squared_error_grad(y, target), grads, &input_grad);

  const auto loss = [&] {
    double total = 0;
    for (int c = 0; c < batch; ++c) {
      std::vector<double> col(x.col(c).data(), x.col(c).data() + in);
      std::vector<double> t(target.col(c).data(), target.col(c).data() + out);
      total += squared_distance(run_stack(layers, col), t);
    }
    return total / batch;
  };

  GradientReport rep{"dense relu/linear stack", 0, 0};
  probe(layers, grads, loss, [](std::size_t, int, int) { return true; }, rep);
  for (int c = 0; c < batch; ++c)
    for (int r = 0; r < in; ++r) record(rep, input_grad(r, c), central_difference(x(r, c), loss));
  return rep;
}

GradientReport check_autoencoder(std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0xA5A5);
  std::uniform_int_distribution<int> width(2, 6);
  const int hidden = width(rng);
  const int batch = 1 + static_cast<int>(seed % 3);

  Layers stack{deepchess::nn::make_layer<double>(773, hidden, Activation::Relu, rng),
               deepchess::nn::make_layer<double>(hidden, 773, Activation::Linear, rng)};
  randomize_bias(stack, rng);
  std::vector<std::vector<std::uint16_t>> inputs;
  deepchess::nn::SparseBatch sparse;
  Matrix<double> target = Matrix<double>::Zero(773, batch);
  for (int c = 0; c < batch; ++c) {
    inputs.push_back(random_active(rng, 12));
    sparse.add(inputs.back());
    for (auto i : inputs.back()) target(i, c) = 1.0;
  }

  Grads grads = deepchess::nn::zero_grad(stack);
  deepchess::nn::autoencoder_loss(stack, deepchess::nn::BatchInput<double>{nullptr, &sparse}, target, &grads);

  const auto loss = [&] {
    double total = 0;
    for (const auto& in : inputs) total += squared_distance(run_stack(stack, dense_of(in)), dense_of(in));
    return total / static_cast<double>(inputs.size());
  };

  // Decoder rows are many and alike; sample a few beyond those touching the inputs.
  const Selector first = sparse_first_layer(inputs, rng);
  std::set<int> rows;
  for (const auto& in : inputs) rows.insert(in.begin(), in.begin() + 4);
  for (auto extra : random_active(rng, 8)) rows.insert(extra);
  const Selector keep = [&](std::size_t layer, int r, int c) {
    return layer == 0 ? first(layer, r, c) : rows.contains(r);
  };

  GradientReport rep{"autoencoder stage", 0, 0};
  probe(stack, grads, loss, keep, rep);
  return rep;
}

GradientReport check_siamese(std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x5A5A);
  std::uniform_int_distribution<int> width(2, 6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::vector<int> extractor{773, width(rng), width(rng)};
  const std::vector<int> head{width(rng), 2};
  const int pairs = 1 + static_cast<int>(seed % 3);

  auto net = deepchess::nn::make_siamese<double>(extractor, head, rng);
  randomize_bias(net.extractor.layers, rng);
  randomize_bias(net.head, rng);

  std::vector<std::vector<std::uint16_t>> inputs;
  for (int i = 0; i < 2 * pairs; ++i) inputs.push_back(random_active(rng, 10));
  deepchess::nn::SparseBatch sparse;
  for (const auto& in : inputs) sparse.add(in);  // firsts then seconds
  Matrix<double> targets(2, pairs);
  for (int c = 0; c < pairs; ++c) {
    targets(0, c) = u(rng);
    targets(1, c) = 1.0 - targets(0, c);
  }

  auto grads = deepchess::nn::zero_grad(net);
  deepchess::nn::siamese_loss(net, sparse, targets, &grads);

  const auto loss = [&] {
    double total = 0;
    for (int c = 0; c < pairs; ++c) {
      const auto p = siamese(net, dense_of(inputs[static_cast<std::size_t>(c)]),
                             dense_of(inputs[static_cast<std::size_t>(c + pairs)]));
      total += cross_entropy(p, {targets(0, c), targets(1, c)});
    }
    return total / pairs;
  };

  GradientReport rep{"tied siamese graph", 0, 0};
  probe(net.extractor.layers, grads.extractor, loss, sparse_first_layer(inputs, rng), rep);
  probe(net.head, grads.head, loss, [](std::size_t, int, int) { return true; }, rep);
  return rep;
}

}  // namespace oracle
