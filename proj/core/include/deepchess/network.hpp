#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "deepchess/encoding.hpp"

namespace deepchess::nn {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

enum class Activation : std::uint8_t { Relu = 0, Linear = 1, Softmax2 = 2 };

template <typename Scalar>
struct DenseLayer {
  Matrix<Scalar> weights;  // out_dim x in_dim
  Vector<Scalar> bias;
  Activation activation = Activation::Relu;

  int in_dim() const { return static_cast<int>(weights.cols()); }
  int out_dim() const { return static_cast<int>(weights.rows()); }

  template <typename Other>
  DenseLayer<Other> cast() const {
    return DenseLayer<Other>{weights.template cast<Other>(), bias.template cast<Other>(), activation};
  }
};

/// Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero bias.
template <typename Scalar>
DenseLayer<Scalar> make_layer(int in_dim, int out_dim, Activation act, std::mt19937_64& rng);

/// Column-major sparse 0/1 batch: column c has active rows indices[offsets[c] .. offsets[c+1]).
struct SparseBatch {
  std::vector<std::uint16_t> indices;
  std::vector<std::size_t> offsets{0};

  std::size_t cols() const { return offsets.size() - 1; }
  std::span<const std::uint16_t> column(std::size_t c) const {
    return {indices.data() + offsets[c], offsets[c + 1] - offsets[c]};
  }
  void add(const BitVector773& v);
  void add(std::span<const std::uint16_t> active);
  void clear() {
    indices.clear();
    offsets.assign(1, 0);
  }
};

/// Input to the first layer of a stack: exactly one of the two is set.
template <typename Scalar>
struct BatchInput {
  const Matrix<Scalar>* dense = nullptr;
  const SparseBatch* sparse = nullptr;

  std::size_t cols() const { return dense ? static_cast<std::size_t>(dense->cols()) : sparse->cols(); }
};

/// Activations recorded during a forward pass, consumed by backward.
template <typename Scalar>
struct Tape {
  BatchInput<Scalar> input;
  std::vector<Matrix<Scalar>> outputs;  // post-activation, one per layer
  Matrix<Scalar> logits;                // pre-activation of a final softmax layer
};

template <typename Scalar>
struct LayerGrad {
  Matrix<Scalar> weights;
  Vector<Scalar> bias;
};

template <typename Scalar>
using StackGrad = std::vector<LayerGrad<Scalar>>;

template <typename Scalar>
StackGrad<Scalar> zero_grad(const std::vector<DenseLayer<Scalar>>& layers);

template <typename Scalar>
void set_zero(StackGrad<Scalar>& g);

/// Sparse first-layer product: bias plus the weight columns of the active inputs.
template <typename Scalar>
void sparse_affine_into(const DenseLayer<Scalar>& layer, const SparseBatch& batch, Matrix<Scalar>& out);

template <typename Scalar>
void apply_activation(Activation act, Matrix<Scalar>& z);

template <typename Scalar>
Matrix<Scalar> forward_stack(const std::vector<DenseLayer<Scalar>>& layers, BatchInput<Scalar> input,
                             Tape<Scalar>* tape = nullptr);

/// Accumulates parameter gradients given dL/dZ of the last layer's pre-activation. When
/// `input_grad` is non-null and the input is dense, receives dL/d(input).
template <typename Scalar>
void backward_stack_from_logits(const std::vector<DenseLayer<Scalar>>& layers, const Tape<Scalar>& tape,
                                Matrix<Scalar> dz_last, StackGrad<Scalar>& grads,
                                Matrix<Scalar>* input_grad = nullptr);

/// Same as above, starting from dL/dA of the last layer's output.
template <typename Scalar>
void backward_stack(const std::vector<DenseLayer<Scalar>>& layers, const Tape<Scalar>& tape,
                    const Matrix<Scalar>& da_last, StackGrad<Scalar>& grads, Matrix<Scalar>* input_grad = nullptr);

template <typename Scalar>
void sgd_step(std::vector<DenseLayer<Scalar>>& layers, const StackGrad<Scalar>& grads, Scalar lr);

class NetworkShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Pos2Vec stack mapping the 773-bit input to a feature vector; every layer ReLU.
template <typename Scalar>
struct FeatureExtractor {
  std::vector<DenseLayer<Scalar>> layers;

  int input_dim() const { return layers.front().in_dim(); }
  int output_dim() const { return layers.back().out_dim(); }
  void validate() const;
};

/// Two weight-tied extractor branches feeding a comparison head that ends in a 2-way softmax.
/// Output component 0 is P(first input is the position from the won game).
template <typename Scalar>
struct SiameseNetwork {
  FeatureExtractor<Scalar> extractor;  // single parameter set serving both branches
  std::vector<DenseLayer<Scalar>> head;

  void validate() const;

  template <typename Other>
  SiameseNetwork<Other> cast() const {
    SiameseNetwork<Other> out;
    for (const auto& l : extractor.layers) out.extractor.layers.push_back(l.template cast<Other>());
    for (const auto& l : head) out.head.push_back(l.template cast<Other>());
    return out;
  }
};

/// Full-size teacher dimensions.
inline const std::vector<int> kTeacherExtractorDims{773, 600, 400, 200, 100};
inline const std::vector<int> kTeacherHeadDims{400, 200, 100, 2};
/// Distilled student dimensions.
inline const std::vector<int> kStudentExtractorDims{773, 100, 100, 100};
inline const std::vector<int> kStudentHeadDims{100, 100, 2};

template <typename Scalar>
FeatureExtractor<Scalar> make_extractor(const std::vector<int>& dims, std::mt19937_64& rng);

/// `head_dims` lists the head layer widths; the first head layer takes 2 x feature_dim inputs.
template <typename Scalar>
std::vector<DenseLayer<Scalar>> make_head(int feature_dim, const std::vector<int>& head_dims, std::mt19937_64& rng);

template <typename Scalar>
SiameseNetwork<Scalar> make_siamese(const std::vector<int>& extractor_dims, const std::vector<int>& head_dims,
                                    std::mt19937_64& rng);

template <typename Scalar>
struct SiameseTape {
  Tape<Scalar> extractor;
  Tape<Scalar> head;
  Matrix<Scalar> head_input;
  std::size_t batch = 0;
};

template <typename Scalar>
struct SiameseGrad {
  StackGrad<Scalar> extractor;
  StackGrad<Scalar> head;
};

template <typename Scalar>
SiameseGrad<Scalar> zero_grad(const SiameseNetwork<Scalar>& net);

/// `inputs` holds 2B columns: the B first positions followed by the B second positions.
/// Returns the 2 x B probability matrix.
template <typename Scalar>
Matrix<Scalar> siamese_forward(const SiameseNetwork<Scalar>& net, const SparseBatch& inputs,
                               SiameseTape<Scalar>* tape = nullptr);

/// Backpropagates dL/dZ of the final softmax pre-activation through head and both branches;
/// the shared extractor receives the sum of both branches' contributions.
template <typename Scalar>
void siamese_backward(const SiameseNetwork<Scalar>& net, const SiameseTape<Scalar>& tape,
                      const Matrix<Scalar>& dz_last, SiameseGrad<Scalar>& grads);

/// Probability pair for a single (a, b) input.
template <typename Scalar>
std::array<Scalar, 2> forward(const SiameseNetwork<Scalar>& net, const BitVector773& a, const BitVector773& b);

}  // namespace deepchess::nn
