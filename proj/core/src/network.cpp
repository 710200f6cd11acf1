#include "deepchess/network.hpp"

#include <cmath>
#include <string>

namespace deepchess::nn {

namespace {

template <typename Scalar>
Matrix<Scalar> activation_backward(Activation act, const Matrix<Scalar>& a, const Matrix<Scalar>& da) {
  switch (act) {
    case Activation::Relu: return (a.array() > Scalar(0)).select(da, Scalar(0));
    case Activation::Linear: return da;
    case Activation::Softmax2: {
      // dz_k = a_k * (da_k - sum_j da_j a_j)
      const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> dot = (da.array() * a.array()).colwise().sum();
      return (a.array() * (da.array().rowwise() - dot.array())).matrix();
    }
  }
  return da;
}

void check_dims(const std::vector<int>& dims, const char* what) {
  if (dims.size() < 2) throw NetworkShapeError(std::string(what) + " needs at least two dimensions");
  for (int d : dims)
    if (d <= 0) throw NetworkShapeError(std::string(what) + " dimensions must be positive");
}

}  // namespace

void SparseBatch::add(const BitVector773& v) {
  std::array<std::uint16_t, BitVector773::kSize> buf{};
  const std::size_t n = v.active_indices(buf);
  indices.insert(indices.end(), buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(n));
  offsets.push_back(indices.size());
}

void SparseBatch::add(std::span<const std::uint16_t> active) {
  indices.insert(indices.end(), active.begin(), active.end());
  offsets.push_back(indices.size());
}

template <typename Scalar>
DenseLayer<Scalar> make_layer(int in_dim, int out_dim, Activation act, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / (in_dim + out_dim));
  std::uniform_real_distribution<double> dist(-limit, limit);
  DenseLayer<Scalar> layer{Matrix<Scalar>(out_dim, in_dim), Vector<Scalar>::Zero(out_dim), act};
  // Row-major fill order so the draw sequence is independent of the storage layout.
  for (int r = 0; r < out_dim; ++r)
    for (int c = 0; c < in_dim; ++c) layer.weights(r, c) = static_cast<Scalar>(dist(rng));
  return layer;
}

template <typename Scalar>
StackGrad<Scalar> zero_grad(const std::vector<DenseLayer<Scalar>>& layers) {
  StackGrad<Scalar> g;
  g.reserve(layers.size());
  for (const auto& l : layers)
    g.push_back({Matrix<Scalar>::Zero(l.out_dim(), l.in_dim()), Vector<Scalar>::Zero(l.out_dim())});
  return g;
}

template <typename Scalar>
void set_zero(StackGrad<Scalar>& g) {
  for (auto& l : g) {
    l.weights.setZero();
    l.bias.setZero();
  }
}

template <typename Scalar>
void sparse_affine_into(const DenseLayer<Scalar>& layer, const SparseBatch& batch, Matrix<Scalar>& out) {
  const auto cols = static_cast<Eigen::Index>(batch.cols());
  out.resize(layer.out_dim(), cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    auto col = out.col(c);
    col = layer.bias;
    for (std::uint16_t idx : batch.column(static_cast<std::size_t>(c))) col += layer.weights.col(idx);
  }
}

template <typename Scalar>
void apply_activation(Activation act, Matrix<Scalar>& z) {
  switch (act) {
    case Activation::Relu: z = z.cwiseMax(Scalar(0)); break;
    case Activation::Linear: break;
    case Activation::Softmax2: {
      const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> mx = z.colwise().maxCoeff();
      z = (z.rowwise() - mx).array().exp().matrix();
      const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> sum = z.colwise().sum();
      z = (z.array().rowwise() / sum.array()).matrix();
      break;
    }
  }
}

template <typename Scalar>
Matrix<Scalar> forward_stack(const std::vector<DenseLayer<Scalar>>& layers, BatchInput<Scalar> input,
                             Tape<Scalar>* tape) {
  Matrix<Scalar> a;
  if (tape) {
    tape->input = input;
    tape->outputs.resize(layers.size());
  }
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const auto& layer = layers[k];
    Matrix<Scalar> z;
    if (k == 0 && input.sparse) {
      sparse_affine_into(layer, *input.sparse, z);
    } else {
      const Matrix<Scalar>& x = k == 0 ? *input.dense : a;
      z.noalias() = layer.weights * x;
      z.colwise() += layer.bias;
    }
    if (tape && layer.activation == Activation::Softmax2) tape->logits = z;
    apply_activation(layer.activation, z);
    a = std::move(z);
    if (tape) tape->outputs[k] = a;
  }
  return a;
}

template <typename Scalar>
void backward_stack_from_logits(const std::vector<DenseLayer<Scalar>>& layers, const Tape<Scalar>& tape,
                                Matrix<Scalar> dz, StackGrad<Scalar>& grads, Matrix<Scalar>* input_grad) {
  for (std::size_t k = layers.size(); k-- > 0;) {
    const auto& layer = layers[k];
    auto& g = grads[k];
    if (k == 0 && tape.input.sparse) {
      const SparseBatch& batch = *tape.input.sparse;
      for (std::size_t c = 0; c < batch.cols(); ++c)
        for (std::uint16_t idx : batch.column(c)) g.weights.col(idx) += dz.col(static_cast<Eigen::Index>(c));
    } else {
      const Matrix<Scalar>& prev = k == 0 ? *tape.input.dense : tape.outputs[k - 1];
      g.weights.noalias() += dz * prev.transpose();
    }
    g.bias += dz.rowwise().sum();

    if (k > 0) {
      const Matrix<Scalar> da = layer.weights.transpose() * dz;
      dz = activation_backward(layers[k - 1].activation, tape.outputs[k - 1], da);
    } else if (input_grad && tape.input.dense) {
      *input_grad = layer.weights.transpose() * dz;
    }
  }
}

template <typename Scalar>
void backward_stack(const std::vector<DenseLayer<Scalar>>& layers, const Tape<Scalar>& tape,
                    const Matrix<Scalar>& da_last, StackGrad<Scalar>& grads, Matrix<Scalar>* input_grad) {
  backward_stack_from_logits(layers, tape, activation_backward(layers.back().activation, tape.outputs.back(), da_last),
                             grads, input_grad);
}

template <typename Scalar>
void sgd_step(std::vector<DenseLayer<Scalar>>& layers, const StackGrad<Scalar>& grads, Scalar lr) {
  for (std::size_t k = 0; k < layers.size(); ++k) {
    layers[k].weights.noalias() -= lr * grads[k].weights;
    layers[k].bias.noalias() -= lr * grads[k].bias;
  }
}

template <typename Scalar>
void FeatureExtractor<Scalar>::validate() const {
  if (layers.empty()) throw NetworkShapeError("feature extractor has no layers");
  if (input_dim() != static_cast<int>(BitVector773::kSize)) throw NetworkShapeError("feature extractor input must be 773");
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const auto& l = layers[k];
    if (l.bias.size() != l.out_dim()) throw NetworkShapeError("bias size mismatch");
    if (k > 0 && l.in_dim() != layers[k - 1].out_dim()) throw NetworkShapeError("extractor layer dims do not chain");
    if (l.activation != Activation::Relu) throw NetworkShapeError("extractor layers must be ReLU");
  }
}

template <typename Scalar>
void SiameseNetwork<Scalar>::validate() const {
  extractor.validate();
  if (head.empty()) throw NetworkShapeError("comparison head has no layers");
  if (head.front().in_dim() != 2 * extractor.output_dim())
    throw NetworkShapeError("head input must be twice the feature dimension");
  for (std::size_t k = 0; k < head.size(); ++k) {
    const auto& l = head[k];
    if (l.bias.size() != l.out_dim()) throw NetworkShapeError("bias size mismatch");
    if (k > 0 && l.in_dim() != head[k - 1].out_dim()) throw NetworkShapeError("head layer dims do not chain");
    const bool last = k + 1 == head.size();
    if (last && (l.activation != Activation::Softmax2 || l.out_dim() != 2))
      throw NetworkShapeError("head must end in a 2-way softmax");
    if (!last && l.activation == Activation::Softmax2) throw NetworkShapeError("softmax only allowed as final layer");
  }
}

template <typename Scalar>
FeatureExtractor<Scalar> make_extractor(const std::vector<int>& dims, std::mt19937_64& rng) {
  check_dims(dims, "extractor");
  FeatureExtractor<Scalar> fe;
  for (std::size_t k = 1; k < dims.size(); ++k)
    fe.layers.push_back(make_layer<Scalar>(dims[k - 1], dims[k], Activation::Relu, rng));
  fe.validate();
  return fe;
}

template <typename Scalar>
std::vector<DenseLayer<Scalar>> make_head(int feature_dim, const std::vector<int>& head_dims, std::mt19937_64& rng) {
  if (head_dims.empty() || head_dims.back() != 2) throw NetworkShapeError("head must end with 2 outputs");
  std::vector<DenseLayer<Scalar>> head;
  int in = 2 * feature_dim;
  for (std::size_t k = 0; k < head_dims.size(); ++k) {
    const bool last = k + 1 == head_dims.size();
    head.push_back(make_layer<Scalar>(in, head_dims[k], last ? Activation::Softmax2 : Activation::Relu, rng));
    in = head_dims[k];
  }
  return head;
}

template <typename Scalar>
SiameseNetwork<Scalar> make_siamese(const std::vector<int>& extractor_dims, const std::vector<int>& head_dims,
                                    std::mt19937_64& rng) {
  SiameseNetwork<Scalar> net;
  net.extractor = make_extractor<Scalar>(extractor_dims, rng);
  net.head = make_head<Scalar>(net.extractor.output_dim(), head_dims, rng);
  net.validate();
  return net;
}

template <typename Scalar>
SiameseGrad<Scalar> zero_grad(const SiameseNetwork<Scalar>& net) {
  return {zero_grad(net.extractor.layers), zero_grad(net.head)};
}

template <typename Scalar>
Matrix<Scalar> siamese_forward(const SiameseNetwork<Scalar>& net, const SparseBatch& inputs, SiameseTape<Scalar>* tape) {
  const auto batch = static_cast<Eigen::Index>(inputs.cols() / 2);
  const Matrix<Scalar> features =
      forward_stack(net.extractor.layers, BatchInput<Scalar>{nullptr, &inputs}, tape ? &tape->extractor : nullptr);
  const Eigen::Index d = features.rows();

  Matrix<Scalar> local;
  Matrix<Scalar>& head_input = tape ? tape->head_input : local;
  head_input.resize(2 * d, batch);
  head_input.topRows(d) = features.leftCols(batch);
  head_input.bottomRows(d) = features.rightCols(batch);
  if (tape) tape->batch = static_cast<std::size_t>(batch);
  return forward_stack(net.head, BatchInput<Scalar>{&head_input, nullptr}, tape ? &tape->head : nullptr);
}

template <typename Scalar>
void siamese_backward(const SiameseNetwork<Scalar>& net, const SiameseTape<Scalar>& tape, const Matrix<Scalar>& dz_last,
                      SiameseGrad<Scalar>& grads) {
  Matrix<Scalar> d_head_input;
  backward_stack_from_logits(net.head, tape.head, dz_last, grads.head, &d_head_input);

  const auto batch = static_cast<Eigen::Index>(tape.batch);
  const Eigen::Index d = net.extractor.output_dim();
  Matrix<Scalar> d_features(d, 2 * batch);
  d_features.leftCols(batch) = d_head_input.topRows(d);
  d_features.rightCols(batch) = d_head_input.bottomRows(d);
  backward_stack(net.extractor.layers, tape.extractor, d_features, grads.extractor);
}

template <typename Scalar>
std::array<Scalar, 2> forward(const SiameseNetwork<Scalar>& net, const BitVector773& a, const BitVector773& b) {
  SparseBatch batch;
  batch.add(a);
  batch.add(b);
  const Matrix<Scalar> p = siamese_forward(net, batch);
  return {p(0, 0), p(1, 0)};
}

#define DEEPCHESS_INSTANTIATE(S)                                                                                   \
  template DenseLayer<S> make_layer<S>(int, int, Activation, std::mt19937_64&);                                   \
  template StackGrad<S> zero_grad<S>(const std::vector<DenseLayer<S>>&);                                          \
  template void set_zero<S>(StackGrad<S>&);                                                                       \
  template void sparse_affine_into<S>(const DenseLayer<S>&, const SparseBatch&, Matrix<S>&);                      \
  template void apply_activation<S>(Activation, Matrix<S>&);                                                      \
  template Matrix<S> forward_stack<S>(const std::vector<DenseLayer<S>>&, BatchInput<S>, Tape<S>*);                 \
  template void backward_stack_from_logits<S>(const std::vector<DenseLayer<S>>&, const Tape<S>&, Matrix<S>,        \
                                              StackGrad<S>&, Matrix<S>*);                                          \
  template void backward_stack<S>(const std::vector<DenseLayer<S>>&, const Tape<S>&, const Matrix<S>&,             \
                                  StackGrad<S>&, Matrix<S>*);                                                      \
  template void sgd_step<S>(std::vector<DenseLayer<S>>&, const StackGrad<S>&, S);                                 \
  template struct FeatureExtractor<S>;                                                                             \
  template struct SiameseNetwork<S>;                                                                               \
  template FeatureExtractor<S> make_extractor<S>(const std::vector<int>&, std::mt19937_64&);                      \
  template std::vector<DenseLayer<S>> make_head<S>(int, const std::vector<int>&, std::mt19937_64&);               \
  template SiameseNetwork<S> make_siamese<S>(const std::vector<int>&, const std::vector<int>&, std::mt19937_64&); \
  template SiameseGrad<S> zero_grad<S>(const SiameseNetwork<S>&);                                                 \
  template Matrix<S> siamese_forward<S>(const SiameseNetwork<S>&, const SparseBatch&, SiameseTape<S>*);           \
  template void siamese_backward<S>(const SiameseNetwork<S>&, const SiameseTape<S>&, const Matrix<S>&,            \
                                    SiameseGrad<S>&);                                                              \
  template std::array<S, 2> forward<S>(const SiameseNetwork<S>&, const BitVector773&, const BitVector773&);

DEEPCHESS_INSTANTIATE(float)
DEEPCHESS_INSTANTIATE(double)

#undef DEEPCHESS_INSTANTIATE

}  // namespace deepchess::nn
