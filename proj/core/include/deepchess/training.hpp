#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "deepchess/dataset.hpp"
#include "deepchess/network.hpp"

namespace deepchess::nn {

class NonFiniteLoss : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Plain minibatch SGD with a per-epoch multiplicative learning-rate decay.
struct TrainConfig {
  double initial_lr = 0.01;
  double lr_decay_per_epoch = 0.99;
  std::size_t epochs = 1000;
  std::size_t pairs_per_epoch = 1'000'000;
  std::size_t minibatch = 128;
  std::uint64_t seed = 1;

  /// initial_lr * decay^epoch, epochs counted from 0.
  double learning_rate(std::size_t epoch) const;
  /// Throws std::invalid_argument.
  void validate() const;

  static TrainConfig supervised_defaults();
  static TrainConfig pretraining_defaults();
};

// Losses. Columns are samples; every loss is a batch mean with no regularization term.

/// Mean over columns of -sum_k t_k log softmax(z)_k, evaluated from logits.
template <typename Scalar>
Scalar cross_entropy_from_logits(const Matrix<Scalar>& logits, const Matrix<Scalar>& targets);

/// dL/dz for softmax followed by cross entropy: (p - t) / batch.
template <typename Scalar>
Matrix<Scalar> softmax_cross_entropy_grad(const Matrix<Scalar>& probs, const Matrix<Scalar>& targets);

/// Mean over columns of the squared Euclidean distance |y - x|^2.
template <typename Scalar>
Scalar mean_squared_error(const Matrix<Scalar>& y, const Matrix<Scalar>& x);

template <typename Scalar>
Matrix<Scalar> mean_squared_error_grad(const Matrix<Scalar>& y, const Matrix<Scalar>& x);

/// Autoencoder loss for one pretraining stage: `stack` is {encoder (ReLU), decoder (linear)}, scored by MSE
/// against `target` (the stage input).
template <typename Scalar>
Scalar autoencoder_loss(const std::vector<DenseLayer<Scalar>>& stack, BatchInput<Scalar> input,
                        const Matrix<Scalar>& target, StackGrad<Scalar>* grads);

/// Siamese cross-entropy against (possibly soft) 2 x B targets; accumulates gradients when `grads` is set.
template <typename Scalar>
Scalar siamese_loss(const SiameseNetwork<Scalar>& net, const SparseBatch& inputs, const Matrix<Scalar>& targets,
                    SiameseGrad<Scalar>* grads, Matrix<Scalar>* probs = nullptr);

struct PretrainLog {
  /// Mean reconstruction error per epoch, one vector per stage.
  std::vector<std::vector<double>> stage_losses;
};

/// Equal numbers of W and L positions drawn from the training split.
std::vector<BitVector773> balanced_subset(const SplitDataset& ds, std::size_t per_class, std::uint64_t seed);

/// Greedy layer-wise autoencoder pretraining. Stage k trains a (d_k -> d_{k+1} -> d_k) autoencoder
/// on the output of the already-frozen stages 0..k-1; each stage runs cfg.epochs epochs with its own
/// learning-rate schedule. Returns the stacked encoders.
FeatureExtractor<float> pretrain_pos2vec(std::span<const BitVector773> data, const std::vector<int>& dims,
                                         const TrainConfig& cfg, PretrainLog* log = nullptr);

struct EpochLog {
  std::size_t epoch = 0;
  double learning_rate = 0;
  double train_loss = 0;
  double train_accuracy = 0;
  double val_accuracy = 0;
};

using EpochCallback = std::function<void(const EpochLog&)>;

struct TrainResult {
  SiameseNetwork<float> net;
  std::vector<EpochLog> log;
};

/// Supervised Siamese training: fresh random pairs every epoch, the shared extractor fine-tuned.
TrainResult train_deepchess(const SplitDataset& ds, const FeatureExtractor<float>& init,
                            const std::vector<int>& head_dims, const TrainConfig& cfg,
                            std::size_t validation_pair_count = 10'000, const EpochCallback& on_epoch = {});

/// Fraction of pairs ordered correctly by argmax (ties count as "second").
double pair_accuracy(const SiameseNetwork<float>& net, std::span<const PairSample> pairs);

/// Fraction of pairs on which both networks pick the same argmax.
double argmax_agreement(const SiameseNetwork<float>& a, const SiameseNetwork<float>& b,
                        std::span<const PairSample> pairs);

struct DistillConfig {
  /// Stage 1: student extractor regresses the teacher's features (pairs_per_epoch = positions per epoch).
  TrainConfig feature_stage;
  /// Stage 2: whole student matches the teacher's output distribution.
  TrainConfig output_stage;
  bool freeze_extractor = false;
};

struct DistillResult {
  SiameseNetwork<float> student;
  std::vector<double> feature_losses;
  std::vector<EpochLog> output_log;  // val_accuracy holds agreement with the teacher
};

DistillResult distill(const SiameseNetwork<float>& teacher, SiameseNetwork<float> student_init, const SplitDataset& data,
                      const DistillConfig& cfg, std::size_t validation_pair_count = 10'000);

}  // namespace deepchess::nn
