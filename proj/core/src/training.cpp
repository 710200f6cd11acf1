#include "deepchess/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace deepchess::nn {

namespace {

template <typename Scalar>
void require_finite(Scalar loss, const char* what) {
  if (!std::isfinite(static_cast<double>(loss))) throw NonFiniteLoss(std::string("non-finite ") + what + " loss");
}

void fill_targets(Matrix<float>& t, std::span<const PairSample> pairs) {
  t.resize(2, static_cast<Eigen::Index>(pairs.size()));
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    t(0, static_cast<Eigen::Index>(i)) = pairs[i].first_is_win ? 1.0F : 0.0F;
    t(1, static_cast<Eigen::Index>(i)) = pairs[i].first_is_win ? 0.0F : 1.0F;
  }
}

void fill_inputs(SparseBatch& batch, std::span<const PairSample> pairs) {
  batch.clear();
  for (const auto& p : pairs) batch.add(p.first);
  for (const auto& p : pairs) batch.add(p.second);
}

std::size_t count_correct(const Matrix<float>& probs, std::span<const PairSample> pairs) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const bool first = probs(0, static_cast<Eigen::Index>(i)) > probs(1, static_cast<Eigen::Index>(i));
    if (first == pairs[i].first_is_win) ++correct;
  }
  return correct;
}

Matrix<float> probabilities(const SiameseNetwork<float>& net, std::span<const PairSample> pairs) {
  SparseBatch batch;
  fill_inputs(batch, pairs);
  return siamese_forward(net, batch);
}

void sgd_step(SiameseNetwork<float>& net, const SiameseGrad<float>& g, float lr, bool update_extractor) {
  sgd_step(net.head, g.head, lr);
  if (update_extractor) sgd_step(net.extractor.layers, g.extractor, lr);
}

constexpr std::size_t kEvalChunk = 1024;

}  // namespace

double TrainConfig::learning_rate(std::size_t epoch) const {
  return initial_lr * std::pow(lr_decay_per_epoch, static_cast<double>(epoch));
}

void TrainConfig::validate() const {
  if (!(initial_lr > 0)) throw std::invalid_argument("initial_lr must be positive");
  if (!(lr_decay_per_epoch > 0 && lr_decay_per_epoch <= 1)) throw std::invalid_argument("lr_decay_per_epoch must be in (0, 1]");
  if (minibatch < 1) throw std::invalid_argument("minibatch must be >= 1");
}

TrainConfig TrainConfig::supervised_defaults() { return TrainConfig{0.01, 0.99, 1000, 1'000'000, 128, 1}; }

TrainConfig TrainConfig::pretraining_defaults() { return TrainConfig{0.005, 0.98, 200, 2'000'000, 128, 1}; }

template <typename Scalar>
Scalar cross_entropy_from_logits(const Matrix<Scalar>& logits, const Matrix<Scalar>& targets) {
  Scalar total = 0;
  for (Eigen::Index c = 0; c < logits.cols(); ++c) {
    const Scalar mx = logits.col(c).maxCoeff();
    const Scalar lse = mx + std::log((logits.col(c).array() - mx).exp().sum());
    for (Eigen::Index k = 0; k < logits.rows(); ++k)
      if (targets(k, c) != Scalar(0)) total -= targets(k, c) * (logits(k, c) - lse);
  }
  return total / static_cast<Scalar>(logits.cols());
}

template <typename Scalar>
Matrix<Scalar> softmax_cross_entropy_grad(const Matrix<Scalar>& probs, const Matrix<Scalar>& targets) {
  return (probs - targets) / static_cast<Scalar>(probs.cols());
}

template <typename Scalar>
Scalar mean_squared_error(const Matrix<Scalar>& y, const Matrix<Scalar>& x) {
  return (y - x).squaredNorm() / static_cast<Scalar>(y.cols());
}

template <typename Scalar>
Matrix<Scalar> mean_squared_error_grad(const Matrix<Scalar>& y, const Matrix<Scalar>& x) {
  return (y - x) * (Scalar(2) / static_cast<Scalar>(y.cols()));
}

template <typename Scalar>
Scalar autoencoder_loss(const std::vector<DenseLayer<Scalar>>& stack, BatchInput<Scalar> input,
                        const Matrix<Scalar>& target, StackGrad<Scalar>* grads) {
  Tape<Scalar> tape;
  const Matrix<Scalar> recon = forward_stack(stack, input, grads ? &tape : nullptr);
  const Scalar loss = mean_squared_error(recon, target);
  require_finite(loss, "reconstruction");
  if (grads) backward_stack(stack, tape, mean_squared_error_grad(recon, target), *grads);
  return loss;
}

template <typename Scalar>
Scalar siamese_loss(const SiameseNetwork<Scalar>& net, const SparseBatch& inputs, const Matrix<Scalar>& targets,
                    SiameseGrad<Scalar>* grads, Matrix<Scalar>* probs) {
  SiameseTape<Scalar> tape;
  const Matrix<Scalar> p = siamese_forward(net, inputs, &tape);
  const Scalar loss = cross_entropy_from_logits(tape.head.logits, targets);
  require_finite(loss, "cross-entropy");
  if (grads) siamese_backward(net, tape, softmax_cross_entropy_grad(p, targets), *grads);
  if (probs) *probs = p;
  return loss;
}

std::vector<BitVector773> balanced_subset(const SplitDataset& ds, std::size_t per_class, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<BitVector773> out;
  const std::size_t n = std::min({per_class, ds.train_w.size(), ds.train_l.size()});
  auto draw = [&](const std::vector<LabeledPosition>& pool) {
    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i = 0; i < n; ++i) out.push_back(pool[order[i]].vector);
  };
  draw(ds.train_w);
  draw(ds.train_l);
  return out;
}

FeatureExtractor<float> pretrain_pos2vec(std::span<const BitVector773> data, const std::vector<int>& dims,
                                         const TrainConfig& cfg, PretrainLog* log) {
  cfg.validate();
  if (dims.size() < 2 || dims.front() != static_cast<int>(BitVector773::kSize))
    throw NetworkShapeError("pretraining dims must start at 773");
  if (data.empty()) throw std::invalid_argument("pretraining needs data");

  FeatureExtractor<float> fe;
  if (log) log->stage_losses.assign(dims.size() - 1, {});

  for (std::size_t stage = 0; stage + 1 < dims.size(); ++stage) {
    Rng rng(cfg.seed + 7919 * stage);
    std::vector<DenseLayer<float>> autoencoder;
    autoencoder.push_back(make_layer<float>(dims[stage], dims[stage + 1], Activation::Relu, rng));
    autoencoder.push_back(make_layer<float>(dims[stage + 1], dims[stage], Activation::Linear, rng));
    StackGrad<float> grads = zero_grad(autoencoder);
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);

    SparseBatch sparse;
    Matrix<float> dense_input, target;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
      const auto lr = static_cast<float>(cfg.learning_rate(epoch));
      std::shuffle(order.begin(), order.end(), rng);
      double loss_sum = 0;
      for (std::size_t start = 0; start < order.size(); start += cfg.minibatch) {
        const std::size_t end = std::min(order.size(), start + cfg.minibatch);
        sparse.clear();
        for (std::size_t i = start; i < end; ++i) sparse.add(data[order[i]]);

        BatchInput<float> input{nullptr, &sparse};
        if (stage == 0) {
          target = Matrix<float>::Zero(dims[0], static_cast<Eigen::Index>(end - start));
          for (std::size_t c = 0; c < sparse.cols(); ++c)
            for (auto idx : sparse.column(c)) target(idx, static_cast<Eigen::Index>(c)) = 1.0F;
        } else {
          dense_input = forward_stack(fe.layers, BatchInput<float>{nullptr, &sparse});
          target = dense_input;
          input = BatchInput<float>{&dense_input, nullptr};
        }

        set_zero(grads);
        const float loss = autoencoder_loss(autoencoder, input, target, &grads);
        loss_sum += static_cast<double>(loss) * static_cast<double>(end - start);
        sgd_step(autoencoder, grads, lr);
      }
      if (log) log->stage_losses[stage].push_back(loss_sum / static_cast<double>(order.size()));
    }
    fe.layers.push_back(std::move(autoencoder.front()));
  }
  fe.validate();
  return fe;
}

double pair_accuracy(const SiameseNetwork<float>& net, std::span<const PairSample> pairs) {
  if (pairs.empty()) return 0;
  std::size_t correct = 0;
  for (std::size_t start = 0; start < pairs.size(); start += kEvalChunk) {
    const auto chunk = pairs.subspan(start, std::min(kEvalChunk, pairs.size() - start));
    correct += count_correct(probabilities(net, chunk), chunk);
  }
  return static_cast<double>(correct) / static_cast<double>(pairs.size());
}

double argmax_agreement(const SiameseNetwork<float>& a, const SiameseNetwork<float>& b,
                        std::span<const PairSample> pairs) {
  if (pairs.empty()) return 0;
  std::size_t agree = 0;
  for (std::size_t start = 0; start < pairs.size(); start += kEvalChunk) {
    const auto chunk = pairs.subspan(start, std::min(kEvalChunk, pairs.size() - start));
    const Matrix<float> pa = probabilities(a, chunk);
    const Matrix<float> pb = probabilities(b, chunk);
    for (Eigen::Index i = 0; i < pa.cols(); ++i)
      if ((pa(0, i) > pa(1, i)) == (pb(0, i) > pb(1, i))) ++agree;
  }
  return static_cast<double>(agree) / static_cast<double>(pairs.size());
}

TrainResult train_deepchess(const SplitDataset& ds, const FeatureExtractor<float>& init,
                            const std::vector<int>& head_dims, const TrainConfig& cfg,
                            std::size_t validation_pair_count, const EpochCallback& on_epoch) {
  cfg.validate();
  init.validate();
  Rng rng(cfg.seed);
  TrainResult result;
  result.net.extractor = init;
  result.net.head = make_head<float>(init.output_dim(), head_dims, rng);
  result.net.validate();

  const auto val = validation_pairs(ds, validation_pair_count, cfg.seed ^ 0x5DEECE66DULL);
  PairSampler sampler(ds.train_w, ds.train_l, rng);
  SiameseGrad<float> grads = zero_grad(result.net);
  std::vector<PairSample> batch_pairs;
  SparseBatch inputs;
  Matrix<float> targets, probs;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto lr = static_cast<float>(cfg.learning_rate(epoch));
    double loss_sum = 0;
    std::size_t correct = 0;
    for (std::size_t done = 0; done < cfg.pairs_per_epoch;) {
      const std::size_t n = std::min(cfg.minibatch, cfg.pairs_per_epoch - done);
      batch_pairs.clear();
      for (std::size_t i = 0; i < n; ++i) batch_pairs.push_back(sampler.next());
      fill_inputs(inputs, batch_pairs);
      fill_targets(targets, batch_pairs);
      set_zero(grads.extractor);
      set_zero(grads.head);
      const float loss = siamese_loss(result.net, inputs, targets, &grads, &probs);
      loss_sum += static_cast<double>(loss) * static_cast<double>(n);
      correct += count_correct(probs, batch_pairs);
      sgd_step(result.net, grads, lr, true);
      done += n;
    }
    EpochLog entry;
    entry.epoch = epoch;
    entry.learning_rate = lr;
    entry.train_loss = cfg.pairs_per_epoch ? loss_sum / static_cast<double>(cfg.pairs_per_epoch) : 0;
    entry.train_accuracy = cfg.pairs_per_epoch ? static_cast<double>(correct) / static_cast<double>(cfg.pairs_per_epoch) : 0;
    entry.val_accuracy = pair_accuracy(result.net, val);
    result.log.push_back(entry);
    if (on_epoch) on_epoch(entry);
  }
  return result;
}

DistillResult distill(const SiameseNetwork<float>& teacher, SiameseNetwork<float> student_init, const SplitDataset& data,
                      const DistillConfig& cfg, std::size_t validation_pair_count) {
  teacher.validate();
  student_init.validate();
  if (student_init.extractor.output_dim() != teacher.extractor.output_dim())
    throw NetworkShapeError("student and teacher feature dimensions differ");
  cfg.feature_stage.validate();
  cfg.output_stage.validate();

  DistillResult result;
  result.student = std::move(student_init);
  auto& student = result.student;

  // Stage 1: feature regression on unlabeled positions.
  {
    std::vector<const BitVector773*> pool;
    for (const auto& p : data.train_w) pool.push_back(&p.vector);
    for (const auto& p : data.train_l) pool.push_back(&p.vector);
    if (pool.empty() && cfg.feature_stage.epochs > 0) throw InsufficientData(0, 0, 0);
    const TrainConfig& fc = cfg.feature_stage;
    Rng rng(fc.seed);
    StackGrad<float> grads = zero_grad(student.extractor.layers);
    SparseBatch inputs;
    for (std::size_t epoch = 0; epoch < fc.epochs; ++epoch) {
      const auto lr = static_cast<float>(fc.learning_rate(epoch));
      double loss_sum = 0;
      for (std::size_t done = 0; done < fc.pairs_per_epoch;) {
        const std::size_t n = std::min(fc.minibatch, fc.pairs_per_epoch - done);
        inputs.clear();
        for (std::size_t i = 0; i < n; ++i)
          inputs.add(*pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)]);
        const Matrix<float> target = forward_stack(teacher.extractor.layers, BatchInput<float>{nullptr, &inputs});
        Tape<float> tape;
        const Matrix<float> out = forward_stack(student.extractor.layers, BatchInput<float>{nullptr, &inputs}, &tape);
        const float loss = mean_squared_error(out, target);
        require_finite(loss, "feature-distillation");
        set_zero(grads);
        backward_stack(student.extractor.layers, tape, mean_squared_error_grad(out, target), grads);
        sgd_step(student.extractor.layers, grads, lr);
        loss_sum += static_cast<double>(loss) * static_cast<double>(n);
        done += n;
      }
      result.feature_losses.push_back(fc.pairs_per_epoch ? loss_sum / static_cast<double>(fc.pairs_per_epoch) : 0);
    }
  }

  // Stage 2: match the teacher's output distribution on pairs.
  {
    const TrainConfig& oc = cfg.output_stage;
    Rng rng(oc.seed);
    const auto val = validation_pair_count > 0 && !data.val_w.empty() && !data.val_l.empty()
                         ? validation_pairs(data, validation_pair_count, oc.seed ^ 0x5DEECE66DULL)
                         : std::vector<PairSample>{};
    if (oc.epochs > 0) {
      PairSampler sampler(data.train_w, data.train_l, rng);
      SiameseGrad<float> grads = zero_grad(student);
      std::vector<PairSample> batch_pairs;
      SparseBatch inputs;
      Matrix<float> probs;
      for (std::size_t epoch = 0; epoch < oc.epochs; ++epoch) {
        const auto lr = static_cast<float>(oc.learning_rate(epoch));
        double loss_sum = 0;
        std::size_t agree = 0;
        for (std::size_t done = 0; done < oc.pairs_per_epoch;) {
          const std::size_t n = std::min(oc.minibatch, oc.pairs_per_epoch - done);
          batch_pairs.clear();
          for (std::size_t i = 0; i < n; ++i) batch_pairs.push_back(sampler.next());
          fill_inputs(inputs, batch_pairs);
          const Matrix<float> soft = siamese_forward(teacher, inputs);
          set_zero(grads.extractor);
          set_zero(grads.head);
          const float loss = siamese_loss(student, inputs, soft, &grads, &probs);
          for (Eigen::Index i = 0; i < probs.cols(); ++i)
            if ((probs(0, i) > probs(1, i)) == (soft(0, i) > soft(1, i))) ++agree;
          sgd_step(student, grads, lr, !cfg.freeze_extractor);
          loss_sum += static_cast<double>(loss) * static_cast<double>(n);
          done += n;
        }
        EpochLog entry;
        entry.epoch = epoch;
        entry.learning_rate = lr;
        entry.train_loss = oc.pairs_per_epoch ? loss_sum / static_cast<double>(oc.pairs_per_epoch) : 0;
        entry.train_accuracy = oc.pairs_per_epoch ? static_cast<double>(agree) / static_cast<double>(oc.pairs_per_epoch) : 0;
        entry.val_accuracy = val.empty() ? 0 : argmax_agreement(student, teacher, val);
        result.output_log.push_back(entry);
      }
    }
  }
  return result;
}

#define DEEPCHESS_INSTANTIATE(S)                                                                              \
  template S cross_entropy_from_logits<S>(const Matrix<S>&, const Matrix<S>&);                                \
  template Matrix<S> softmax_cross_entropy_grad<S>(const Matrix<S>&, const Matrix<S>&);                       \
  template S mean_squared_error<S>(const Matrix<S>&, const Matrix<S>&);                                       \
  template Matrix<S> mean_squared_error_grad<S>(const Matrix<S>&, const Matrix<S>&);                          \
  template S autoencoder_loss<S>(const std::vector<DenseLayer<S>>&, BatchInput<S>, const Matrix<S>&,          \
                                 StackGrad<S>*);                                                              \
  template S siamese_loss<S>(const SiameseNetwork<S>&, const SparseBatch&, const Matrix<S>&, SiameseGrad<S>*, \
                             Matrix<S>*);

DEEPCHESS_INSTANTIATE(float)
DEEPCHESS_INSTANTIATE(double)

#undef DEEPCHESS_INSTANTIATE

}  // namespace deepchess::nn
