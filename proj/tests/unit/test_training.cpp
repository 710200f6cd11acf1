#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "deepchess/comparator.hpp"
#include "deepchess/corpus.hpp"
#include "deepchess/training.hpp"

using namespace deepchess;
using namespace deepchess::nn;

namespace {

// Positions labelled W when White is ahead in material, L when behind.
SplitDataset material_dataset(std::size_t count, std::uint64_t seed) {
  std::vector<LabeledPosition> out;
  std::uint32_t id = 0;
  for (const Position& p : random_playout_positions(count, seed, 20, 90)) {
    const int balance = material_balance(p);
    if (balance == 0) continue;
    out.push_back({encode(p), balance > 0 ? Label::W : Label::L, id++, 0});
  }
  return split(std::move(out), 100, seed);
}

TrainConfig small_config(std::size_t epochs) {
  TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.pairs_per_epoch = 2000;
  cfg.minibatch = 64;
  cfg.seed = 5;
  return cfg;
}

bool same_weights(const SiameseNetwork<float>& a, const SiameseNetwork<float>& b) {
  auto eq = [](const auto& x, const auto& y) {
    if (x.size() != y.size()) return false;
    for (std::size_t k = 0; k < x.size(); ++k)
      if (x[k].weights != y[k].weights || x[k].bias != y[k].bias) return false;
    return true;
  };
  return eq(a.extractor.layers, b.extractor.layers) && eq(a.head, b.head);
}

}  // namespace

TEST(TrainConfig, ScheduleAndValidation) {
  TrainConfig cfg;
  cfg.initial_lr = 0.01;
  cfg.lr_decay_per_epoch = 0.99;
  EXPECT_DOUBLE_EQ(cfg.learning_rate(0), 0.01);
  EXPECT_NEAR(cfg.learning_rate(10), 0.01 * std::pow(0.99, 10), 1e-15);
  EXPECT_DOUBLE_EQ(TrainConfig::supervised_defaults().initial_lr, 0.01);
  EXPECT_DOUBLE_EQ(TrainConfig::supervised_defaults().lr_decay_per_epoch, 0.99);
  EXPECT_DOUBLE_EQ(TrainConfig::pretraining_defaults().initial_lr, 0.005);
  EXPECT_DOUBLE_EQ(TrainConfig::pretraining_defaults().lr_decay_per_epoch, 0.98);
  EXPECT_EQ(TrainConfig::supervised_defaults().minibatch, 128u);

  cfg.lr_decay_per_epoch = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg.lr_decay_per_epoch = 1.01;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg.lr_decay_per_epoch = 1.0;
  cfg.minibatch = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(Pretrain, ReconstructionErrorFalls) {
  const SplitDataset ds = material_dataset(1500, 2);
  const auto data = balanced_subset(ds, 400, 1);
  TrainConfig cfg = small_config(4);
  cfg.initial_lr = 0.05;
  cfg.pairs_per_epoch = data.size();
  PretrainLog log;
  const auto fe = pretrain_pos2vec(data, {773, 40, 20}, cfg, &log);
  ASSERT_EQ(fe.layers.size(), 2u);
  EXPECT_EQ(fe.output_dim(), 20);
  ASSERT_EQ(log.stage_losses.size(), 2u);
  for (const auto& stage : log.stage_losses) {
    ASSERT_EQ(stage.size(), 4u);
    EXPECT_LT(stage.back(), stage.front());
  }
}

TEST(Train, LearnsMaterialLabelsAndIsDeterministic) {
  const SplitDataset ds = material_dataset(6000, 3);
  std::mt19937_64 rng(1);
  const auto init = make_extractor<float>({773, 32, 16}, rng);
  TrainConfig cfg = small_config(6);
  cfg.initial_lr = 0.1;
  cfg.pairs_per_epoch = 30000;
  const auto a = train_deepchess(ds, init, {16, 2}, cfg, 400);
  const auto b = train_deepchess(ds, init, {16, 2}, cfg, 400);
  ASSERT_EQ(a.log.size(), 6u);
  for (std::size_t e = 0; e < a.log.size(); ++e) {
    EXPECT_EQ(a.log[e].train_loss, b.log[e].train_loss);
    EXPECT_EQ(a.log[e].val_accuracy, b.log[e].val_accuracy);
  }
  EXPECT_TRUE(same_weights(a.net, b.net));
  EXPECT_GT(a.log.back().val_accuracy, 0.75);
  EXPECT_LT(a.log.back().train_loss, a.log.front().train_loss);
}

TEST(Train, NonFiniteLossIsReported) {
  const SplitDataset ds = material_dataset(600, 4);
  std::mt19937_64 rng(1);
  auto init = make_extractor<float>({773, 8}, rng);
  init.layers[0].weights.row(0).setConstant(std::numeric_limits<float>::quiet_NaN());
  EXPECT_THROW(train_deepchess(ds, init, {4, 2}, small_config(1), 50), NonFiniteLoss);
}

TEST(Distill, ZeroEpochsReturnTheInitialization) {
  const SplitDataset ds = material_dataset(600, 5);
  std::mt19937_64 rng(1);
  const auto teacher = make_siamese<float>({773, 16, 8}, {8, 2}, rng);
  const auto student = make_siamese<float>({773, 8, 8}, {4, 2}, rng);
  DistillConfig cfg{small_config(0), small_config(0), false};
  const auto result = distill(teacher, student, ds, cfg, 50);
  EXPECT_TRUE(same_weights(result.student, student));
  EXPECT_TRUE(result.feature_losses.empty());
}

TEST(Distill, StudentApproachesTeacher) {
  const SplitDataset ds = material_dataset(6000, 6);
  std::mt19937_64 rng(1);
  TrainConfig cfg = small_config(6);
  cfg.initial_lr = 0.1;
  cfg.pairs_per_epoch = 30000;
  const auto teacher = train_deepchess(ds, make_extractor<float>({773, 32, 16}, rng), {16, 2}, cfg, 400).net;
  const auto student = make_siamese<float>({773, 16, 16}, {8, 2}, rng);
  const auto pairs = validation_pairs(ds, 400, 2);
  const double before = argmax_agreement(teacher, student, pairs);
  DistillConfig dc{small_config(3), small_config(6), false};
  dc.feature_stage.pairs_per_epoch = 30000;
  dc.output_stage.pairs_per_epoch = 30000;
  dc.feature_stage.initial_lr = 0.05;
  dc.output_stage.initial_lr = 0.1;
  const auto result = distill(teacher, student, ds, dc, 400);
  ASSERT_EQ(result.feature_losses.size(), 3u);
  EXPECT_LT(result.feature_losses.back(), result.feature_losses.front());
  EXPECT_GT(argmax_agreement(teacher, result.student, pairs), std::max(before, 0.8));
  EXPECT_DOUBLE_EQ(argmax_agreement(teacher, teacher, pairs), 1.0);
}

TEST(Distill, FrozenExtractorStaysFixed) {
  const SplitDataset ds = material_dataset(600, 7);
  std::mt19937_64 rng(1);
  const auto teacher = make_siamese<float>({773, 16, 8}, {8, 2}, rng);
  const auto student = make_siamese<float>({773, 8, 8}, {4, 2}, rng);
  DistillConfig cfg{small_config(1), small_config(2), true};
  const auto result = distill(teacher, student, ds, cfg, 50);
  // Stage 1 moved the extractor; stage 2 must leave it where stage 1 put it.
  DistillConfig stage1_only{small_config(1), small_config(0), true};
  const auto after_stage1 = distill(teacher, student, ds, stage1_only, 50);
  for (std::size_t k = 0; k < result.student.extractor.layers.size(); ++k)
    EXPECT_EQ(result.student.extractor.layers[k].weights, after_stage1.student.extractor.layers[k].weights);
  EXPECT_NE(result.student.head[0].weights, student.head[0].weights);
}
