// Copyright 2026 The DECN Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <string>
#include <vector>

#include "decn/decn.hpp"
#include "oracles.hpp"

namespace decn {
namespace {

PopulationGrid grid_with_mean(double mean_fitness) {
  PopulationGrid g = make_grid(Tensor(Shape{2, 2, 1}, 0.0), {-1}, {1});
  g.fitness = Var(Tensor(Shape{2, 2}, std::vector<double>{mean_fitness - 1, mean_fitness + 1,
                                                          mean_fitness, mean_fitness}));
  return g;
}

TrainConfig small_config(std::uint64_t seed) {
  TrainConfig cfg;
  cfg.K = 3;
  cfg.epochs = 4;
  cfg.L = 5;
  cfg.D = 2;
  cfg.resample_every = 2;
  cfg.seed = seed;
  cfg.threads = 1;
  return cfg;
}

TEST(Loss, ZeroWhenNothingChanges) {
  const PopulationGrid s0 = grid_with_mean(10);
  EXPECT_EQ(loss(s0, s0).value().item(), 0.0);
}

TEST(Loss, NormalizedImprovement) {
  EXPECT_DOUBLE_EQ(loss(grid_with_mean(10), grid_with_mean(4)).value().item(), -0.6);
  EXPECT_DOUBLE_EQ(loss(grid_with_mean(-10), grid_with_mean(-12)).value().item(), -0.2);
}

TEST(Loss, GuardedAtZeroMean) {
  Rng rng = make_rng(1, "t");
  const ObjectiveInstance f4 = sample_shift(FunctionId::F4, 2, rng);
  Tensor x(Shape{3, 3, 2}, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = f4.shift[i % 2];
  const PopulationGrid s0 = evaluate(make_grid(x, f4.lower, f4.upper), f4);
  ASSERT_EQ(s0.mean_fitness(), 0.0);
  const PopulationGrid out = evaluate(init_population(3, f4, rng), f4);
  const double l = loss(s0, out).value().item();
  EXPECT_TRUE(std::isfinite(l));
  EXPECT_DOUBLE_EQ(l, out.mean_fitness() / kLossEpsilon);
  EXPECT_EQ(loss(s0, s0).value().item(), 0.0);
}

TEST(Loss, RequiresEvaluatedGrids) {
  Rng rng = make_rng(2, "t");
  const ObjectiveInstance f4 = sample_shift(FunctionId::F4, 2, rng);
  const PopulationGrid stale = init_population(3, f4, rng);
  EXPECT_THROW(loss(stale, stale), NotEvaluatedError);
}

TEST(Adam, ZeroGradientLeavesParamsAndAdvancesStep) {
  std::vector<Tensor> params{Tensor::vector({1, -2, 3})};
  const std::vector<Tensor> grads{Tensor::vector({0, 0, 0})};
  AdamState state;
  adam_step(params, grads, state, 0.1);
  EXPECT_EQ(params[0], Tensor::vector({1, -2, 3}));
  EXPECT_EQ(state.step, 1u);
}

TEST(Adam, MatchesRecurrenceAndApproachesLr) {
  const double lr = 1e-2, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  std::vector<Tensor> params{Tensor::vector({0.5, 0.5})};
  AdamState state;
  double m = 0, v = 0, p = 0.5;
  Rng rng = make_rng(3, "t");
  for (int t = 1; t <= 200; ++t) {
    // First coordinate: varying gradient, checked against the recurrence.
    const double g = t <= 100 ? uniform(rng, -1, 1) : 0.7;
    const std::vector<Tensor> grads{Tensor::vector({g, 2.5})};
    const double before = params[0][1];
    adam_step(params, grads, state, lr);
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    p -= lr * (m / (1 - std::pow(b1, t))) / (std::sqrt(v / (1 - std::pow(b2, t))) + eps);
    EXPECT_NEAR(params[0][0], p, 1e-14);
    // Second coordinate: constant gradient, bias-corrected moments equal g
    // and g^2, so each step moves by lr * g / (|g| + eps).
    EXPECT_NEAR(before - params[0][1], lr * 2.5 / (2.5 + eps), 1e-15);
  }
}

TEST(Adam, IdenticalBlocksGetIdenticalUpdates) {
  std::vector<Tensor> params{Tensor::vector({1, 2}), Tensor::vector({1, 2})};
  AdamState state;
  for (int t = 0; t < 10; ++t) {
    const std::vector<Tensor> grads{Tensor::vector({0.3, -t * 1.0}), Tensor::vector({0.3, -t * 1.0})};
    adam_step(params, grads, state, 0.05);
  }
  EXPECT_EQ(params[0], params[1]);
}

TEST(Adam, ShapeMismatch) {
  std::vector<Tensor> params{Tensor::vector({1, 2})};
  const std::vector<Tensor> grads{Tensor::vector({1, 2, 3})};
  AdamState state;
  EXPECT_THROW(adam_step(params, grads, state, 0.1), ShapeError);
}

TEST(Clip, BoundsNormAndKeepsDirection) {
  Rng rng = make_rng(4, "t");
  for (int t = 0; t < 50; ++t) {
    std::vector<Tensor> grads{Tensor(Shape{3, 3}, 0.0), Tensor(Shape{5}, 0.0)};
    for (Tensor& g : grads)
      for (double& v : g.data()) v = uniform(rng, -20, 20);
    const std::vector<Tensor> before = grads;
    const double pre = clip_global_norm(grads, 10.0);
    EXPECT_NEAR(pre, global_norm(before), 1e-12);
    EXPECT_LE(global_norm(grads), 10.0 + 1e-9);
    const double s = pre > 10 ? 10 / pre : 1.0;
    for (std::size_t b = 0; b < grads.size(); ++b)
      for (std::size_t i = 0; i < grads[b].size(); ++i) EXPECT_NEAR(grads[b][i], before[b][i] * s, 1e-12);
  }
  std::vector<Tensor> small{Tensor::vector({0.3, 0.4})};
  clip_global_norm(small, 10.0);
  EXPECT_EQ(small[0], Tensor::vector({0.3, 0.4}));
}

TEST(Schedule, StepDecayIsExact) {
  TrainConfig cfg;
  cfg.lr = 0.01;
  for (std::size_t e : {0u, 1u, 99u, 100u, 101u, 250u, 999u, 4999u}) {
    EXPECT_EQ(learning_rate(cfg, e), 0.01 * std::pow(0.9, std::floor(e / 100.0)));
  }
}

TEST(Config, Validation) {
  TrainConfig cfg;
  cfg.K = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = TrainConfig{};
  cfg.clip_norm = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = TrainConfig{};
  cfg.resample_every = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Train, ZeroLearningRateKeepsInitialization) {
  Rng rng = make_rng(5, "t");
  const FunctionSet set = make_dataset(Fidelity::Low, FunctionId::F4, 3, 2, rng);
  TrainConfig cfg = small_config(5);
  cfg.epochs = 1;
  cfg.lr = 0;
  const ModelSpec spec;
  const TrainResult r = train(spec, set, cfg);
  EXPECT_EQ(r.model, initial_model(spec, cfg));
  ASSERT_EQ(r.log.epochs.size(), 1u);
  EXPECT_GT(r.log.epochs[0].grad_norm_pre, 0.0);
}

TEST(Train, ZeroEpochsReturnsInitialization) {
  Rng rng = make_rng(6, "t");
  const FunctionSet set = make_dataset(Fidelity::High, FunctionId::F4, 2, 2, rng);
  TrainConfig cfg = small_config(6);
  cfg.epochs = 0;
  const TrainResult r = train(ModelSpec{}, set, cfg);
  EXPECT_EQ(r.model, initial_model(ModelSpec{}, cfg));
  EXPECT_TRUE(r.log.epochs.empty());
}

TEST(Train, DeterministicAcrossRunsAndThreadCounts) {
  Rng rng = make_rng(7, "t");
  const FunctionSet set = make_dataset(Fidelity::Low, FunctionId::F4, 3, 2, rng);
  TrainConfig cfg = small_config(7);
  const TrainResult a = train(ModelSpec{}, set, cfg);
  const TrainResult b = train(ModelSpec{}, set, cfg);
  cfg.threads = 3;
  const TrainResult c = train(ModelSpec{}, set, cfg);
  EXPECT_EQ(model_json_text(a.model), model_json_text(b.model));
  EXPECT_EQ(model_json_text(a.model), model_json_text(c.model));
  EXPECT_EQ(train_log_csv(a.log), train_log_csv(b.log));
  EXPECT_EQ(train_log_csv(a.log), train_log_csv(c.log));
  EXPECT_NE(a.model, initial_model(ModelSpec{}, cfg));
}

TEST(Train, LogShapesAndSchedule) {
  Rng rng = make_rng(8, "t");
  const FunctionSet set = make_dataset(Fidelity::Low, FunctionId::F4, 3, 2, rng);
  TrainConfig cfg = small_config(8);
  cfg.epochs = 5;
  cfg.decay_every = 2;
  cfg.clip_norm = 1e-3;
  const TrainResult r = train(ModelSpec{}, set, cfg);
  ASSERT_EQ(r.log.epochs.size(), 5u);
  for (const EpochLog& e : r.log.epochs) {
    EXPECT_EQ(e.lr, cfg.lr * std::pow(0.9, std::floor(e.epoch / 2.0)));
    EXPECT_EQ(e.function_losses.size(), 3u);
    EXPECT_LE(e.grad_norm_post, 1e-3 + 1e-12);
    double mean = 0;
    for (double f : e.function_losses) mean += f / 3;
    EXPECT_NEAR(e.mean_loss, mean, 1e-15);
  }
  const std::string csv = train_log_csv(r.log, "seed=8");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "# seed=8");
  EXPECT_NE(csv.find("epoch,mean_loss,grad_norm_pre,grad_norm_post,lr\n"), std::string::npos);
}

TEST(Train, Errors) {
  Rng rng = make_rng(9, "t");
  const FunctionSet set = make_dataset(Fidelity::High, FunctionId::F4, 2, 3, rng);
  EXPECT_THROW(train(ModelSpec{}, set, small_config(9)), ConfigError);  // D mismatch
  FunctionSet empty;
  EXPECT_THROW(train(ModelSpec{}, empty, small_config(9)), ConfigError);
  TrainConfig tiny = small_config(9);
  tiny.L = 3;
  tiny.D = 3;
  EXPECT_THROW(train(ModelSpec{}, set, tiny), ConfigError);
  FunctionSet huge = make_dataset(Fidelity::High, FunctionId::F4, 1, 2, rng);
  huge.resample = false;
  huge.instances[0].lower.assign(2, -1e300);
  huge.instances[0].upper.assign(2, 1e300);
  try {
    train(ModelSpec{}, huge, small_config(9));
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("epoch 0"), std::string::npos);
  }
}

TEST(GradientFidelity, DepthOneKernelsMatchFiniteDifferences) {
  Rng rng = make_rng(10, "t");
  int checked = 0;
  while (checked < 5) {
    const ObjectiveInstance f2 = sample_shift(FunctionId::F2, 2, rng);
    const DecnModel model = init_model(1, true, {3, 5, 7}, 0.5, rng);
    const PopulationGrid s0 = evaluate(init_population(4, f2, rng), f2);
    const oracle::GradientCheck g = oracle::check_kernel_gradients(model, s0, f2, 1e-5);
    if (g.branch_flip) continue;
    EXPECT_EQ(g.checked, 9u + 25u + 49u);
    EXPECT_LE(g.max_rel_error, 1e-4);
    ++checked;
  }
}

TEST(GradientFidelity, SharedBlockAccumulatesPerModuleGradients) {
  Rng rng = make_rng(11, "t");
  const ObjectiveInstance f4 = sample_shift(FunctionId::F4, 2, rng);
  const DecnModel shared = init_model(2, true, {3, 5, 7}, 0.5, rng);
  DecnModel tied = shared;
  tied.share_weights = false;
  tied.ems.push_back(tied.ems[0]);
  const PopulationGrid s0 = evaluate(init_population(5, f4, rng), f4);
  const auto gs = detail::run_training_task(shared, s0, f4);
  const auto gu = detail::run_training_task(tied, s0, f4);
  ASSERT_FALSE(gs.error);
  ASSERT_FALSE(gu.error);
  EXPECT_EQ(gs.loss, gu.loss);
  for (std::size_t k = 0; k < 3; ++k) {
    Tensor sum_blocks = gu.grads[k];
    sum_blocks += gu.grads[k + 3];
    EXPECT_LE(max_abs_diff(gs.grads[k], sum_blocks), 1e-12);
  }
  // The shared gradient itself agrees with central differences.
  const oracle::GradientCheck fd = oracle::check_kernel_gradients(shared, s0, f4, 1e-5);
  if (!fd.branch_flip) {
    EXPECT_LE(fd.max_rel_error, 1e-4);
  }
}

}  // namespace
}  // namespace decn
