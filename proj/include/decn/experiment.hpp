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

#ifndef DECN_EXPERIMENT_HPP
#define DECN_EXPERIMENT_HPP

// Experiment plumbing shared by the command-line tool and the acceptance
// suite: model presets, training suites, seeded repeat runs and
// equal-budget comparisons.

#include <cmath>
#include <cstdio>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "decn/baselines.hpp"
#include "decn/error.hpp"
#include "decn/evolution.hpp"
#include "decn/functions.hpp"
#include "decn/population.hpp"
#include "decn/random.hpp"
#include "decn/run_record.hpp"
#include "decn/training.hpp"

namespace decn {

struct Preset {
  ModelSpec spec;
  TrainConfig cfg;
};

/// Architectures and schedules of the reference models. All clip the
/// gradient norm at 10 and decay the learning rate by 0.9 every 100 epochs.
inline Preset make_preset(std::string_view name) {
  Preset p;
  p.cfg.lr_decay = 0.9;
  p.cfg.decay_every = 100;
  p.cfg.clip_norm = 10;
  p.cfg.resample_every = 10;
  p.cfg.L = 10;
  if (name == "ws3" || name == "custom") {
    p.spec.depth = 3;
    p.spec.share_weights = true;
    p.cfg.D = 2;
    p.cfg.K = 32;
    p.cfg.lr = 5e-4;
    p.cfg.epochs = 5000;
  } else if (name == "ws30") {
    p.spec.depth = 30;
    p.spec.share_weights = true;
    p.cfg.D = 10;
    p.cfg.K = 32;
    p.cfg.lr = 0.01;
    p.cfg.epochs = 10000;
  } else if (name == "nws15") {
    p.spec.depth = 15;
    p.spec.share_weights = false;
    p.cfg.D = 30;
    p.cfg.K = 16;
    p.cfg.lr = 5e-4;
    p.cfg.epochs = 2000;
  } else {
    throw ConfigError("unknown preset '" + std::string(name) + "' (ws3, ws30, nws15, custom)");
  }
  return p;
}

/// Training suite: `high:F4`..`high:F9`, `low`, `arm-sc` or `arm-cc`.
struct Suite {
  enum class Kind { High, Low, Arm } kind = Kind::High;
  FunctionId target = FunctionId::F4;
  ArmCase arm = ArmCase::SC;

  std::string name() const {
    switch (kind) {
      case Kind::High:
        return "high:" + to_string(target);
      case Kind::Low:
        return "low";
      case Kind::Arm:
        return arm == ArmCase::SC ? "arm-sc" : "arm-cc";
    }
    return {};
  }
};

inline Suite parse_suite(std::string_view s) {
  Suite suite;
  if (s == "low") {
    suite.kind = Suite::Kind::Low;
    return suite;
  }
  if (s == "arm-sc" || s == "arm-cc") {
    suite.kind = Suite::Kind::Arm;
    suite.arm = s == "arm-sc" ? ArmCase::SC : ArmCase::CC;
    suite.target = s == "arm-sc" ? FunctionId::ArmSC : FunctionId::ArmCC;
    return suite;
  }
  if (s.starts_with("high:")) {
    suite.target = parse_function_id(s.substr(5));
    const int t = static_cast<int>(suite.target);
    if (t < static_cast<int>(FunctionId::F4) || t > static_cast<int>(FunctionId::F9)) {
      throw ConfigError("high-fidelity suites target F4..F9");
    }
    return suite;
  }
  throw ConfigError("unknown suite '" + std::string(s) + "' (high:<F4..F9>, low, arm-sc, arm-cc)");
}

struct ArmSetup {
  std::size_t segments = 10;
  double radius = 100;
};

/// Training functions of a suite. For arm suites `dim` is ignored and the
/// dimension follows from the segment count.
inline FunctionSet build_training_set(const Suite& suite, std::size_t count, std::size_t dim,
                                      std::uint64_t seed, const ArmSetup& arm = {}) {
  Rng rng = make_rng(seed, "dataset");
  switch (suite.kind) {
    case Suite::Kind::High:
      return make_dataset(Fidelity::High, suite.target, count, dim, rng);
    case Suite::Kind::Low:
      return make_dataset(Fidelity::Low, FunctionId::F4, count, dim, rng);
    case Suite::Kind::Arm:
      return make_arm_dataset(suite.arm, arm.segments, count, arm.radius, rng);
  }
  throw ConfigError("unhandled suite");
}

/// Decision-space dimension of a suite's instances.
inline std::size_t suite_dim(const Suite& suite, std::size_t dim, const ArmSetup& arm) {
  if (suite.kind != Suite::Kind::Arm) return dim;
  return suite.arm == ArmCase::SC ? arm.segments : 2 * arm.segments;
}

/// Evaluation budget of a model run: one pass for S0 plus one per module.
inline std::uint64_t decn_budget(std::size_t L, std::size_t depth) {
  return static_cast<std::uint64_t>(L) * L * (depth + 1);
}

/// Initial population of repeat `r`, shared by every algorithm compared on it.
inline PopulationGrid repeat_population(std::size_t L, const ObjectiveInstance& inst,
                                        std::uint64_t seed, std::size_t r) {
  Rng rng = make_rng(seed, "run-init", r);
  return init_population(L, inst, rng);
}

inline RunRecord run_decn(const DecnModel& model, const ObjectiveInstance& inst, std::size_t L,
                          std::uint64_t seed, std::size_t r) {
  DecnRun run = decn_run(repeat_population(L, inst, seed, r), model, inst);
  run.record.seed = seed;
  return run.record;
}

inline RunRecord run_de(const ObjectiveInstance& inst, std::size_t pop_size, std::uint64_t budget,
                        std::uint64_t seed, std::size_t r, double F = 0.5, double CR = 0.9) {
  Rng rng = make_rng(seed, "de", r);
  DeConfig cfg{pop_size, F, CR, budget, seed};
  RunRecord rec = de_rand_1_bin(inst, cfg, rng).record;
  return rec;
}

inline RunRecord run_random(const ObjectiveInstance& inst, std::uint64_t budget,
                            std::size_t chunk, std::uint64_t seed, std::size_t r) {
  Rng rng = make_rng(seed, "random", r);
  RunRecord rec = random_search(inst, budget, rng, chunk).record;
  rec.seed = seed;
  return rec;
}

/// Held-out test instances for repeat runs, drawn from their own stream.
inline std::vector<ObjectiveInstance> test_instances(FunctionId id, std::size_t dim,
                                                     std::size_t count, std::uint64_t seed) {
  Rng rng = make_rng(seed, "test-shifts");
  std::vector<ObjectiveInstance> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(sample_shift(id, dim, rng));
  return out;
}

inline std::vector<ObjectiveInstance> test_arm_instances(ArmCase c, std::size_t segments,
                                                         std::size_t count, double radius,
                                                         std::uint64_t seed) {
  Rng rng = make_rng(seed, "test-targets");
  std::vector<ObjectiveInstance> out;
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(arm_instance(c, segments, sample_disk(radius, rng), radius));
  }
  return out;
}

struct Stats {
  double mean = 0;
  double std = 0;  // sample standard deviation; 0 for a single value
};

inline Stats mean_std(const std::vector<double>& v) {
  Stats s;
  if (v.empty()) return s;
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return s;
}

/// Summary of repeat runs of one algorithm.
struct Summary {
  std::string algorithm;
  std::string function;
  std::size_t D = 0;
  std::size_t L = 0;
  std::size_t repeats = 0;
  std::uint64_t budget = 0;
  std::uint64_t seed = 0;
  std::vector<double> final_best;

  nlohmann::json to_json() const {
    const Stats s = mean_std(final_best);
    return {{"algorithm", algorithm}, {"function", function},   {"D", D},
            {"L", L},                 {"repeats", repeats},     {"budget", budget},
            {"final_best_mean", s.mean}, {"final_best_std", s.std}, {"seed", seed}};
  }
};

/// "mean(std)" as printed in result tables.
inline std::string mean_std_text(const std::vector<double>& v) {
  const Stats s = mean_std(v);
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.4g(%.3g)", s.mean, s.std);
  return buf;
}

}  // namespace decn

#endif  // DECN_EXPERIMENT_HPP
