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

// Acceptance harness: one PASS/FAIL line per criterion on stdout, progress
// on stderr. Exit status is non-zero if any gate fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "decn/decn.hpp"
#include "decn_cli.hpp"
#include "oracles.hpp"

namespace {

using namespace decn;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void progress(const std::string& msg) { std::cerr << "  .. " << msg << std::endl; }

constexpr std::size_t kSeeds = 10;
constexpr std::uint64_t kTestSeed = 2024;

// 1 -------------------------------------------------------------------------

Verdict gradient_fidelity() {
  const auto t0 = Clock::now();
  Rng rng = make_rng(1, "acceptance-gradient");
  double worst = 0;
  std::size_t accepted = 0, resampled = 0, checked = 0;
  while (accepted < 20) {
    const ObjectiveInstance f2 = sample_shift(FunctionId::F2, 2, rng);
    const DecnModel model = init_model(1, true, {3, 5, 7}, 0.5, rng);
    const PopulationGrid s0 = evaluate(init_population(4, f2, rng), f2);
    const oracle::GradientCheck g = oracle::check_kernel_gradients(model, s0, f2, 1e-5);
    if (g.branch_flip) {
      ++resampled;
      continue;
    }
    worst = std::max(worst, g.max_rel_error);
    checked += g.checked;
    ++accepted;
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-4 && secs < 10,
          fmt("20 instances, %zu kernel weights, max rel err %.2e (<= 1e-4), %zu resampled for "
              "branch flips, %.2fs (< 10s)",
              checked, worst, resampled, secs)};
}

// 2 -------------------------------------------------------------------------

Verdict conv_oracle() {
  Rng rng = make_rng(2, "acceptance-conv");
  double worst = 0;
  for (int t = 0; t < 50; ++t) {
    const std::size_t L = 4 + uniform_index(rng, 5);  // 7x7 kernels need L >= 4
    const std::size_t D = 1 + uniform_index(rng, 4);
    const ObjectiveInstance inst = sample_shift(static_cast<FunctionId>(3 + t % 6), D, rng);
    const DecnModel model = init_model(1, true, {3, 5, 7}, 0.5, rng);
    const SortedGrid s = sort_descending(evaluate(init_population(L, inst, rng), inst));
    const PopulationGrid off = crm_forward(s.grid, model.ems[0]);
    const Tensor ref = oracle::crm(s.grid.decisions.value(), model.ems[0].kernel_set.kernels,
                                   inst.lower, inst.upper);
    worst = std::max(worst, max_abs_diff(off.decisions.value(), ref));
  }
  return {worst <= 1e-10, fmt("50 grids (L 4..8, D 1..4), max abs diff %.2e (<= 1e-10)", worst)};
}

// 3 -------------------------------------------------------------------------

Verdict selection_oracle() {
  Rng rng = make_rng(3, "acceptance-select");
  std::size_t mismatches = 0, ties = 0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t L = 1 + uniform_index(rng, 8);
    const std::size_t D = 1 + uniform_index(rng, 4);
    const ObjectiveInstance inst = sample_shift(FunctionId::F4, D, rng);
    const PopulationGrid parent = evaluate(init_population(L, inst, rng), inst);
    PopulationGrid off = evaluate(init_population(L, inst, rng), inst);
    Tensor f = off.fitness_values();
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (uniform_index(rng, 4) == 0) {
        f[i] = parent.fitness_values()[i];
        ++ties;
      }
    }
    off.fitness = Var(f);
    const PopulationGrid out = sm_select(parent, off);
    const oracle::Selected ref = oracle::select(parent.decisions.value(), parent.fitness_values(),
                                                off.decisions.value(), off.fitness_values());
    mismatches += !(out.decisions.value() == ref.decisions) || !(out.fitness_values() == ref.fitness);
  }
  return {mismatches == 0, fmt("100 grid pairs, %zu forced ties, %zu mismatches (exact)", ties, mismatches)};
}

// 4 -------------------------------------------------------------------------

Verdict elitism() {
  Rng rng = make_rng(4, "acceptance-elitism");
  std::size_t violations = 0, generations = 0;
  for (int t = 0; t < 100; ++t) {
    const auto id = static_cast<FunctionId>(3 + t % 6);
    const std::size_t D = t % 2 ? 10 : 2;
    const ObjectiveInstance inst = sample_shift(id, D, rng);
    const DecnModel model =
        init_model(1 + uniform_index(rng, 6), uniform_index(rng, 2) == 0, {3, 5, 7}, 0.5, rng);
    const DecnRun run = decn_run(init_population(10, inst, rng), model, inst);
    for (std::size_t g = 1; g < run.record.entries.size(); ++g) {
      ++generations;
      violations += run.record.entries[g].best > run.record.entries[g - 1].best;
    }
  }
  return {violations == 0,
          fmt("100 runs (F4-F9, D in {2,10}), %zu generations, %zu violations", generations, violations)};
}

// Training runs shared by criteria 5-8 ------------------------------------

struct TrainedRuns {
  std::vector<TrainResult> runs;
  Preset preset;
};

TrainedRuns train_high_fidelity() {
  TrainedRuns out;
  out.preset = make_preset("ws3");
  out.preset.cfg.D = 10;
  out.preset.cfg.K = 16;
  out.preset.cfg.epochs = 500;
  out.preset.spec.suite = "high:F4";
  for (std::size_t s = 1; s <= kSeeds; ++s) {
    const auto t0 = Clock::now();
    TrainConfig cfg = out.preset.cfg;
    cfg.seed = s;
    const FunctionSet data = build_training_set(parse_suite("high:F4"), 4, 10, s);
    out.runs.push_back(train(out.preset.spec, data, cfg));
    progress(fmt("high-fidelity F4 training, seed %zu: %.1fs", s, seconds_since(t0)));
  }
  return out;
}

TrainedRuns train_low_fidelity() {
  TrainedRuns out;
  out.preset = make_preset("ws3");  // D=2, K=32, 5000 epochs, lr 5e-4
  out.preset.spec.suite = "low";
  for (std::size_t s = 1; s <= kSeeds; ++s) {
    const auto t0 = Clock::now();
    TrainConfig cfg = out.preset.cfg;
    cfg.seed = s;
    const FunctionSet data = build_training_set(parse_suite("low"), 3, 2, s);
    out.runs.push_back(train(out.preset.spec, data, cfg));
    progress(fmt("low-fidelity training, seed %zu: %.1fs", s, seconds_since(t0)));
  }
  return out;
}

// 5 -------------------------------------------------------------------------

Verdict high_fidelity_trend(const TrainedRuns& high) {
  const DecnModel& model = high.runs[0].model;
  const FunctionSet data = build_training_set(parse_suite("high:F4"), 4, 10, 1);
  Rng rng = make_rng(kTestSeed, "held-out");
  const auto tests = make_held_out(data, 10, 10, rng);
  std::size_t beat_de = 0, beat_rs = 0, beat_both = 0;
  std::vector<double> d_f, e_f, r_f;
  for (std::size_t r = 0; r < tests.size(); ++r) {
    const double d = run_decn(model, tests[r], 10, kTestSeed, r).final_best();
    const double e = run_de(tests[r], 100, 400, kTestSeed, r).final_best();
    const double s = run_random(tests[r], 400, 100, kTestSeed, r).final_best();
    beat_de += d < e;
    beat_rs += d < s;
    beat_both += d < e && d < s;
    d_f.push_back(d);
    e_f.push_back(e);
    r_f.push_back(s);
  }
  return {beat_both >= 8,
          fmt("ws3 F4 D=10, 400 FE: DECN beats DE %zu/10, random %zu/10, both %zu/10 (>= 8); "
              "final best DECN %s DE %s random %s",
              beat_de, beat_rs, beat_both, mean_std_text(d_f).c_str(), mean_std_text(e_f).c_str(),
              mean_std_text(r_f).c_str())};
}

// 6 -------------------------------------------------------------------------

Verdict low_fidelity_transfer(const TrainedRuns& low) {
  const DecnModel& trained = low.runs[0].model;
  TrainConfig cfg = low.preset.cfg;
  cfg.seed = 1;
  const DecnModel untrained = initial_model(low.preset.spec, cfg);
  std::string detail;
  bool pass = true;
  for (FunctionId id : {FunctionId::F4, FunctionId::F7}) {
    const auto tests = test_instances(id, 2, 10, kTestSeed);
    std::size_t wins = 0;
    std::vector<double> a_f, b_f;
    for (std::size_t r = 0; r < tests.size(); ++r) {
      const double a = run_decn(trained, tests[r], 10, kTestSeed, r).final_best();
      const double b = run_decn(untrained, tests[r], 10, kTestSeed, r).final_best();
      wins += a < b;
      a_f.push_back(a);
      b_f.push_back(b);
    }
    pass = pass && wins >= 8;
    detail += fmt("%s: trained beats untrained %zu/10 (>= 8), %s vs %s; ", to_string(id).c_str(), wins,
                  mean_std_text(a_f).c_str(), mean_std_text(b_f).c_str());
  }
  detail += "trained on F1-F3 at D=2, 5000 epochs, K=32";
  return {pass, detail};
}

// 7 -------------------------------------------------------------------------

Verdict generalization(const TrainedRuns& low) {
  const DecnModel& model = low.runs[0].model;
  std::size_t ran = 0, failures = 0;
  for (std::size_t D : {10u, 100u}) {
    for (std::size_t L : {6u, 20u}) {
      for (FunctionId id : {FunctionId::F4, FunctionId::F7}) {
        try {
          const auto tests = test_instances(id, D, 2, kTestSeed);
          for (std::size_t r = 0; r < tests.size(); ++r) {
            const RunRecord rec = run_decn(model, tests[r], L, kTestSeed, r);
            failures += rec.final_evals() != L * L * (model.depth + 1);
            ++ran;
          }
        } catch (const std::exception& e) {
          ++failures;
          progress(std::string("generalization run failed: ") + e.what());
        }
      }
    }
  }
  const auto tests = test_instances(FunctionId::F4, 10, 10, kTestSeed);
  std::size_t wins = 0;
  for (std::size_t r = 0; r < tests.size(); ++r) {
    const double d = run_decn(model, tests[r], 10, kTestSeed, r).final_best();
    const double s = run_random(tests[r], 400, 100, kTestSeed, r).final_best();
    wins += d < s;
  }
  return {failures == 0 && wins >= 7,
          fmt("%zu runs at D in {10,100} x L in {6,20}, %zu failures; F4 D=10 L=10 beats random "
              "%zu/10 (>= 7)",
              ran, failures, wins)};
}

// 8 -------------------------------------------------------------------------

Verdict loss_decrease(const TrainedRuns& high, const TrainedRuns& low) {
  auto decreased = [](const TrainedRuns& t) {
    std::size_t n = 0;
    for (const TrainResult& r : t.runs) n += r.log.epochs.back().mean_loss < r.log.epochs.front().mean_loss;
    return n;
  };
  auto lr_exact = [](const TrainedRuns& t) {
    for (const TrainResult& r : t.runs) {
      for (const EpochLog& e : r.log.epochs) {
        const double expected =
            t.preset.cfg.lr * std::pow(0.9, std::floor(static_cast<double>(e.epoch) / 100.0));
        if (e.lr != expected) return false;
      }
    }
    return true;
  };
  const std::size_t h = decreased(high), l = decreased(low);
  const bool lr_ok = lr_exact(high) && lr_exact(low);
  return {h >= 9 && l >= 9 && lr_ok,
          fmt("final < first epoch loss: high-fidelity %zu/10, low-fidelity %zu/10 (>= 9); lr trace "
              "exact: %s",
              h, l, lr_ok ? "yes" : "no")};
}

// 9 -------------------------------------------------------------------------

Verdict fe_accounting() {
  Rng rng = make_rng(9, "acceptance-fe");
  std::size_t checks = 0, bad = 0;
  for (std::size_t L : {1u, 4u, 5u, 10u, 12u}) {
    for (std::size_t k = 1; k <= 6; ++k) {
      const ObjectiveInstance inst = sample_shift(FunctionId::F9, 3, rng);
      const DecnModel model = init_model(k, k % 2 == 0, {3, 5, 7}, 0.5, rng);
      const DecnRun run = decn_run(init_population(L, inst, rng), model, inst);
      bad += run.final.eval_count != L * L * (k + 1) || run.record.final_evals() != L * L * (k + 1);
      ++checks;
    }
  }
  for (std::uint64_t budget : {100u, 150u, 400u, 1000u, 1234u}) {
    const ObjectiveInstance inst = sample_shift(FunctionId::F4, 10, rng);
    bad += run_de(inst, 100, budget, 9, budget).final_evals() != budget;
    bad += run_random(inst, budget, 100, 9, budget).final_evals() != budget;
    checks += 2;
  }
  return {bad == 0, fmt("%zu exact-count checks (DECN L^2(k+1), DE and random budgets), %zu off", checks, bad)};
}

// 10 ------------------------------------------------------------------------

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "decn");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (code != 0) progress("cli failed: " + err.str());
  return code;
}

void run_pipeline(const fs::path& dir) {
  const std::string m = (dir / "model.json").string();
  cli({"train", "--preset", "ws3", "--suite", "low", "--dim", "2", "--epochs", "20", "--K", "4",
       "--seed", "11", "-o", m});
  cli({"run", "-m", m, "--function", "F7", "--dim", "5", "--repeats", "3", "--seed", "11", "--out",
       (dir / "run").string()});
  cli({"compare", "-m", m, "--function", "F4", "--dim", "10", "--repeats", "2", "--seed", "11", "--out",
       (dir / "compare").string()});
  cli({"arm", "--case", "sc", "--n", "4", "--r", "30", "--targets", "6", "--test-targets", "2", "--epochs",
       "3", "--K", "2", "--seed", "11", "--out", (dir / "arm").string()});
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = read_file(e.path());
  }
  return files;
}

// Both pipelines use the same directory so recorded model paths agree.
Verdict determinism() {
  const fs::path root = fs::temp_directory_path() / "decn_acceptance_determinism";
  fs::remove_all(root);
  run_pipeline(root);
  const auto first = snapshot(root);
  fs::remove_all(root);
  run_pipeline(root);
  const auto second = snapshot(root);
  std::size_t differ = 0;
  for (const auto& [name, text] : first) {
    const auto it = second.find(name);
    differ += it == second.end() || it->second != text;
  }
  differ += second.size() > first.size() ? second.size() - first.size() : 0;
  return {first.size() >= 20 && differ == 0,
          fmt("train/run/compare/arm twice with seed 11: %zu files (model, logs, RunRecord CSVs, "
              "summaries), %zu differ",
              first.size(), differ)};
}

// 11 ------------------------------------------------------------------------

Verdict arm_reference() {
  // Full-scale configuration at reduced training: n=100, r=100, FE=1000.
  const fs::path root = fs::temp_directory_path() / "decn_acceptance_arm";
  fs::remove_all(root);
  const auto t0 = Clock::now();
  const int full = cli({"arm", "--case", "sc", "--n", "100", "--r", "100", "--train-r", "1000",
                        "--targets", "16", "--test-targets", "8", "--epochs", "5", "--K", "2", "--fe",
                        "1000", "--seed", "5", "--out", (root / "full").string()});
  bool full_ok = full == 0;
  double full_mean = NAN;
  if (full_ok) {
    const auto j = nlohmann::json::parse(read_file(root / "full" / "summary.json"));
    full_ok = j["budget"] == 1000 && j["algorithms"][0]["D"] == 100;
    full_mean = j["algorithms"][0]["final_best_mean"].get<double>();
  }
  progress(fmt("full-scale arm configuration: %.1fs", seconds_since(t0)));

  // Desk-scale gate: n=10, r=100, 64 training targets.
  const auto t1 = Clock::now();
  Preset p = make_preset("ws3");
  p.cfg.D = 10;
  p.cfg.K = 2;
  p.cfg.epochs = 500;
  p.cfg.lr = 0.01;
  p.cfg.seed = 1;
  p.spec.suite = "arm-sc";
  const ArmSetup setup{10, 100};
  const TrainResult trained =
      train(p.spec, build_training_set(parse_suite("arm-sc"), 64, 10, 1, setup), p.cfg);
  progress(fmt("arm SC desk-scale training: %.1fs", seconds_since(t1)));
  const auto tests = test_arm_instances(ArmCase::SC, 10, 10, 100, kTestSeed);
  std::size_t wins = 0;
  std::vector<double> d_f, r_f;
  for (std::size_t r = 0; r < tests.size(); ++r) {
    const double d = run_decn(trained.model, tests[r], 10, kTestSeed, r).final_best();
    const double s = run_random(tests[r], 400, 100, kTestSeed, r).final_best();
    wins += d < s;
    d_f.push_back(d);
    r_f.push_back(s);
  }
  return {full_ok && wins >= 8,
          fmt("n=100 r=100 FE=1000 runs end to end: %s (DECN mean distance %.3g after 5 epochs; "
              "full-scale reference 0.42(0.22)); desk gate n=10 r=100 64 targets: DECN beats random "
              "%zu/10 (>= 8), distance %s vs %s",
              full_ok ? "yes" : "no", full_mean, wins, mean_std_text(d_f).c_str(),
              mean_std_text(r_f).c_str())};
}

}  // namespace

int main() {
  std::vector<std::pair<std::string, Verdict>> results;
  auto record = [&](const std::string& name, const std::function<Verdict()>& fn) {
    const auto t0 = Clock::now();
    progress("running " + name);
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    v.detail += fmt(" [%.1fs]", seconds_since(t0));
    results.emplace_back(name, v);
  };

  record("C1 gradient fidelity", gradient_fidelity);
  record("C2 conv oracle equivalence", conv_oracle);
  record("C3 selection oracle equivalence", selection_oracle);
  record("C4 elitism invariant", elitism);

  progress("training 10 high-fidelity and 10 low-fidelity models");
  const TrainedRuns high = train_high_fidelity();
  const TrainedRuns low = train_low_fidelity();

  record("C5 high-fidelity trend", [&] { return high_fidelity_trend(high); });
  record("C6 low-fidelity transfer", [&] { return low_fidelity_transfer(low); });
  record("C7 dimension/scale generalization", [&] { return generalization(low); });
  record("C8 loss decrease and lr schedule", [&] { return loss_decrease(high, low); });
  record("C9 FE accounting", fe_accounting);
  record("C10 determinism", determinism);
  record("C11 arm reference and desk-scale gate", arm_reference);

  std::size_t failed = 0;
  for (const auto& [name, v] : results) {
    std::cout << (v.pass ? "PASS " : "FAIL ") << name << ": " << v.detail << "\n";
    failed += !v.pass;
  }
  std::cout << (failed ? "FAILED " : "ALL PASSED ") << results.size() - failed << "/" << results.size()
            << " criteria\n";
  return failed ? 1 : 0;
}
