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

#ifndef DECN_TOOLS_DECN_CLI_HPP
#define DECN_TOOLS_DECN_CLI_HPP

// Command-line front end. Exit codes: 0 success, 1 usage or configuration
// error, 2 numeric failure.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "decn/decn.hpp"

namespace decn::cli {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumeric = 2;

struct TrainOptions {
  std::string preset = "ws3";
  std::string suite = "low";
  std::optional<std::size_t> dim, L, K, epochs, depth, count;
  std::optional<double> lr;
  bool unshared = false;
  std::size_t segments = 10;
  double radius = 100;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
  std::string output = "model.json";
  std::string log;
};

struct RunOptions {
  std::string model;
  std::string function = "F4";
  std::size_t dim = 10;
  std::size_t L = 10;
  std::size_t repeats = 10;
  std::optional<std::size_t> depth;
  std::uint64_t seed = 0;
  std::string out = "run_out";
};

struct CompareOptions {
  RunOptions run;
  std::optional<std::uint64_t> budget;
  double de_f = 0.5;
  double de_cr = 0.9;
};

struct ArmOptions {
  std::string arm_case = "sc";
  std::size_t segments = 10;
  double radius = 100;
  std::optional<double> train_radius;
  std::size_t targets = 64;
  std::size_t test_targets = 64;
  std::string preset = "ws3";
  std::optional<std::size_t> epochs, K;
  std::optional<double> lr;
  std::size_t L = 10;
  std::optional<std::uint64_t> fe;
  std::string model;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
  std::string out = "arm_out";
};

struct DumpOptions {
  std::string model;
  std::string out = "kernels";
};

struct SweepOptions {
  std::string function = "F4";
  std::size_t dim = 10;
  std::size_t pop = 100;
  std::uint64_t budget = 400;
  std::size_t repeats = 3;
  double step = 0.05;
  std::uint64_t seed = 0;
  std::string output = "de_sweep.csv";
};

namespace detail {

inline FunctionId benchmark_function(const std::string& name) {
  const FunctionId id = parse_function_id(name);
  if (is_arm(id)) throw ConfigError("use the arm command for arm instances");
  return id;
}

inline DecnModel model_for_run(const std::string& path, std::optional<std::size_t> depth) {
  if (path.empty()) throw ConfigError("a model file is required (-m)");
  if (!fs::exists(path)) throw ConfigError("model file not found: " + path);
  DecnModel model = load_model(path);
  if (depth) {
    if (!model.share_weights) throw ConfigError("--depth applies only to shared-weight models");
    model.depth = *depth;
  }
  return model;
}

inline void check_lattice(const DecnModel& model, std::size_t L, std::size_t dim) {
  if (dim == 0) throw ConfigError("dimension must be positive");
  if (L == 0 || (L > 1 && L < model.min_side())) {
    throw ConfigError("L=" + std::to_string(L) + " is below the kernel minimum " +
                      std::to_string(model.min_side()));
  }
}

inline void write_json(const fs::path& path, const nlohmann::json& j) {
  write_file_atomic(path, j.dump(2) + "\n");
}

}  // namespace detail

inline int cmd_train(const TrainOptions& o, std::ostream& out) {
  Preset p = make_preset(o.preset);
  const Suite suite = parse_suite(o.suite);
  if (o.preset == "custom") {
    if (o.depth) p.spec.depth = *o.depth;
    p.spec.share_weights = !o.unshared;
  } else if (o.depth || o.unshared) {
    throw ConfigError("--depth and --unshared require --preset custom");
  }
  if (o.dim) p.cfg.D = *o.dim;
  if (o.L) p.cfg.L = *o.L;
  if (o.K) p.cfg.K = *o.K;
  if (o.epochs) p.cfg.epochs = *o.epochs;
  if (o.lr) p.cfg.lr = *o.lr;
  p.cfg.seed = o.seed;
  p.cfg.threads = o.threads;
  p.spec.suite = suite.name();
  const ArmSetup arm{o.segments, o.radius};
  p.cfg.D = suite_dim(suite, p.cfg.D, arm);
  const std::size_t count =
      o.count.value_or(suite.kind == Suite::Kind::Low ? 3 : (suite.kind == Suite::Kind::Arm ? 64 : 4));

  const FunctionSet dataset = build_training_set(suite, count, p.cfg.D, o.seed, arm);
  const TrainResult result = train(p.spec, dataset, p.cfg);
  save_model(result.model, o.output);
  const std::string log_path = o.log.empty() ? fs::path(o.output).replace_extension(".log.csv").string() : o.log;
  const std::string meta = "preset=" + o.preset + " suite=" + suite.name() +
                           " D=" + std::to_string(p.cfg.D) + " L=" + std::to_string(p.cfg.L) +
                           " K=" + std::to_string(p.cfg.K) + " epochs=" + std::to_string(p.cfg.epochs) +
                           " lr=" + format_double(p.cfg.lr) + " count=" + std::to_string(count) +
                           " seed=" + std::to_string(o.seed);
  write_file_atomic(log_path, train_log_csv(result.log, meta));
  if (result.log.epochs.empty()) {
    out << "no training epochs; wrote initialized model to " << o.output << "\n";
  } else {
    out << "final mean loss " << format_double(result.log.epochs.back().mean_loss) << "\n";
  }
  return kExitOk;
}

inline int cmd_run(const RunOptions& o, std::ostream& out) {
  const DecnModel model = detail::model_for_run(o.model, o.depth);
  const FunctionId id = detail::benchmark_function(o.function);
  detail::check_lattice(model, o.L, o.dim);
  if (o.repeats == 0) throw ConfigError("--repeats must be positive");
  const auto instances = test_instances(id, o.dim, o.repeats, o.seed);
  Summary sum{"decn", to_string(id), o.dim, o.L, o.repeats, decn_budget(o.L, model.depth), o.seed, {}};
  for (std::size_t r = 0; r < o.repeats; ++r) {
    RunRecord rec = run_decn(model, instances[r], o.L, o.seed, r);
    rec.model_path = o.model;
    write_file_atomic(fs::path(o.out) / ("decn_" + std::to_string(r) + ".csv"), run_csv(rec));
    sum.final_best.push_back(rec.final_best());
  }
  detail::write_json(fs::path(o.out) / "summary.json", sum.to_json());
  out << "decn " << to_string(id) << " D=" << o.dim << ": " << mean_std_text(sum.final_best) << "\n";
  return kExitOk;
}

inline int cmd_compare(const CompareOptions& o, std::ostream& out) {
  const RunOptions& r = o.run;
  const DecnModel model = detail::model_for_run(r.model, r.depth);
  const FunctionId id = detail::benchmark_function(r.function);
  detail::check_lattice(model, r.L, r.dim);
  if (r.repeats == 0) throw ConfigError("--repeats must be positive");
  const std::uint64_t budget = decn_budget(r.L, model.depth);
  if (o.budget && *o.budget != budget) {
    throw ConfigError("inconsistent budgets: the model spends " + std::to_string(budget) +
                      " evaluations but --budget is " + std::to_string(*o.budget));
  }
  const std::size_t pop = r.L * r.L;
  if (pop < 4) throw ConfigError("DE needs a population of at least 4 (L >= 2)");
  const auto instances = test_instances(id, r.dim, r.repeats, r.seed);
  std::vector<Summary> rows;
  for (const char* name : {"decn", "de", "random"}) {
    rows.push_back({name, to_string(id), r.dim, r.L, r.repeats, budget, r.seed, {}});
  }
  std::size_t beats_de = 0, beats_random = 0;
  for (std::size_t i = 0; i < r.repeats; ++i) {
    RunRecord d = run_decn(model, instances[i], r.L, r.seed, i);
    d.model_path = r.model;
    RunRecord e = run_de(instances[i], pop, budget, r.seed, i, o.de_f, o.de_cr);
    RunRecord s = run_random(instances[i], budget, pop, r.seed, i);
    e.side = s.side = r.L;
    const std::string tag = "_" + std::to_string(i) + ".csv";
    write_file_atomic(fs::path(r.out) / ("decn" + tag), run_csv(d));
    write_file_atomic(fs::path(r.out) / ("de" + tag), run_csv(e));
    write_file_atomic(fs::path(r.out) / ("random" + tag), run_csv(s));
    rows[0].final_best.push_back(d.final_best());
    rows[1].final_best.push_back(e.final_best());
    rows[2].final_best.push_back(s.final_best());
    beats_de += d.final_best() < e.final_best();
    beats_random += d.final_best() < s.final_best();
  }
  nlohmann::json j = {{"function", to_string(id)}, {"D", r.dim}, {"L", r.L},
                      {"budget", budget}, {"repeats", r.repeats}, {"seed", r.seed},
                      {"model", r.model}, {"de", {{"F", o.de_f}, {"CR", o.de_cr}}}};
  j["algorithms"] = nlohmann::json::array();
  for (const Summary& s : rows) {
    j["algorithms"].push_back(s.to_json());
    out << s.algorithm << ": " << mean_std_text(s.final_best) << "\n";
  }
  j["paired"] = {{"decn_beats_de", beats_de}, {"decn_beats_random", beats_random}};
  detail::write_json(fs::path(r.out) / "summary.json", j);
  return kExitOk;
}

inline int cmd_arm(const ArmOptions& o, std::ostream& out) {
  const ArmCase arm_case = parse_arm_case(o.arm_case);
  const Suite suite = parse_suite(arm_case == ArmCase::SC ? "arm-sc" : "arm-cc");
  const ArmSetup setup{o.segments, o.train_radius.value_or(o.radius)};
  DecnModel model;
  if (!o.model.empty()) {
    model = detail::model_for_run(o.model, std::nullopt);
  } else {
    Preset p = make_preset(o.preset);
    if (o.epochs) p.cfg.epochs = *o.epochs;
    if (o.K) p.cfg.K = *o.K;
    if (o.lr) p.cfg.lr = *o.lr;
    p.cfg.L = o.L;
    p.cfg.seed = o.seed;
    p.cfg.threads = o.threads;
    p.cfg.D = suite_dim(suite, 0, setup);
    p.spec.suite = suite.name();
    const FunctionSet dataset = build_training_set(suite, o.targets, p.cfg.D, o.seed, setup);
    const TrainResult result = train(p.spec, dataset, p.cfg);
    model = result.model;
    save_model(model, fs::path(o.out) / "model.json");
    write_file_atomic(fs::path(o.out) / "train_log.csv", train_log_csv(result.log));
  }
  if (o.fe) {
    const std::uint64_t per_pass = static_cast<std::uint64_t>(o.L) * o.L;
    if (*o.fe < 2 * per_pass) throw ConfigError("--fe must allow at least one module");
    if (!model.share_weights) throw ConfigError("--fe requires a shared-weight model");
    model.depth = static_cast<std::size_t>(*o.fe / per_pass - 1);
  }
  const std::size_t dim = suite_dim(suite, 0, {o.segments, o.radius});
  detail::check_lattice(model, o.L, dim);
  const std::uint64_t budget = decn_budget(o.L, model.depth);
  const auto tests = test_arm_instances(arm_case, o.segments, o.test_targets, o.radius, o.seed);
  std::vector<Summary> rows;
  for (const char* name : {"decn", "de", "random"}) {
    rows.push_back({name, suite.name(), dim, o.L, tests.size(), budget, o.seed, {}});
  }
  std::size_t beats_random = 0, beats_de = 0;
  for (std::size_t i = 0; i < tests.size(); ++i) {
    const RunRecord d = run_decn(model, tests[i], o.L, o.seed, i);
    const RunRecord e = run_de(tests[i], o.L * o.L, budget, o.seed, i);
    const RunRecord s = run_random(tests[i], budget, o.L * o.L, o.seed, i);
    const std::string tag = "_" + std::to_string(i) + ".csv";
    write_file_atomic(fs::path(o.out) / "runs" / ("decn" + tag), run_csv(d));
    write_file_atomic(fs::path(o.out) / "runs" / ("de" + tag), run_csv(e));
    write_file_atomic(fs::path(o.out) / "runs" / ("random" + tag), run_csv(s));
    rows[0].final_best.push_back(d.final_best());
    rows[1].final_best.push_back(e.final_best());
    rows[2].final_best.push_back(s.final_best());
    beats_de += d.final_best() < e.final_best();
    beats_random += d.final_best() < s.final_best();
  }
  nlohmann::json j = {{"case", o.arm_case}, {"segments", o.segments}, {"r", o.radius},
                      {"budget", budget},   {"targets", o.targets},   {"test_targets", tests.size()},
                      {"seed", o.seed}};
  j["algorithms"] = nlohmann::json::array();
  for (const Summary& s : rows) {
    j["algorithms"].push_back(s.to_json());
    out << s.algorithm << " distance: " << mean_std_text(s.final_best) << "\n";
  }
  j["paired"] = {{"decn_beats_de", beats_de}, {"decn_beats_random", beats_random}};
  detail::write_json(fs::path(o.out) / "summary.json", j);
  return kExitOk;
}

/// One CSV per (module, kernel size). A shared model emits its single block
/// once, annotated with the depth it is applied for.
inline int cmd_dump_kernels(const DumpOptions& o, std::ostream& out) {
  const DecnModel model = detail::model_for_run(o.model, std::nullopt);
  std::size_t files = 0;
  for (std::size_t e = 0; e < model.ems.size(); ++e) {
    for (const Tensor& k : model.ems[e].kernel_set.kernels) {
      const std::size_t size = k.shape()[0];
      std::string text = "# em=" + std::to_string(e + 1) + " size=" + std::to_string(size);
      if (model.share_weights) text += " shared depth=" + std::to_string(model.depth);
      text += "\n" + kernel_csv(k);
      write_file_atomic(fs::path(o.out) / ("em" + std::to_string(e + 1) + "_k" +
                                           std::to_string(size) + ".csv"),
                        text);
      ++files;
    }
  }
  out << "wrote " << files << " kernel files to " << o.out << "\n";
  return kExitOk;
}

/// Grid sweep of DE's F and CR over (0, 1] in steps of `step`.
inline int cmd_de_sweep(const SweepOptions& o, std::ostream& out) {
  const FunctionId id = detail::benchmark_function(o.function);
  if (!(o.step > 0 && o.step <= 1)) throw ConfigError("--step must lie in (0, 1]");
  const auto instances = test_instances(id, o.dim, o.repeats, o.seed);
  std::string csv = "# function=" + to_string(id) + " D=" + std::to_string(o.dim) +
                    " pop=" + std::to_string(o.pop) + " budget=" + std::to_string(o.budget) +
                    " repeats=" + std::to_string(o.repeats) + " seed=" + std::to_string(o.seed) +
                    "\nF,CR,final_best_mean,final_best_std\n";
  const int steps = static_cast<int>(std::round(1.0 / o.step));
  double best = std::numeric_limits<double>::infinity(), best_f = 0, best_cr = 0;
  for (int a = 1; a <= steps; ++a) {
    for (int b = 1; b <= steps; ++b) {
      const double F = a * o.step, CR = b * o.step;
      std::vector<double> finals;
      for (std::size_t r = 0; r < o.repeats; ++r) {
        finals.push_back(run_de(instances[r], o.pop, o.budget, o.seed, r, F, CR).final_best());
      }
      const Stats s = mean_std(finals);
      csv += format_double(F) + "," + format_double(CR) + "," + format_double(s.mean) + "," +
             format_double(s.std) + "\n";
      if (s.mean < best) {
        best = s.mean;
        best_f = F;
        best_cr = CR;
      }
    }
  }
  write_file_atomic(o.output, csv);
  out << "best F=" << best_f << " CR=" << best_cr << " mean final best " << best << "\n";
  return kExitOk;
}

/// Parses `argv` and dispatches to a command.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App app{"Learned evolutionary optimization with stacked convolutional evolution modules"};
  app.require_subcommand(1);

  TrainOptions train_o;
  auto* train_cmd = app.add_subcommand("train", "Train a model and write it as JSON");
  train_cmd->add_option("--preset", train_o.preset, "ws3 | ws30 | nws15 | custom");
  train_cmd->add_option("--suite", train_o.suite, "high:<F4..F9> | low | arm-sc | arm-cc");
  train_cmd->add_option("--dim", train_o.dim, "Problem dimension D");
  train_cmd->add_option("--L", train_o.L, "Lattice side");
  train_cmd->add_option("--K", train_o.K, "Populations per function per epoch");
  train_cmd->add_option("--epochs", train_o.epochs);
  train_cmd->add_option("--lr", train_o.lr, "Initial learning rate");
  train_cmd->add_option("--depth", train_o.depth, "Number of modules (custom preset)");
  train_cmd->add_flag("--unshared", train_o.unshared, "One parameter block per module (custom preset)");
  train_cmd->add_option("--count", train_o.count, "Training functions (or arm targets)");
  train_cmd->add_option("--segments", train_o.segments, "Arm segments");
  train_cmd->add_option("--radius", train_o.radius, "Arm target radius");
  train_cmd->add_option("--seed", train_o.seed);
  train_cmd->add_option("--threads", train_o.threads, "Worker threads (0: all cores)");
  train_cmd->add_option("-o,--output", train_o.output, "Model file");
  train_cmd->add_option("--log", train_o.log, "Training log CSV (default: <output>.log.csv)");

  RunOptions run_o;
  auto add_run_options = [](CLI::App* cmd, RunOptions& o) {
    cmd->add_option("-m,--model", o.model, "Model file")->required();
    cmd->add_option("--function", o.function, "F1..F9");
    cmd->add_option("--dim", o.dim);
    cmd->add_option("--L", o.L);
    cmd->add_option("--repeats", o.repeats);
    cmd->add_option("--depth", o.depth, "Override the depth of a shared-weight model");
    cmd->add_option("--seed", o.seed);
    cmd->add_option("--out", o.out, "Output directory");
  };
  auto* run_cmd = app.add_subcommand("run", "Run a model on fresh shifted instances");
  add_run_options(run_cmd, run_o);

  CompareOptions cmp_o;
  auto* cmp_cmd = app.add_subcommand("compare", "Compare a model with DE and random search");
  add_run_options(cmp_cmd, cmp_o.run);
  cmp_cmd->add_option("--budget", cmp_o.budget, "Expected evaluation budget (checked)");
  cmp_cmd->add_option("--de-F", cmp_o.de_f);
  cmp_cmd->add_option("--de-CR", cmp_o.de_cr);

  ArmOptions arm_o;
  auto* arm_cmd = app.add_subcommand("arm", "Planar arm reaching experiment");
  arm_cmd->add_option("--case", arm_o.arm_case, "sc | cc");
  arm_cmd->add_option("--n", arm_o.segments, "Segments");
  arm_cmd->add_option("--r", arm_o.radius, "Test target radius");
  arm_cmd->add_option("--train-r", arm_o.train_radius, "Training target radius (default: --r)");
  arm_cmd->add_option("--targets", arm_o.targets, "Training targets");
  arm_cmd->add_option("--test-targets", arm_o.test_targets);
  arm_cmd->add_option("--preset", arm_o.preset);
  arm_cmd->add_option("--epochs", arm_o.epochs);
  arm_cmd->add_option("--K", arm_o.K);
  arm_cmd->add_option("--lr", arm_o.lr);
  arm_cmd->add_option("--L", arm_o.L);
  arm_cmd->add_option("--fe", arm_o.fe, "Evaluation budget; sets the depth of a shared model");
  arm_cmd->add_option("-m,--model", arm_o.model, "Use this model instead of training");
  arm_cmd->add_option("--seed", arm_o.seed);
  arm_cmd->add_option("--threads", arm_o.threads);
  arm_cmd->add_option("--out", arm_o.out);

  DumpOptions dump_o;
  auto* dump_cmd = app.add_subcommand("dump-kernels", "Write every kernel as a CSV matrix");
  dump_cmd->add_option("-m,--model", dump_o.model)->required();
  dump_cmd->add_option("--out", dump_o.out);

  SweepOptions sweep_o;
  auto* sweep_cmd = app.add_subcommand("de-sweep", "Grid-tune DE's F and CR");
  sweep_cmd->add_option("--function", sweep_o.function);
  sweep_cmd->add_option("--dim", sweep_o.dim);
  sweep_cmd->add_option("--pop", sweep_o.pop);
  sweep_cmd->add_option("--budget", sweep_o.budget);
  sweep_cmd->add_option("--repeats", sweep_o.repeats);
  sweep_cmd->add_option("--step", sweep_o.step);
  sweep_cmd->add_option("--seed", sweep_o.seed);
  sweep_cmd->add_option("-o,--output", sweep_o.output);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train_cmd) return cmd_train(train_o, out);
    if (*run_cmd) return cmd_run(run_o, out);
    if (*cmp_cmd) return cmd_compare(cmp_o, out);
    if (*arm_cmd) return cmd_arm(arm_o, out);
    if (*dump_cmd) return cmd_dump_kernels(dump_o, out);
    if (*sweep_cmd) return cmd_de_sweep(sweep_o, out);
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace decn::cli

#endif  // DECN_TOOLS_DECN_CLI_HPP
