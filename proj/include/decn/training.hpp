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

#ifndef DECN_TRAINING_HPP
#define DECN_TRAINING_HPP

// Gradient training of the stacked model on a set of surrogate functions:
// normalized-improvement loss, Adam with global-norm clipping, step decay of
// the learning rate and periodic resampling of the function shifts.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <ostream>
#include <sstream>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "decn/autodiff.hpp"
#include "decn/error.hpp"
#include "decn/evolution.hpp"
#include "decn/functions.hpp"
#include "decn/io.hpp"
#include "decn/population.hpp"
#include "decn/random.hpp"

namespace decn {

inline constexpr double kLossEpsilon = 1e-12;

/// Normalized improvement loss, to be minimized:
///
///   loss = -(mean f(S0) - mean f(S_out)) / max(|mean f(S0)|, 1e-12)
///
/// S0 is a constant; only S_out's fitness carries gradient.
inline Var loss(const PopulationGrid& s0, const PopulationGrid& s_out) {
  if (!s0.evaluated() || !s_out.evaluated()) {
    throw NotEvaluatedError("loss: both populations must be evaluated");
  }
  const double m0 = s0.mean_fitness();
  const double denom = std::max(std::abs(m0), kLossEpsilon);
  return scale(add_scalar(mean(*s_out.fitness), -m0), 1.0 / denom);
}

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<Tensor> m, v;
  std::uint64_t step = 0;
};

/// One bias-corrected Adam update of `params` in place.
inline void adam_step(std::span<Tensor> params, std::span<const Tensor> grads, AdamState& state,
                      double lr, const AdamOptions& opt = {}) {
  if (params.size() != grads.size()) throw ShapeError("adam_step: parameter/gradient count mismatch");
  if (state.m.empty()) {
    for (const Tensor& p : params) {
      state.m.emplace_back(p.shape(), 0.0);
      state.v.emplace_back(p.shape(), 0.0);
    }
  }
  if (state.m.size() != params.size()) throw ShapeError("adam_step: state does not match parameters");
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor::require_same_shape(params[i], grads[i], "adam_step");
    Tensor::require_same_shape(params[i], state.m[i], "adam_step");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1 - std::pow(opt.beta1, t);
  const double c2 = 1 - std::pow(opt.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = params[i];
    Tensor& m = state.m[i];
    Tensor& v = state.v[i];
    const Tensor& g = grads[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = opt.beta1 * m[j] + (1 - opt.beta1) * g[j];
      v[j] = opt.beta2 * v[j] + (1 - opt.beta2) * g[j] * g[j];
      p[j] -= lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + opt.eps);
    }
  }
}

inline double global_norm(std::span<const Tensor> grads) {
  double s = 0;
  for (const Tensor& g : grads) {
    for (double v : g.data()) s += v * v;
  }
  return std::sqrt(s);
}

/// Rescales `grads` so their joint 2-norm is at most `max_norm`. Returns the
/// norm before clipping.
inline double clip_global_norm(std::span<Tensor> grads, double max_norm) {
  const double norm = global_norm(grads);
  if (norm > max_norm) {
    const double s = max_norm / norm;
    for (Tensor& g : grads) g *= s;
  }
  return norm;
}

struct TrainConfig {
  std::size_t K = 32;             // populations per function per epoch
  std::size_t epochs = 5000;
  double lr = 5e-4;
  double lr_decay = 0.9;
  std::size_t decay_every = 100;  // epochs
  double clip_norm = 10.0;
  std::size_t resample_every = 10;  // T, epochs
  std::size_t L = 10;
  std::size_t D = 2;
  std::uint64_t seed = 0;
  std::size_t threads = 0;  // 0: hardware concurrency

  void validate() const {
    if (K == 0 || L == 0 || D == 0) throw ConfigError("train: K, L and D must be positive");
    if (!(lr >= 0) || !(lr_decay > 0) || decay_every == 0) {
      throw ConfigError("train: invalid learning-rate schedule");
    }
    if (!(clip_norm > 0)) throw ConfigError("train: clip_norm must be positive");
    if (resample_every == 0) throw ConfigError("train: resample period T must be at least 1");
  }
};

/// lr0 * decay^floor(epoch / decay_every), epochs counted from 0.
inline double learning_rate(const TrainConfig& cfg, std::size_t epoch) {
  return cfg.lr * std::pow(cfg.lr_decay, static_cast<double>(epoch / cfg.decay_every));
}

struct ModelSpec {
  std::size_t depth = 3;
  bool share_weights = true;
  std::vector<std::size_t> kernel_sizes{3, 5, 7};
  double init_sigma = 0.5;
  std::string suite;
};

struct EpochLog {
  std::size_t epoch = 0;
  double mean_loss = 0;
  std::vector<double> function_losses;
  double grad_norm_pre = 0;
  double grad_norm_post = 0;
  double lr = 0;
};

struct TrainLog {
  std::vector<EpochLog> epochs;
};

/// `epoch,mean_loss,grad_norm_pre,grad_norm_post,lr`
inline std::string train_log_csv(const TrainLog& log, const std::string& meta = {}) {
  std::ostringstream os;
  if (!meta.empty()) os << "# " << meta << '\n';
  os << "epoch,mean_loss,grad_norm_pre,grad_norm_post,lr\n";
  for (const EpochLog& e : log.epochs) {
    os << e.epoch << ',' << format_double(e.mean_loss) << ',' << format_double(e.grad_norm_pre)
       << ',' << format_double(e.grad_norm_post) << ',' << format_double(e.lr) << '\n';
  }
  return os.str();
}

struct TrainResult {
  DecnModel model;
  TrainLog log;
};

/// Initial model of a training run: Gaussian kernels from the "init" stream.
inline DecnModel initial_model(const ModelSpec& spec, const TrainConfig& cfg) {
  Rng rng = make_rng(cfg.seed, "init");
  DecnModel model = init_model(spec.depth, spec.share_weights, spec.kernel_sizes,
                               spec.init_sigma, rng);
  model.config.L = cfg.L;
  model.config.D_trained = cfg.D;
  model.config.suite = spec.suite;
  model.config.seed = cfg.seed;
  return model;
}

namespace detail {

struct TaskResult {
  double loss = 0;
  std::vector<Tensor> grads;
  std::exception_ptr error;
};

/// Loss and kernel gradients of one taped run from S0.
inline TaskResult run_training_task(const DecnModel& model, const PopulationGrid& s0,
                                    const ObjectiveInstance& inst) {
  TaskResult r;
  try {
    Tape tape;
    std::vector<EmKernels> blocks;
    std::vector<Var> leaves;
    for (const EmParams& em : model.ems) {
      EmKernels ks;
      for (const Tensor& k : em.kernel_set.kernels) {
        ks.push_back(tape.leaf(k));
        leaves.push_back(ks.back());
      }
      blocks.push_back(std::move(ks));
    }
    const DecnRun run = run_modules(s0, blocks, model.share_weights, model.depth, inst);
    const Var l = loss(s0, run.final);
    r.loss = l.value().item();
    if (l.on_tape()) {
      r.grads = tape.grad(l, leaves);
    } else {
      for (const Var& v : leaves) r.grads.emplace_back(v.shape(), 0.0);
    }
  } catch (...) {
    r.error = std::current_exception();
  }
  return r;
}

inline std::vector<Tensor*> parameter_refs(DecnModel& model) {
  std::vector<Tensor*> refs;
  for (EmParams& em : model.ems) {
    for (Tensor& k : em.kernel_set.kernels) refs.push_back(&k);
  }
  return refs;
}

}  // namespace detail

/// Trains a freshly initialized model on `dataset`.
///
/// Each epoch draws K fresh initial populations per function, runs the taped
/// model, averages the per-function mean losses, clips the global gradient
/// norm and takes one Adam step. Shifts are resampled every T epochs. All
/// randomness derives from cfg.seed, so runs are reproducible bit for bit.
inline TrainResult train(const ModelSpec& spec, FunctionSet dataset, const TrainConfig& cfg) {
  cfg.validate();
  if (dataset.instances.empty()) throw ConfigError("train: dataset is empty");
  for (const ObjectiveInstance& inst : dataset.instances) {
    if (inst.dim != cfg.D) {
      throw ConfigError("train: dataset dimension " + std::to_string(inst.dim) +
                        " does not match D=" + std::to_string(cfg.D));
    }
  }
  TrainResult result{initial_model(spec, cfg), {}};
  DecnModel& model = result.model;
  if (cfg.L > 1 && cfg.L < model.min_side()) {
    throw ConfigError("train: L=" + std::to_string(cfg.L) + " is below the kernel minimum " +
                      std::to_string(model.min_side()));
  }

  Rng shift_rng = make_rng(cfg.seed, "shifts");
  Rng pop_rng = make_rng(cfg.seed, "populations");
  AdamState adam;
  const std::size_t m = dataset.instances.size();
  const std::size_t tasks = m * cfg.K;
  std::size_t workers = cfg.threads ? cfg.threads : std::thread::hardware_concurrency();
  workers = std::clamp<std::size_t>(workers, 1, tasks);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = learning_rate(cfg, epoch);
    if (epoch > 0 && epoch % cfg.resample_every == 0) resample_shifts(dataset, shift_rng);

    std::vector<PopulationGrid> starts;
    starts.reserve(tasks);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t k = 0; k < cfg.K; ++k) {
        try {
          starts.push_back(evaluate(init_population(cfg.L, dataset.instances[i], pop_rng),
                                    dataset.instances[i]));
        } catch (const NumericError& e) {
          throw NumericError("epoch " + std::to_string(epoch) + ", function " + std::to_string(i) +
                             " (" + to_string(dataset.instances[i].id) + "): " + e.what());
        }
      }
    }

    std::vector<detail::TaskResult> results(tasks);
    auto work = [&](std::size_t w) {
      for (std::size_t t = w; t < tasks; t += workers) {
        results[t] = detail::run_training_task(model, starts[t], dataset.instances[t / cfg.K]);
      }
    };
    if (workers == 1) {
      work(0);
    } else {
      std::vector<std::thread> pool;
      for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
      for (std::thread& th : pool) th.join();
    }

    EpochLog entry;
    entry.epoch = epoch;
    entry.lr = lr;
    entry.function_losses.assign(m, 0.0);
    std::vector<Tensor*> params = detail::parameter_refs(model);
    std::vector<Tensor> grads;
    for (Tensor* p : params) grads.emplace_back(p->shape(), 0.0);
    const double weight = 1.0 / static_cast<double>(tasks);
    for (std::size_t t = 0; t < tasks; ++t) {
      const std::size_t fi = t / cfg.K;
      const std::string where = "epoch " + std::to_string(epoch) + ", function " +
                                std::to_string(fi) + " (" +
                                to_string(dataset.instances[fi].id) + ")";
      if (results[t].error) {
        try {
          std::rethrow_exception(results[t].error);
        } catch (const NumericError& e) {
          throw NumericError(where + ": " + e.what());
        }
      }
      if (!std::isfinite(results[t].loss)) throw NumericError(where + ": non-finite loss");
      entry.function_losses[fi] += results[t].loss / static_cast<double>(cfg.K);
      for (std::size_t p = 0; p < grads.size(); ++p) {
        Tensor g = results[t].grads[p];
        g *= weight;
        grads[p] += g;
      }
    }
    for (double fl : entry.function_losses) entry.mean_loss += fl / static_cast<double>(m);

    entry.grad_norm_pre = clip_global_norm(grads, cfg.clip_norm);
    entry.grad_norm_post = global_norm(grads);
    std::vector<Tensor> values;
    for (Tensor* p : params) values.push_back(*p);
    adam_step(values, grads, adam, lr);
    for (std::size_t p = 0; p < params.size(); ++p) *params[p] = std::move(values[p]);
    model.validate();
    result.log.epochs.push_back(std::move(entry));
  }
  return result;
}

}  // namespace decn

#endif  // DECN_TRAINING_HPP
