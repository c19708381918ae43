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

#ifndef DECN_EVOLUTION_HPP
#define DECN_EVOLUTION_HPP

// Evolution modules: convolutional offspring generation over the
// fitness-sorted lattice, cellwise parent/offspring selection, and the
// stacked model built from them.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "decn/autodiff.hpp"
#include "decn/error.hpp"
#include "decn/functions.hpp"
#include "decn/io.hpp"
#include "decn/population.hpp"
#include "decn/random.hpp"
#include "decn/run_record.hpp"
#include "decn/tensor.hpp"

namespace decn {

inline constexpr int kModelVersion = 1;

/// Square kernels of distinct odd sizes, one per size.
struct KernelSet {
  std::vector<Tensor> kernels;

  std::size_t max_size() const {
    std::size_t k = 0;
    for (const Tensor& t : kernels) k = std::max(k, t.shape()[0]);
    return k;
  }

  void validate() const {
    if (kernels.empty()) throw ConfigError("kernel set is empty");
    std::set<std::size_t> sizes;
    for (const Tensor& t : kernels) {
      const Shape& s = t.shape();
      if (s.rank() != 2 || s[0] != s[1]) throw InvalidKernelError("kernel must be square");
      if (s[0] % 2 == 0) throw InvalidKernelError("kernel size must be odd");
      if (!sizes.insert(s[0]).second) throw InvalidKernelError("duplicate kernel size");
      if (!t.all_finite()) throw NumericError("kernel holds a non-finite value");
    }
  }

  friend bool operator==(const KernelSet&, const KernelSet&) = default;
};

/// Parameters of one evolution module.
struct EmParams {
  KernelSet kernel_set;
  friend bool operator==(const EmParams&, const EmParams&) = default;
};

struct ModelConfig {
  std::size_t L = 10;
  std::size_t D_trained = 2;
  std::vector<std::size_t> kernel_sizes{3, 5, 7};
  int version = kModelVersion;
  std::string suite;
  std::uint64_t seed = 0;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// A stack of `depth` evolution modules. With shared weights a single
/// parameter block is applied `depth` times; otherwise `ems` holds one block
/// per module.
struct DecnModel {
  std::vector<EmParams> ems;
  bool share_weights = true;
  std::size_t depth = 1;
  ModelConfig config;

  const EmParams& block(std::size_t step) const {
    return share_weights ? ems.at(0) : ems.at(step);
  }

  std::size_t max_kernel() const {
    std::size_t k = 0;
    for (const EmParams& em : ems) k = std::max(k, em.kernel_set.max_size());
    return k;
  }

  /// Smallest lattice side the kernels fit without overflowing the padding.
  std::size_t min_side() const { return (max_kernel() + 2) / 2; }

  void validate() const {
    if (depth < 1) throw ConfigError("model depth must be at least 1");
    if (ems.empty()) throw ConfigError("model has no evolution modules");
    if (share_weights && ems.size() != 1) {
      throw ConfigError("a shared-weight model stores exactly one parameter block");
    }
    if (!share_weights && ems.size() != depth) {
      throw ConfigError("an unshared model needs one parameter block per module");
    }
    for (const EmParams& em : ems) em.kernel_set.validate();
  }

  friend bool operator==(const DecnModel&, const DecnModel&) = default;
};

/// Kernels drawn i.i.d. from N(0, sigma^2).
inline DecnModel init_model(std::size_t depth, bool share_weights,
                            const std::vector<std::size_t>& kernel_sizes, double sigma, Rng& rng) {
  DecnModel model;
  model.depth = depth;
  model.share_weights = share_weights;
  model.config.kernel_sizes = kernel_sizes;
  const std::size_t blocks = share_weights ? 1 : depth;
  for (std::size_t b = 0; b < blocks; ++b) {
    EmParams em;
    for (std::size_t k : kernel_sizes) {
      Tensor t(Shape{k, k}, 0.0);
      for (double& v : t.data()) v = gaussian(rng, 0.0, sigma);
      em.kernel_set.kernels.push_back(std::move(t));
    }
    model.ems.push_back(std::move(em));
  }
  model.validate();
  return model;
}

/// Kernels of one module as tape-ready values (constants unless leaves).
using EmKernels = std::vector<Var>;

inline EmKernels constant_kernels(const EmParams& params) {
  EmKernels out;
  for (const Tensor& k : params.kernel_set.kernels) out.emplace_back(k);
  return out;
}

/// Branch decisions taken during a run: sort permutations, selection masks
/// and clamp patterns, one entry per module. Gradients are exact only within
/// a fixed set of branches.
struct BranchTrace {
  std::vector<std::vector<std::size_t>> permutations;
  std::vector<std::vector<std::uint8_t>> masks;
  std::vector<std::vector<std::uint8_t>> clamped;
  friend bool operator==(const BranchTrace&, const BranchTrace&) = default;
};

namespace detail {

/// The mean of convolutions with kernels of several sizes equals one
/// convolution with the mean of the kernels zero-padded to the largest size.
inline Var crm_unclipped(const Var& decisions, std::span<const Var> kernels) {
  if (kernels.empty()) throw ConfigError("crm_forward: no kernels");
  if (kernels.size() == 1) return depthwise_conv2d(decisions, kernels[0]);
  std::size_t size = 0;
  for (const Var& k : kernels) size = std::max(size, k.shape()[0]);
  Var acc = embed_kernel(kernels[0], size);
  for (std::size_t i = 1; i < kernels.size(); ++i) acc = add(acc, embed_kernel(kernels[i], size));
  return depthwise_conv2d(decisions, scale(acc, 1.0 / static_cast<double>(kernels.size())));
}

inline std::vector<std::uint8_t> out_of_bounds(const Tensor& x, const std::vector<double>& lo,
                                               const std::vector<double>& hi) {
  std::vector<std::uint8_t> mask(x.size());
  const std::size_t d = lo.size();
  for (std::size_t i = 0; i < x.size(); ++i) {
    mask[i] = x[i] < lo[i % d] || x[i] > hi[i % d];
  }
  return mask;
}

}  // namespace detail

/// Offspring of a sorted, evaluated population: the mean over kernels of the
/// depthwise convolution of the decision channels, clamped into bounds. The
/// fitness channel is not convolved; the offspring's fitness is stale.
inline PopulationGrid crm_forward(const PopulationGrid& pop, std::span<const Var> kernels,
                                  BranchTrace* trace = nullptr) {
  Var raw = detail::crm_unclipped(pop.decisions, kernels);
  if (trace) trace->clamped.push_back(detail::out_of_bounds(raw.value(), pop.lower, pop.upper));
  PopulationGrid off = pop;
  off.decisions = clamp(raw, pop.lower, pop.upper);
  off.fitness.reset();
  return off;
}

inline PopulationGrid crm_forward(const PopulationGrid& pop, const EmParams& params) {
  const EmKernels k = constant_kernels(params);
  return crm_forward(pop, k);
}

/// Cellwise survivor mask: 1 keeps the parent, which happens only when the
/// offspring is strictly worse (ties go to the offspring).
inline std::vector<std::uint8_t> selection_mask(const Tensor& parent_fitness,
                                                const Tensor& offspring_fitness) {
  std::vector<std::uint8_t> mask(parent_fitness.size());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    mask[i] = offspring_fitness[i] - parent_fitness[i] > 0;
  }
  return mask;
}

/// Cellwise selection between a parent grid and its offspring. The result's
/// fitness is the cellwise minimum; the mask is a constant in backward. The
/// evaluation count is taken from the offspring, which already includes the
/// parent's lineage plus the offspring pass.
inline PopulationGrid sm_select(const PopulationGrid& parent, const PopulationGrid& offspring,
                                BranchTrace* trace = nullptr) {
  if (!parent.evaluated() || !offspring.evaluated()) {
    throw NotEvaluatedError("sm_select: both populations must be evaluated");
  }
  if (!(parent.decisions.shape() == offspring.decisions.shape())) {
    throw ShapeError("sm_select: population shapes differ: " + parent.decisions.shape().str() +
                     " vs " + offspring.decisions.shape().str());
  }
  std::vector<std::uint8_t> mask =
      selection_mask(parent.fitness->value(), offspring.fitness->value());
  if (trace) trace->masks.push_back(mask);
  PopulationGrid out = offspring;
  out.decisions = select_cells(mask, parent.decisions, offspring.decisions);
  out.fitness = select_cells(std::move(mask), *parent.fitness, *offspring.fitness);
  return out;
}

/// One evolution module: evaluate if stale, sort, generate offspring,
/// evaluate them, select. Charges exactly L^2 evaluations when the input is
/// already evaluated.
inline PopulationGrid em_step(const PopulationGrid& pop, std::span<const Var> kernels,
                              const ObjectiveInstance& inst, BranchTrace* trace = nullptr) {
  const PopulationGrid parent = pop.evaluated() ? pop : evaluate(pop, inst);
  SortedGrid sorted = sort_descending(parent);
  if (trace) trace->permutations.push_back(sorted.permutation);
  const PopulationGrid offspring = evaluate(crm_forward(sorted.grid, kernels, trace), inst);
  return sm_select(sorted.grid, offspring, trace);
}

inline PopulationGrid em_step(const PopulationGrid& pop, const EmParams& params,
                              const ObjectiveInstance& inst) {
  const EmKernels k = constant_kernels(params);
  return em_step(pop, k, inst);
}

inline RunEntry snapshot(std::size_t gen, const PopulationGrid& pop) {
  return {gen, pop.best(), pop.mean_fitness(), pop.eval_count};
}

struct DecnRun {
  PopulationGrid final;
  RunRecord record;
};

/// Applies `depth` modules to S0, taking kernels from `blocks` (a single
/// block when shared). Works on tape when the kernels or S0 are taped.
inline DecnRun run_modules(const PopulationGrid& s0, std::span<const EmKernels> blocks,
                           bool shared, std::size_t depth, const ObjectiveInstance& inst,
                           BranchTrace* trace = nullptr) {
  if (blocks.empty()) throw ConfigError("decn_run: model has no evolution modules");
  if (!shared && blocks.size() < depth) {
    throw ConfigError("decn_run: not enough parameter blocks for depth " + std::to_string(depth));
  }
  for (std::size_t c = 0; c < s0.dim(); ++c) {
    if (s0.lower[c] != inst.lower[c] || s0.upper[c] != inst.upper[c]) {
      throw ConfigError("decn_run: population bounds differ from the objective's bounds");
    }
  }
  DecnRun run;
  PopulationGrid pop = s0.evaluated() ? s0 : evaluate(s0, inst);
  run.record.algorithm = "decn";
  run.record.function = to_string(inst.id);
  run.record.dim = pop.dim();
  run.record.side = pop.side();
  run.record.entries.push_back(snapshot(0, pop));
  for (std::size_t t = 0; t < depth; ++t) {
    pop = em_step(pop, blocks[shared ? 0 : t], inst, trace);
    run.record.entries.push_back(snapshot(t + 1, pop));
  }
  run.final = std::move(pop);
  return run;
}

/// Runs a model on S0 (evaluated here if stale). The record has depth + 1
/// entries and ends at L^2 * (depth + 1) evaluations for a fresh S0.
inline DecnRun decn_run(const PopulationGrid& s0, const DecnModel& model,
                        const ObjectiveInstance& inst, BranchTrace* trace = nullptr) {
  if (model.ems.empty()) throw ConfigError("decn_run: model has no evolution modules");
  model.validate();
  const std::size_t L = s0.side();
  if (L > 1 && L < model.min_side()) {
    throw PaddingOverflowError("decn_run: lattice side " + std::to_string(L) +
                               " is below the minimum " + std::to_string(model.min_side()) +
                               " for kernel size " + std::to_string(model.max_kernel()));
  }
  std::vector<EmKernels> blocks;
  for (const EmParams& em : model.ems) blocks.push_back(constant_kernels(em));
  return run_modules(s0, blocks, model.share_weights, model.depth, inst, trace);
}

// Model files -------------------------------------------------------------

inline nlohmann::json model_to_json(const DecnModel& model) {
  nlohmann::json ems = nlohmann::json::array();
  for (const EmParams& em : model.ems) {
    nlohmann::json block = nlohmann::json::object();
    for (const Tensor& k : em.kernel_set.kernels) {
      const auto d = k.data();
      block["k" + std::to_string(k.shape()[0])] = std::vector<double>(d.begin(), d.end());
    }
    ems.push_back(std::move(block));
  }
  return nlohmann::json{
      {"version", model.config.version},
      {"share_weights", model.share_weights},
      {"depth", model.depth},
      {"kernel_sizes", model.config.kernel_sizes},
      {"ems", std::move(ems)},
      {"trained_on",
       {{"suite", model.config.suite},
        {"D", model.config.D_trained},
        {"L", model.config.L},
        {"seed", model.config.seed}}}};
}

inline DecnModel model_from_json(const nlohmann::json& j) {
  try {
    const int version = j.at("version").get<int>();
    if (version != kModelVersion) {
      throw FormatError("unsupported model version " + std::to_string(version) + " (expected " +
                        std::to_string(kModelVersion) + ")");
    }
    DecnModel model;
    model.config.version = version;
    model.share_weights = j.at("share_weights").get<bool>();
    model.depth = j.at("depth").get<std::size_t>();
    model.config.kernel_sizes = j.at("kernel_sizes").get<std::vector<std::size_t>>();
    const auto& trained = j.at("trained_on");
    model.config.suite = trained.at("suite").get<std::string>();
    model.config.D_trained = trained.at("D").get<std::size_t>();
    model.config.L = trained.at("L").get<std::size_t>();
    model.config.seed = trained.at("seed").get<std::uint64_t>();
    for (const auto& block : j.at("ems")) {
      EmParams em;
      for (std::size_t k : model.config.kernel_sizes) {
        auto values = block.at("k" + std::to_string(k)).get<std::vector<double>>();
        if (values.size() != k * k) {
          throw FormatError("kernel k" + std::to_string(k) + " has " +
                            std::to_string(values.size()) + " values");
        }
        em.kernel_set.kernels.emplace_back(Shape{k, k}, std::move(values));
      }
      model.ems.push_back(std::move(em));
    }
    model.validate();
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed model file: ") + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(std::string("inconsistent model file: ") + e.what());
  }
}

inline std::string model_json_text(const DecnModel& model) {
  return model_to_json(model).dump(1) + "\n";
}

inline void save_model(const DecnModel& model, const std::filesystem::path& path) {
  write_file_atomic(path, model_json_text(model));
}

inline DecnModel load_model(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("malformed model file " + path.string() + ": " + e.what());
  }
  return model_from_json(j);
}

/// A kernel as CSV: one line per kernel row.
inline std::string kernel_csv(const Tensor& kernel) {
  std::string out;
  const std::size_t k = kernel.shape()[0];
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) {
      if (b) out += ',';
      out += format_double(kernel.at(a, b));
    }
    out += '\n';
  }
  return out;
}

}  // namespace decn

#endif  // DECN_EVOLUTION_HPP
