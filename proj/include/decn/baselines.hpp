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

#ifndef DECN_BASELINES_HPP
#define DECN_BASELINES_HPP

// Reference optimizers charged one evaluation per fitness query, so their
// run records line up with the learned model's.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "decn/error.hpp"
#include "decn/functions.hpp"
#include "decn/random.hpp"
#include "decn/run_record.hpp"

namespace decn {

struct DeConfig {
  std::size_t pop_size = 100;
  double F = 0.5;
  double CR = 0.9;
  std::uint64_t budget = 400;
  std::uint64_t seed = 0;

  void validate() const {
    if (pop_size < 4) throw ConfigError("DE: pop_size must be at least 4");
    if (!(F >= 0)) throw ConfigError("DE: F must be non-negative");
    if (!(CR > 0 && CR <= 1)) throw ConfigError("DE: CR must lie in (0, 1]");
    if (budget < pop_size) throw ConfigError("DE: budget is smaller than the population");
  }
};

struct OptimizerResult {
  std::vector<double> best;
  double best_fitness = std::numeric_limits<double>::infinity();
  RunRecord record;
  std::vector<std::vector<double>> population;  // final population (DE only)
};

namespace detail {

inline RunEntry population_entry(std::size_t gen, const std::vector<double>& fit,
                                 std::uint64_t evals) {
  double best = fit[0], total = 0;
  for (double f : fit) {
    best = std::min(best, f);
    total += f;
  }
  return {gen, best, total / static_cast<double>(fit.size()), evals};
}

inline std::vector<double> sample_point(const ObjectiveInstance& inst, Rng& rng) {
  std::vector<double> x(inst.dim);
  for (std::size_t c = 0; c < inst.dim; ++c) x[c] = uniform(rng, inst.lower[c], inst.upper[c]);
  return x;
}

}  // namespace detail

/// DE/rand/1/bin: trial = x_r1 + F (x_r2 - x_r3) with binomial crossover
/// (one forced dimension), clamped to bounds, replacing its parent when not
/// worse. Generational; the last generation may be partial so that exactly
/// `budget` evaluations are spent.
inline OptimizerResult de_rand_1_bin(const ObjectiveInstance& inst, const DeConfig& cfg, Rng& rng) {
  cfg.validate();
  const std::size_t np = cfg.pop_size, d = inst.dim;
  std::vector<std::vector<double>> pop(np);
  std::vector<double> fit(np);
  std::uint64_t evals = 0;
  for (std::size_t i = 0; i < np; ++i) {
    pop[i] = detail::sample_point(inst, rng);
    fit[i] = inst(pop[i]);
    ++evals;
  }
  OptimizerResult res;
  res.record.algorithm = "de";
  res.record.function = to_string(inst.id);
  res.record.dim = d;
  res.record.seed = cfg.seed;
  res.record.entries.push_back(detail::population_entry(0, fit, evals));

  std::vector<double> trial(d);
  for (std::size_t gen = 1; evals < cfg.budget; ++gen) {
    auto next = pop;
    auto next_fit = fit;
    for (std::size_t i = 0; i < np && evals < cfg.budget; ++i) {
      std::size_t r1, r2, r3;
      do r1 = uniform_index(rng, np); while (r1 == i);
      do r2 = uniform_index(rng, np); while (r2 == i || r2 == r1);
      do r3 = uniform_index(rng, np); while (r3 == i || r3 == r1 || r3 == r2);
      const std::size_t forced = uniform_index(rng, d);
      for (std::size_t c = 0; c < d; ++c) {
        const bool cross = uniform(rng, 0.0, 1.0) < cfg.CR || c == forced;
        const double v = cross ? pop[r1][c] + cfg.F * (pop[r2][c] - pop[r3][c]) : pop[i][c];
        trial[c] = std::clamp(v, inst.lower[c], inst.upper[c]);
      }
      const double f = inst(trial);
      ++evals;
      if (f <= fit[i]) {
        next[i] = trial;
        next_fit[i] = f;
      }
    }
    pop = std::move(next);
    fit = std::move(next_fit);
    res.record.entries.push_back(detail::population_entry(gen, fit, evals));
  }
  const std::size_t arg = static_cast<std::size_t>(std::min_element(fit.begin(), fit.end()) - fit.begin());
  res.best = pop[arg];
  res.best_fitness = fit[arg];
  res.population = std::move(pop);
  return res;
}

/// Uniform in-bounds sampling. One record entry per `chunk` samples (and
/// one for a trailing partial chunk); `best` is the best so far and `mean`
/// the mean of the chunk.
inline OptimizerResult random_search(const ObjectiveInstance& inst, std::uint64_t budget, Rng& rng,
                                     std::size_t chunk = 100) {
  if (budget < 1) throw ConfigError("random_search: budget must be at least 1");
  if (chunk < 1) throw ConfigError("random_search: chunk must be at least 1");
  OptimizerResult res;
  res.record.algorithm = "random";
  res.record.function = to_string(inst.id);
  res.record.dim = inst.dim;
  double chunk_total = 0;
  std::size_t in_chunk = 0;
  for (std::uint64_t e = 1; e <= budget; ++e) {
    std::vector<double> x = detail::sample_point(inst, rng);
    const double f = inst(x);
    if (f < res.best_fitness || res.best.empty()) {
      res.best_fitness = f;
      res.best = std::move(x);
    }
    chunk_total += f;
    ++in_chunk;
    if (in_chunk == chunk || e == budget) {
      res.record.entries.push_back({res.record.entries.size(), res.best_fitness,
                                    chunk_total / static_cast<double>(in_chunk), e});
      chunk_total = 0;
      in_chunk = 0;
    }
  }
  return res;
}

}  // namespace decn

#endif  // DECN_BASELINES_HPP
