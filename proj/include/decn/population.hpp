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

#ifndef DECN_POPULATION_HPP
#define DECN_POPULATION_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "decn/autodiff.hpp"
#include "decn/error.hpp"
#include "decn/functions.hpp"
#include "decn/io.hpp"
#include "decn/random.hpp"
#include "decn/tensor.hpp"

namespace decn {

/// An L x L lattice of D-dimensional individuals with a fitness channel.
///
/// Decision variables and fitness are held as separate Vars so that the
/// decisions can be differentiated through while fitness drives selection.
/// `lattice()` assembles the (L, L, D + 1) view with fitness last.
struct PopulationGrid {
  Var decisions;               // (L, L, D)
  std::optional<Var> fitness;  // (L, L); empty while stale
  std::vector<double> lower, upper;
  std::uint64_t eval_count = 0;

  std::size_t side() const { return decisions.shape()[0]; }
  std::size_t dim() const { return decisions.shape()[2]; }
  std::size_t size() const { return side() * side(); }
  bool evaluated() const { return fitness.has_value(); }

  const Tensor& fitness_values() const {
    if (!fitness) throw NotEvaluatedError("population fitness is stale");
    return fitness->value();
  }

  double best() const {
    const auto f = fitness_values().data();
    return *std::min_element(f.begin(), f.end());
  }

  double mean_fitness() const {
    const Tensor& f = fitness_values();
    return f.sum() / static_cast<double>(f.size());
  }

  /// Decision vector of the individual at (row, col).
  std::vector<double> individual(std::size_t row, std::size_t col) const {
    const std::size_t d = dim();
    const auto x = decisions.value().data().subspan((row * side() + col) * d, d);
    return {x.begin(), x.end()};
  }

  Tensor lattice() const {
    const Tensor& f = fitness_values();
    const std::size_t L = side(), d = dim();
    Tensor out(Shape{L, L, d + 1}, 0.0);
    for (std::size_t cell = 0; cell < L * L; ++cell) {
      for (std::size_t c = 0; c < d; ++c) {
        out[cell * (d + 1) + c] = decisions.value()[cell * d + c];
      }
      out[cell * (d + 1) + d] = f[cell];
    }
    return out;
  }
};

/// Wraps an (L, L, D) tensor as an unevaluated grid with the given bounds.
inline PopulationGrid make_grid(Tensor decisions, std::vector<double> lower,
                                std::vector<double> upper) {
  const Shape& s = decisions.shape();
  if (s.rank() != 3 || s[0] != s[1]) {
    throw ShapeError("population lattice must be (L, L, D), got " + s.str());
  }
  if (lower.size() != s[2] || upper.size() != s[2]) {
    throw ShapeError("bounds length does not match dimension " + std::to_string(s[2]));
  }
  PopulationGrid g;
  g.decisions = Var(std::move(decisions));
  g.lower = std::move(lower);
  g.upper = std::move(upper);
  return g;
}

/// Every decision value uniform in its bounds; fitness stale; no evaluations.
inline PopulationGrid init_population(std::size_t L, const ObjectiveInstance& inst, Rng& rng) {
  if (L < 1) throw ConfigError("init_population: L must be at least 1");
  Tensor x(Shape{L, L, inst.dim}, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::size_t c = i % inst.dim;
    x[i] = uniform(rng, inst.lower[c], inst.upper[c]);
  }
  return make_grid(std::move(x), inst.lower, inst.upper);
}

/// Cell function evaluating `inst`, usable by map_cells.
inline CellFunction objective_cells(const ObjectiveInstance& inst) {
  return [&inst](std::span<const double> x, std::span<double> g) {
    return inst.value_and_gradient(x, g);
  };
}

/// Fills the fitness channel and charges L^2 evaluations. If the decisions
/// are taped, so is the fitness.
inline PopulationGrid evaluate(const PopulationGrid& pop, const ObjectiveInstance& inst) {
  if (inst.dim != pop.dim()) {
    throw ShapeError("evaluate: grid dimension " + std::to_string(pop.dim()) +
                     " does not match objective dimension " + std::to_string(inst.dim));
  }
  PopulationGrid out = pop;
  out.fitness = map_cells(pop.decisions, objective_cells(inst));
  out.eval_count += pop.size();
  return out;
}

struct SortedGrid {
  PopulationGrid grid;
  /// Destination cell d holds the individual from source cell permutation[d].
  std::vector<std::size_t> permutation;
};

/// Stable order of cells by descending fitness: worst at (0, 0), best at
/// (L-1, L-1). Ties keep their original order.
inline std::vector<std::size_t> descending_order(const Tensor& fitness) {
  std::vector<std::size_t> perm(fitness.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::stable_sort(perm.begin(), perm.end(),
                   [&](std::size_t a, std::size_t b) { return fitness[a] > fitness[b]; });
  return perm;
}

inline SortedGrid sort_descending(const PopulationGrid& pop) {
  if (!pop.evaluated()) throw NotEvaluatedError("sort_descending: population is not evaluated");
  std::vector<std::size_t> perm = descending_order(pop.fitness->value());
  SortedGrid out{pop, perm};
  out.grid.decisions = gather_cells(pop.decisions, perm);
  out.grid.fitness = gather_cells(*pop.fitness, std::move(perm));
  return out;
}

/// Clamps decisions into their bounds. Fitness survives only if nothing moved.
inline PopulationGrid clip_to_bounds(const PopulationGrid& pop) {
  PopulationGrid out = pop;
  out.decisions = clamp(pop.decisions, pop.lower, pop.upper);
  if (!(out.decisions.value() == pop.decisions.value())) out.fitness.reset();
  return out;
}

/// Debug snapshot: one row per individual, `row,col,x_1..x_D,fitness`.
inline void write_grid_csv(std::ostream& os, const PopulationGrid& pop) {
  const std::size_t L = pop.side(), d = pop.dim();
  const Tensor& f = pop.fitness_values();
  os << "row,col";
  for (std::size_t c = 1; c <= d; ++c) os << ",x_" << c;
  os << ",fitness\n";
  for (std::size_t i = 0; i < L; ++i) {
    for (std::size_t j = 0; j < L; ++j) {
      os << i << ',' << j;
      for (std::size_t c = 0; c < d; ++c) os << ',' << format_double(pop.decisions.value().at(i, j, c));
      os << ',' << format_double(f.at(i, j)) << '\n';
    }
  }
}

}  // namespace decn

#endif  // DECN_POPULATION_HPP
