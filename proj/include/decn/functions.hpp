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

#ifndef DECN_FUNCTIONS_HPP
#define DECN_FUNCTIONS_HPP

// Objective functions: the shifted training set F1-F3, the shifted test set
// F4-F9 and the planar arm reaching task, plus dataset builders.

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "decn/error.hpp"
#include "decn/random.hpp"
#include "decn/tensor.hpp"

namespace decn {

enum class FunctionId { F1, F2, F3, F4, F5, F6, F7, F8, F9, ArmSC, ArmCC };

inline std::string to_string(FunctionId id) {
  static constexpr std::array<const char*, 11> names = {
      "F1", "F2", "F3", "F4", "F5", "F6", "F7", "F8", "F9", "ArmSC", "ArmCC"};
  return names[static_cast<std::size_t>(id)];
}

inline FunctionId parse_function_id(std::string_view s) {
  for (int i = 0; i <= static_cast<int>(FunctionId::ArmCC); ++i) {
    const auto id = static_cast<FunctionId>(i);
    if (to_string(id) == s) return id;
  }
  throw ConfigError("unknown function id '" + std::string(s) + "'");
}

inline bool is_arm(FunctionId id) { return id == FunctionId::ArmSC || id == FunctionId::ArmCC; }

/// Box of the decision space and range of the optimum shift b.
struct FunctionRange {
  double x_lo, x_hi;
  double b_lo, b_hi;
};

inline FunctionRange function_range(FunctionId id) {
  switch (id) {
    case FunctionId::F1:
    case FunctionId::F2:
    case FunctionId::F3:
      return {-10, 10, -10, 10};
    case FunctionId::F4:
    case FunctionId::F5:
    case FunctionId::F6:
      return {-100, 100, -50, 50};
    case FunctionId::F7:
      return {-5, 5, -2.5, 2.5};
    case FunctionId::F8:
      return {-600, 600, -300, 300};
    case FunctionId::F9:
      return {-32, 32, -16, 16};
    default:
      throw ConfigError("function_range: " + to_string(id) + " has no shift range");
  }
}

/// Range of F1's per-dimension weights w.
inline constexpr double kF1WeightLo = -10.0;
inline constexpr double kF1WeightHi = 10.0;

/// Fixed segment length of the simple arm case.
inline constexpr double kArmSegmentLength = 10.0;
/// Upper bound on segment lengths in the complex arm case.
inline constexpr double kArmMaxLength = 10.0;

namespace detail {
inline double sign(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }
}  // namespace detail

/// One concrete objective: a function id bound to its shift (or arm target)
/// and box bounds. Immutable once built; evaluation is pure.
struct ObjectiveInstance {
  FunctionId id = FunctionId::F4;
  std::size_t dim = 0;
  std::vector<double> shift;    // b (F1-F9)
  std::vector<double> weights;  // w (F1 only)
  std::array<double, 2> target{};  // p (arm only)
  double radius = 0.0;             // sampling radius of p (arm only)
  std::vector<double> lower, upper;

  std::size_t segments() const { return id == FunctionId::ArmCC ? dim / 2 : dim; }

  double operator()(std::span<const double> x) const { return value_and_gradient(x, {}); }

  /// f(x); when `grad` is non-empty it receives df/dx. Kinks of |.| and
  /// max use subgradient 0 (ties in max pick the first index).
  double value_and_gradient(std::span<const double> x, std::span<double> grad) const {
    if (x.size() != dim) {
      throw ShapeError(to_string(id) + ": expected " + std::to_string(dim) +
                       " variables, got " + std::to_string(x.size()));
    }
    const bool want = !grad.empty();
    if (want) std::fill(grad.begin(), grad.end(), 0.0);
    const std::size_t n = dim;
    constexpr double two_pi = 2.0 * std::numbers::pi;
    auto z = [&](std::size_t i) { return x[i] - shift[i]; };

    switch (id) {
      case FunctionId::F1: {
        double f = 0;
        for (std::size_t i = 0; i < n; ++i) {
          const double t = weights[i] * std::sin(z(i));
          f += std::abs(t);
          if (want) grad[i] = detail::sign(t) * weights[i] * std::cos(z(i));
        }
        return f;
      }
      case FunctionId::F2: {
        double f = 0;
        for (std::size_t i = 0; i < n; ++i) {
          f += std::abs(z(i));
          if (want) grad[i] = detail::sign(z(i));
        }
        return f;
      }
      case FunctionId::F3: {
        double f = 0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
          const double d = z(i) - z(i + 1);
          f += std::abs(d);
          if (want) {
            grad[i] += detail::sign(d);
            grad[i + 1] -= detail::sign(d);
          }
        }
        for (std::size_t i = 0; i < n; ++i) {
          f += std::abs(z(i));
          if (want) grad[i] += detail::sign(z(i));
        }
        return f;
      }
      case FunctionId::F4: {
        double f = 0;
        for (std::size_t i = 0; i < n; ++i) {
          f += z(i) * z(i);
          if (want) grad[i] = 2 * z(i);
        }
        return f;
      }
      case FunctionId::F5: {
        std::size_t arg = 0;
        double f = std::abs(z(0));
        for (std::size_t i = 1; i < n; ++i) {
          if (std::abs(z(i)) > f) {
            f = std::abs(z(i));
            arg = i;
          }
        }
        if (want) grad[arg] = detail::sign(z(arg));
        return f;
      }
      case FunctionId::F6: {
        double f = 0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
          const double u = z(i) * z(i) - z(i + 1);
          const double v = z(i) - 1;
          f += 100 * u * u + v * v;
          if (want) {
            grad[i] += 400 * u * z(i) + 2 * v;
            grad[i + 1] -= 200 * u;
          }
        }
        return f;
      }
      case FunctionId::F7: {
        // z^2 - 10 cos(2 pi z) + 10, arranged to be exactly 0 at z = 0.
        double f = 0;
        for (std::size_t i = 0; i < n; ++i) {
          f += z(i) * z(i) + 10 * (1 - std::cos(two_pi * z(i)));
          if (want) grad[i] = 2 * z(i) + 10 * two_pi * std::sin(two_pi * z(i));
        }
        return f;
      }
      case FunctionId::F8: {
        double sq = 0;
        std::vector<double> c(n);
        for (std::size_t i = 0; i < n; ++i) {
          sq += z(i) * z(i);
          c[i] = std::cos(z(i) / std::sqrt(static_cast<double>(i + 1)));
        }
        double prod = 1;
        for (double ci : c) prod *= ci;
        if (want) {
          // prod over j != i via prefix/suffix products
          std::vector<double> suffix(n + 1, 1.0);
          for (std::size_t i = n; i-- > 0;) suffix[i] = suffix[i + 1] * c[i];
          double prefix = 1;
          for (std::size_t i = 0; i < n; ++i) {
            const double s = std::sqrt(static_cast<double>(i + 1));
            grad[i] = z(i) / 2000 + prefix * suffix[i + 1] * std::sin(z(i) / s) / s;
            prefix *= c[i];
          }
        }
        return sq / 4000 + (1 - prod);
      }
      case FunctionId::F9: {
        const double dn = static_cast<double>(n);
        double sq = 0, cs = 0;
        for (std::size_t i = 0; i < n; ++i) {
          sq += z(i) * z(i);
          cs += std::cos(two_pi * z(i));
        }
        const double r = std::sqrt(sq / dn);
        const double c = cs / dn;
        const double e_r = std::exp(-0.2 * r);
        const double e_c = std::exp(c);
        if (want) {
          for (std::size_t i = 0; i < n; ++i) {
            const double dr = r > 0 ? z(i) / (dn * r) : 0.0;
            grad[i] = 4 * e_r * dr + e_c * two_pi * std::sin(two_pi * z(i)) / dn;
          }
        }
        // -20 exp(-0.2 r) - exp(c) + 20 + e, arranged to be exactly 0 at z = 0.
        return 20 * (1 - e_r) + (std::exp(1.0) - e_c);
      }
      case FunctionId::ArmSC:
      case FunctionId::ArmCC: {
        const bool cc = id == FunctionId::ArmCC;
        const std::size_t segs = segments();
        auto length = [&](std::size_t i) { return cc ? x[i] : kArmSegmentLength; };
        auto angle = [&](std::size_t i) { return cc ? x[segs + i] : x[i]; };
        double px = 0, py = 0;
        for (std::size_t i = 0; i < segs; ++i) {
          px += std::cos(angle(i)) * length(i);
          py += std::sin(angle(i)) * length(i);
        }
        const double dx = px - target[0], dy = py - target[1];
        const double dist = std::sqrt(dx * dx + dy * dy);
        if (want && dist > 0) {
          for (std::size_t i = 0; i < segs; ++i) {
            const double ca = std::cos(angle(i)), sa = std::sin(angle(i));
            const double da = (-dx * sa + dy * ca) * length(i) / dist;
            if (cc) {
              grad[i] = (dx * ca + dy * sa) / dist;
              grad[segs + i] = da;
            } else {
              grad[i] = da;
            }
          }
        }
        return dist;
      }
    }
    throw ConfigError("unhandled function id");
  }
};

/// Evaluates an instance at a length-D tensor.
inline double eval(const ObjectiveInstance& inst, const Tensor& x) {
  if (x.size() != inst.dim) {
    throw ShapeError(to_string(inst.id) + ": expected " + std::to_string(inst.dim) +
                     " variables, got tensor of shape " + x.shape().str());
  }
  return inst(x.data());
}

/// A shifted instance of F1-F9 with b uniform in the function's shift range.
inline ObjectiveInstance sample_shift(FunctionId id, std::size_t dim, Rng& rng) {
  if (is_arm(id)) throw ConfigError("sample_shift: arm instances are built by arm_instance");
  if (dim == 0) throw ConfigError("sample_shift: dimension must be positive");
  const FunctionRange range = function_range(id);
  ObjectiveInstance inst;
  inst.id = id;
  inst.dim = dim;
  inst.lower.assign(dim, range.x_lo);
  inst.upper.assign(dim, range.x_hi);
  inst.shift.resize(dim);
  for (double& b : inst.shift) b = uniform(rng, range.b_lo, range.b_hi);
  if (id == FunctionId::F1) {
    inst.weights.resize(dim);
    for (double& w : inst.weights) w = uniform(rng, kF1WeightLo, kF1WeightHi);
  }
  return inst;
}

enum class ArmCase { SC, CC };

inline ArmCase parse_arm_case(std::string_view s) {
  if (s == "sc" || s == "SC") return ArmCase::SC;
  if (s == "cc" || s == "CC") return ArmCase::CC;
  throw ConfigError("unknown arm case '" + std::string(s) + "' (expected sc or cc)");
}

/// Planar arm with `n` segments reaching for `target`, which must lie
/// within `radius` of the base. SC searches angles in [-pi, pi]^n with
/// segment length 10; CC searches (lengths in [0, 10]^n, angles).
inline ObjectiveInstance arm_instance(ArmCase c, std::size_t n, std::array<double, 2> target,
                                      double radius) {
  if (n == 0) throw ConfigError("arm_instance: at least one segment is required");
  if (std::hypot(target[0], target[1]) > radius) {
    throw ConfigError("arm_instance: target lies outside radius " + std::to_string(radius));
  }
  ObjectiveInstance inst;
  inst.id = c == ArmCase::SC ? FunctionId::ArmSC : FunctionId::ArmCC;
  inst.dim = c == ArmCase::SC ? n : 2 * n;
  inst.target = target;
  inst.radius = radius;
  if (c == ArmCase::CC) {
    inst.lower.assign(n, 0.0);
    inst.upper.assign(n, kArmMaxLength);
  }
  inst.lower.insert(inst.lower.end(), n, -std::numbers::pi);
  inst.upper.insert(inst.upper.end(), n, std::numbers::pi);
  return inst;
}

/// Uniform point of the closed disk of radius r (rejection sampling).
inline std::array<double, 2> sample_disk(double r, Rng& rng) {
  for (;;) {
    const double x = uniform(rng, -r, r), y = uniform(rng, -r, r);
    if (std::hypot(x, y) <= r) return {x, y};
  }
}

enum class Fidelity { High, Low };

inline std::string to_string(Fidelity f) { return f == Fidelity::High ? "high" : "low"; }

inline Fidelity parse_fidelity(std::string_view s) {
  if (s == "high") return Fidelity::High;
  if (s == "low") return Fidelity::Low;
  throw FormatError("unknown fidelity '" + std::string(s) + "'");
}

/// Surrogate functions used for training, with the target they stand in for.
struct FunctionSet {
  std::vector<ObjectiveInstance> instances;
  Fidelity fidelity = Fidelity::High;
  FunctionId target_id = FunctionId::F4;
  /// Whether training draws fresh shifts periodically. Arm target sets are
  /// fixed datasets.
  bool resample = true;
};

/// High fidelity: `count` shifted copies of `target`. Low fidelity: `count`
/// instances cycling through F1, F2, F3 with fresh shifts.
inline FunctionSet make_dataset(Fidelity fidelity, FunctionId target, std::size_t count,
                                std::size_t dim, Rng& rng) {
  if (count == 0) throw ConfigError("make_dataset: count must be at least 1");
  if (is_arm(target)) {
    throw ConfigError("make_dataset: unknown target '" + to_string(target) +
                      "' (arm datasets are built by make_arm_dataset)");
  }
  FunctionSet set;
  set.fidelity = fidelity;
  set.target_id = target;
  for (std::size_t i = 0; i < count; ++i) {
    const FunctionId id =
        fidelity == Fidelity::High ? target : static_cast<FunctionId>(i % 3);
    set.instances.push_back(sample_shift(id, dim, rng));
  }
  return set;
}

/// Test instances of the set's target whose shifts differ from every
/// training shift.
inline std::vector<ObjectiveInstance> make_held_out(const FunctionSet& train, std::size_t count,
                                                    std::size_t dim, Rng& rng) {
  std::vector<ObjectiveInstance> out;
  while (out.size() < count) {
    ObjectiveInstance inst = sample_shift(train.target_id, dim, rng);
    bool clash = false;
    for (const ObjectiveInstance& t : train.instances) clash |= t.shift == inst.shift;
    if (!clash) out.push_back(std::move(inst));
  }
  return out;
}

/// `count` arm instances with targets uniform in the disk of radius r.
inline FunctionSet make_arm_dataset(ArmCase c, std::size_t n, std::size_t count, double radius,
                                    Rng& rng) {
  if (count == 0) throw ConfigError("make_arm_dataset: count must be at least 1");
  FunctionSet set;
  set.fidelity = Fidelity::High;
  set.target_id = c == ArmCase::SC ? FunctionId::ArmSC : FunctionId::ArmCC;
  set.resample = false;
  for (std::size_t i = 0; i < count; ++i) {
    set.instances.push_back(arm_instance(c, n, sample_disk(radius, rng), radius));
  }
  return set;
}

/// Draws new shifts for every instance, keeping ids and dimensions.
inline void resample_shifts(FunctionSet& set, Rng& rng) {
  if (!set.resample) return;
  for (ObjectiveInstance& inst : set.instances) inst = sample_shift(inst.id, inst.dim, rng);
}

inline void to_json(nlohmann::json& j, const ObjectiveInstance& inst) {
  j = nlohmann::json{{"id", to_string(inst.id)},
                     {"dim", inst.dim},
                     {"lower", inst.lower},
                     {"upper", inst.upper}};
  if (is_arm(inst.id)) {
    j["target"] = inst.target;
    j["radius"] = inst.radius;
  } else {
    j["b"] = inst.shift;
  }
  if (inst.id == FunctionId::F1) j["w"] = inst.weights;
}

inline void from_json(const nlohmann::json& j, ObjectiveInstance& inst) {
  inst.id = parse_function_id(j.at("id").get<std::string>());
  inst.dim = j.at("dim").get<std::size_t>();
  inst.lower = j.at("lower").get<std::vector<double>>();
  inst.upper = j.at("upper").get<std::vector<double>>();
  if (is_arm(inst.id)) {
    inst.target = j.at("target").get<std::array<double, 2>>();
    inst.radius = j.at("radius").get<double>();
  } else {
    inst.shift = j.at("b").get<std::vector<double>>();
  }
  if (inst.id == FunctionId::F1) inst.weights = j.at("w").get<std::vector<double>>();
  const std::size_t n = inst.dim;
  if (inst.lower.size() != n || inst.upper.size() != n ||
      (!is_arm(inst.id) && inst.shift.size() != n) ||
      (inst.id == FunctionId::F1 && inst.weights.size() != n)) {
    throw FormatError("instance vectors do not match dim " + std::to_string(n));
  }
}

inline void to_json(nlohmann::json& j, const FunctionSet& set) {
  j = nlohmann::json{{"fidelity", to_string(set.fidelity)},
                     {"target_id", to_string(set.target_id)},
                     {"resample", set.resample},
                     {"instances", set.instances}};
}

inline void from_json(const nlohmann::json& j, FunctionSet& set) {
  set.fidelity = parse_fidelity(j.at("fidelity").get<std::string>());
  set.target_id = parse_function_id(j.at("target_id").get<std::string>());
  set.resample = j.value("resample", true);
  set.instances = j.at("instances").get<std::vector<ObjectiveInstance>>();
  if (set.instances.empty()) throw FormatError("function set has no instances");
}

}  // namespace decn

#endif  // DECN_FUNCTIONS_HPP
