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

#ifndef DECN_RUN_RECORD_HPP
#define DECN_RUN_RECORD_HPP

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "decn/error.hpp"
#include "decn/io.hpp"

namespace decn {

struct RunEntry {
  std::size_t gen = 0;
  double best = 0.0;
  double mean = 0.0;
  std::uint64_t evals = 0;
};

/// Convergence trace of one optimization run.
struct RunRecord {
  std::vector<RunEntry> entries;
  std::string algorithm;
  std::string function;
  std::size_t dim = 0;
  std::size_t side = 0;
  std::uint64_t seed = 0;
  std::string model_path;

  const RunEntry& last() const {
    if (entries.empty()) throw Error("run record is empty");
    return entries.back();
  }
  double final_best() const { return last().best; }
  std::uint64_t final_evals() const { return last().evals; }
};

/// A `#` metadata line, then `gen,best,mean,evals` rows.
inline void write_run_csv(std::ostream& os, const RunRecord& rec) {
  os << "# algorithm=" << rec.algorithm << " function=" << rec.function << " D=" << rec.dim
     << " L=" << rec.side << " seed=" << rec.seed;
  if (!rec.model_path.empty()) os << " model=" << rec.model_path;
  os << "\ngen,best,mean,evals\n";
  for (const RunEntry& e : rec.entries) {
    os << e.gen << ',' << format_double(e.best) << ',' << format_double(e.mean) << ','
       << e.evals << '\n';
  }
}

inline std::string run_csv(const RunRecord& rec) {
  std::ostringstream ss;
  write_run_csv(ss, rec);
  return ss.str();
}

}  // namespace decn

#endif  // DECN_RUN_RECORD_HPP
