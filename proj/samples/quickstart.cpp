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

// Train a small shared-weight DECN on shifted copies of F4 at D=10, then
// compare it with DE and random search on fresh shifts under the same budget.

#include <cstdio>
#include <vector>

#include "decn/decn.hpp"

int main() {
  using namespace decn;

  Preset p = make_preset("ws3");
  p.cfg.D = 10;
  p.cfg.epochs = 500;
  p.cfg.K = 16;
  p.cfg.seed = 7;
  p.spec.suite = "high:F4";
  const FunctionSet data = build_training_set(parse_suite("high:F4"), 4, p.cfg.D, p.cfg.seed);
  const TrainResult trained = train(p.spec, data, p.cfg);
  std::printf("loss: epoch 0 %.4f, epoch %zu %.4f\n", trained.log.epochs.front().mean_loss,
              trained.log.epochs.back().epoch, trained.log.epochs.back().mean_loss);

  const std::size_t L = 10;
  const std::uint64_t budget = decn_budget(L, trained.model.depth);
  std::vector<double> decn, de, random;
  const auto tests = test_instances(FunctionId::F4, 10, 5, 1);
  for (std::size_t r = 0; r < tests.size(); ++r) {
    decn.push_back(run_decn(trained.model, tests[r], L, 1, r).final_best());
    de.push_back(run_de(tests[r], L * L, budget, 1, r).final_best());
    random.push_back(run_random(tests[r], budget, L * L, 1, r).final_best());
  }
  std::printf("F4, D=10, %llu evaluations, 5 shifts\n", static_cast<unsigned long long>(budget));
  std::printf("  decn   %s\n  de     %s\n  random %s\n", mean_std_text(decn).c_str(),
              mean_std_text(de).c_str(), mean_std_text(random).c_str());
  return 0;
}
