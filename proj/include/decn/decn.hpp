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

#ifndef DECN_DECN_HPP
#define DECN_DECN_HPP

#include "decn/autodiff.hpp"
#include "decn/baselines.hpp"
#include "decn/error.hpp"
#include "decn/evolution.hpp"
#include "decn/experiment.hpp"
#include "decn/functions.hpp"
#include "decn/io.hpp"
#include "decn/population.hpp"
#include "decn/random.hpp"
#include "decn/run_record.hpp"
#include "decn/tensor.hpp"
#include "decn/training.hpp"

#endif  // DECN_DECN_HPP
