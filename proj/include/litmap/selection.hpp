// Copyright 2026 The Litmap Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once
// Backward feature elimination driven by a generalized cross-validation score.
//
//   GCV = MSE / (1 - C/N)^2,  C = penalty * (total leaves in the ensemble)
//
// MSE is the mean squared difference between the 0/1 target and the fitted
// probability on the training rows. Each step drops the feature whose removal
// gives the lowest GCV; a feature's importance is the GCV increase at the step
// where it was removed.

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "litmap/gbm.hpp"

namespace litmap::learn {

struct GcvOptions {
  int elimination_trees = 50;  // reduced budget per candidate retrain
  double penalty = 3.0;        // d in C = d * leaves
  /// Stop when the best drop raises GCV by more than this fraction of the
  /// current GCV. Infinity runs to a single remaining feature.
  double tolerance = 0.01;
  /// Up-sampled duplicates let any high-cardinality column memorise minority
  /// rows, which training MSE rewards; off by default.
  bool upsample = false;
  unsigned threads = 1;
};

struct EliminationStep {
  std::string feature;
  std::size_t column = 0;  // column in the input matrix
  double gcv_before = 0.0;
  double gcv_after = 0.0;
  double increase() const { return gcv_after - gcv_before; }
};

struct GcvResult {
  std::vector<std::string> selected;            // survivors, matrix column order
  std::vector<std::size_t> selected_columns;
  std::vector<EliminationStep> trace;           // in elimination order
  std::vector<std::pair<std::string, double>> scores;  // per feature, matrix column order
  double final_gcv = 0.0;
};

/// Return false to stop after this step.
using StepObserver = std::function<bool(const EliminationStep&)>;

double gcv_score(double mse, std::size_t leaves, double penalty, std::size_t n);

GcvResult gcv_backward_eliminate(const LabeledSet& data, const Hyperparameters& hp,
                                 std::uint64_t seed, const GcvOptions& opts = {},
                                 const StepObserver& observer = {});

}  // namespace litmap::learn
