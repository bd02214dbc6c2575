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
// Data splitting, minority up-sampling, metrics and cross-validation.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "litmap/gbm.hpp"

namespace litmap::learn {

struct SplitSpec {
  double train_fraction = 0.75;
  bool stratified = true;
  std::uint64_t seed = 0;
};

struct SplitIndices {
  std::vector<std::size_t> train;  // ascending row indices
  std::vector<std::size_t> test;
};

/// Stratified mode keeps round(fraction * class size) rows of each class in train.
SplitIndices split(std::span<const std::uint8_t> y, const SplitSpec& spec);

struct TrainTest {
  LabeledSet train;
  LabeledSet test;
  SplitIndices indices;
};
TrainTest split(const LabeledSet& data, const SplitSpec& spec);

/// Resamples the minority class with replacement until both classes are the
/// same size. Original rows keep their order; copies are appended.
LabeledSet upsample_minority(const LabeledSet& data, std::uint64_t seed);
/// Row indices of the balanced set (originals then drawn minority copies).
std::vector<std::size_t> upsample_indices(std::span<const std::uint8_t> y, std::uint64_t seed);

struct ConfusionMatrix {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  std::size_t total() const { return tp + fp + tn + fn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

ConfusionMatrix confusion(std::span<const double> probs, std::span<const std::uint8_t> y,
                          double threshold);

struct Interval {
  double lo = 0.0, hi = 0.0;
};
/// Wilson score interval for a binomial proportion.
Interval wilson_interval(std::size_t successes, std::size_t n, double z = 1.959963984540054);

/// Metrics derived from the confusion matrix. Undefined ratios are nullopt.
struct EvalReport {
  ConfusionMatrix cm;
  double threshold = 0.5;
  double accuracy = 0.0;
  Interval accuracy_ci;
  std::optional<double> sensitivity;
  std::optional<double> specificity;
  std::optional<double> precision;
  double prevalence = 0.0;
  std::optional<double> lift;  // precision / prevalence
  std::optional<double> train_accuracy;
  std::optional<double> train_test_gap;  // train_accuracy - accuracy
};

EvalReport report_from(const ConfusionMatrix& cm, double threshold);
EvalReport evaluate(const GbmModel& model, const LabeledSet& test, double threshold = 0.5,
                    const LabeledSet* train = nullptr);

struct CvResult {
  std::vector<EvalReport> folds;
  std::vector<std::vector<std::size_t>> fold_rows;  // validation rows per fold
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
  double mean_sensitivity = 0.0;
  double mean_specificity = 0.0;
};

/// Stratified k-fold assignment: row -> fold in [0, k).
std::vector<std::size_t> stratified_folds(std::span<const std::uint8_t> y, std::size_t k,
                                          std::uint64_t seed);

/// Up-sampling happens inside each training fold only.
CvResult cross_validate(const LabeledSet& data, std::size_t k, const Hyperparameters& hp,
                        std::uint64_t seed, double threshold = 0.5, unsigned threads = 1);

struct FeatureScore {
  std::string feature;
  double score = 0.0;
};

/// Total split gain per model feature, scaled so the maximum is 100; sorted by
/// descending score, ties in model feature order.
std::vector<FeatureScore> split_gain_importance(const GbmModel& model);

}  // namespace litmap::learn
