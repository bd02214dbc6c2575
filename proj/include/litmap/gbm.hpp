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
// Gradient-boosted regression trees for binary classification under binomial
// deviance (Friedman's TreeBoost with Newton leaf steps).
//
// Features are pre-binned on rank-based cut points whose thresholds are actual
// training values, and rows go left when `value <= threshold`. Any strictly
// increasing transform of a column therefore yields the same trees and the
// same predictions.

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "litmap/features.hpp"

namespace litmap::learn {

/// Feature matrix with binary targets; y = 1 marks the positive (illiterate) class.
struct LabeledSet {
  features::FeatureMatrix X;
  std::vector<std::uint8_t> y;

  std::size_t size() const { return y.size(); }
  std::size_t positives() const;
  LabeledSet subset(std::span<const std::size_t> rows) const;
};

/// Aligns labels to matrix rows by subscriber id. Rows without a label throw DataError.
LabeledSet attach_labels(features::FeatureMatrix X,
                         std::span<const ingest::LiteracyLabel> labels);

struct Hyperparameters {
  int n_trees = 200;
  int max_depth = 3;
  double learning_rate = 0.1;
  int min_samples_leaf = 20;
  double subsample = 1.0;  // fraction of rows drawn without replacement per tree
  int max_bins = 255;
  // Categorical guards: a level needs this many rows to be placed by the
  // ordering (rarer levels stay right), the ordering statistic is
  // sum(residual) / (rows + cat_smooth), and at most max_cat_left levels go left.
  int min_category_rows = 100;
  double cat_smooth = 10.0;
  int max_cat_left = 32;

  bool operator==(const Hyperparameters&) const = default;
};

inline constexpr double kLeafClip = 4.0;

struct TreeNode {
  // Internal nodes have feature >= 0; leaves have feature == -1.
  std::int32_t feature = -1;
  bool categorical = false;
  double threshold = 0.0;              // numeric: value <= threshold goes left
  std::vector<double> left_categories; // categorical: sorted set going left
  bool missing_left = false;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;  // leaf log-odds increment
  double gain = 0.0;   // residual sum-of-squares reduction of the split
  std::int32_t samples = 0;

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

/// Flattened tree; node 0 is the root.
struct Tree {
  std::vector<TreeNode> nodes;

  double evaluate(std::span<const double> row) const;
  std::size_t leaf_count() const;
  bool operator==(const Tree&) const = default;
};

struct GbmModel {
  std::string catalog_version;
  std::vector<features::FeatureSpec> features;  // columns the trees index into
  Hyperparameters hyperparameters;
  double initial_score = 0.0;
  double learning_rate = 0.1;
  std::vector<Tree> trees;
  std::uint64_t seed = 0;

  /// Row aligned to `features`.
  double raw_score(std::span<const double> row) const;
  double predict(std::span<const double> row) const;

  /// Matrix column for every model feature. Throws DataError on a catalog
  /// version mismatch or an absent feature.
  std::vector<std::size_t> column_map(const features::FeatureMatrix& m) const;
  std::vector<double> predict_matrix(const features::FeatureMatrix& m) const;

  std::size_t total_leaves() const;
};

double sigmoid(double x);

/// Training deviance after each round (index 0 = before the first tree).
struct TrainingTrace {
  std::vector<double> deviance;
};

GbmModel train(const LabeledSet& data, const Hyperparameters& hp, std::uint64_t seed,
               TrainingTrace* trace = nullptr);

// ---------------------------------------------------------------------------
// Lower-level interface used by feature selection to avoid re-binning.

struct BinMapper {
  bool categorical = false;
  std::vector<double> uppers;                  // numeric: upper value of each bin
  std::vector<std::vector<double>> categories; // categorical: values held by each bin

  std::size_t bins() const { return categorical ? categories.size() : uppers.size(); }
  std::uint8_t code(double v) const;  // missing -> bins()
};

struct BinnedData {
  std::size_t rows = 0;
  std::vector<features::FeatureSpec> features;
  std::vector<BinMapper> mappers;
  std::vector<std::uint8_t> codes;  // column-major: codes[f * rows + r]
  std::vector<double> y;
  std::string catalog_version;

  static BinnedData build(const LabeledSet& data, int max_bins);
};

/// Trains on the listed feature columns only; the model's features are that subset.
GbmModel train_binned(const BinnedData& data, std::span<const std::size_t> feature_subset,
                      const Hyperparameters& hp, std::uint64_t seed,
                      TrainingTrace* trace = nullptr, std::vector<double>* final_probs = nullptr);

}  // namespace litmap::learn
