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

#include "litmap/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "litmap/common.hpp"

namespace litmap::learn {
namespace {

// Portable Fisher-Yates (std::shuffle's exact sequence is library-specific).
void shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = rng() % i;
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace

SplitIndices split(std::span<const std::uint8_t> y, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
    throw ConfigError("train_fraction must be in (0, 1)");
  std::mt19937_64 rng(derive_seed(spec.seed, "split"));
  SplitIndices out;
  auto take = [&](std::vector<std::size_t> idx) {
    shuffle(idx, rng);
    const auto n_train = static_cast<std::size_t>(
        std::llround(spec.train_fraction * static_cast<double>(idx.size())));
    out.train.insert(out.train.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    out.test.insert(out.test.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
  };
  if (spec.stratified) {
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < y.size(); ++i) (y[i] ? pos : neg).push_back(i);
    if (pos.size() < 2 || neg.size() < 2)
      throw DataError("stratified split needs at least 2 members per class");
    take(std::move(pos));
    take(std::move(neg));
  } else {
    std::vector<std::size_t> all(y.size());
    std::iota(all.begin(), all.end(), 0);
    take(std::move(all));
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

TrainTest split(const LabeledSet& data, const SplitSpec& spec) {
  TrainTest tt;
  tt.indices = split(data.y, spec);
  tt.train = data.subset(tt.indices.train);
  tt.test = data.subset(tt.indices.test);
  return tt;
}

std::vector<std::size_t> upsample_indices(std::span<const std::uint8_t> y, std::uint64_t seed) {
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < y.size(); ++i) (y[i] ? pos : neg).push_back(i);
  if (pos.empty() || neg.empty()) throw DataError("up-sampling needs both classes present");
  const auto& minority = pos.size() <= neg.size() ? pos : neg;
  const auto& majority = pos.size() <= neg.size() ? neg : pos;
  std::vector<std::size_t> out(y.size());
  std::iota(out.begin(), out.end(), 0);
  std::mt19937_64 rng(derive_seed(seed, "upsample"));
  for (std::size_t k = minority.size(); k < majority.size(); ++k)
    out.push_back(minority[rng() % minority.size()]);
  return out;
}

LabeledSet upsample_minority(const LabeledSet& data, std::uint64_t seed) {
  const auto idx = upsample_indices(data.y, seed);
  if (idx.size() == data.size()) return data;
  return data.subset(idx);
}

ConfusionMatrix confusion(std::span<const double> probs, std::span<const std::uint8_t> y,
                          double threshold) {
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const bool predicted = probs[i] >= threshold;
    if (y[i])
      predicted ? ++cm.tp : ++cm.fn;
    else
      predicted ? ++cm.fp : ++cm.tn;
  }
  return cm;
}

Interval wilson_interval(std::size_t successes, std::size_t n, double z) {
  if (n == 0) return {0.0, 1.0};
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double centre = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

EvalReport report_from(const ConfusionMatrix& cm, double threshold) {
  if (cm.total() == 0) throw DataError("cannot evaluate an empty test set");
  auto ratio = [](std::size_t a, std::size_t b) -> std::optional<double> {
    if (b == 0) return std::nullopt;
    return static_cast<double>(a) / static_cast<double>(b);
  };
  EvalReport r;
  r.cm = cm;
  r.threshold = threshold;
  const std::size_t n = cm.total();
  r.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(n);
  r.accuracy_ci = wilson_interval(cm.tp + cm.tn, n);
  r.sensitivity = ratio(cm.tp, cm.tp + cm.fn);
  r.specificity = ratio(cm.tn, cm.tn + cm.fp);
  r.precision = ratio(cm.tp, cm.tp + cm.fp);
  r.prevalence = static_cast<double>(cm.tp + cm.fn) / static_cast<double>(n);
  if (r.precision && r.prevalence > 0.0) r.lift = *r.precision / r.prevalence;
  return r;
}

EvalReport evaluate(const GbmModel& model, const LabeledSet& test, double threshold,
                    const LabeledSet* train) {
  if (test.size() == 0) throw DataError("cannot evaluate an empty test set");
  const auto probs = model.predict_matrix(test.X);
  auto report = report_from(confusion(probs, test.y, threshold), threshold);
  if (train && train->size() > 0) {
    const auto train_probs = model.predict_matrix(train->X);
    const auto cm = confusion(train_probs, train->y, threshold);
    report.train_accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
    report.train_test_gap = *report.train_accuracy - report.accuracy;
  }
  return report;
}

std::vector<std::size_t> stratified_folds(std::span<const std::uint8_t> y, std::size_t k,
                                          std::uint64_t seed) {
  if (k < 2) throw ConfigError("cross-validation needs k >= 2");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < y.size(); ++i) (y[i] ? pos : neg).push_back(i);
  if (std::min(pos.size(), neg.size()) < k)
    throw DataError("cross-validation needs k <= minority class count");
  std::mt19937_64 rng(derive_seed(seed, "cv.folds"));
  shuffle(pos, rng);
  shuffle(neg, rng);
  // Deal the class-ordered sequence round-robin: sizes differ by at most one,
  // and so do per-class counts.
  std::vector<std::size_t> fold(y.size());
  std::size_t i = 0;
  for (auto r : pos) fold[r] = i++ % k;
  for (auto r : neg) fold[r] = i++ % k;
  return fold;
}

CvResult cross_validate(const LabeledSet& data, std::size_t k, const Hyperparameters& hp,
                        std::uint64_t seed, double threshold, unsigned threads) {
  const auto fold = stratified_folds(data.y, k, seed);
  CvResult out;
  out.folds.resize(k);
  out.fold_rows.resize(k);
  for (std::size_t r = 0; r < fold.size(); ++r) out.fold_rows[fold[r]].push_back(r);

  parallel_for(k, threads, [&](std::size_t f) {
    std::vector<std::size_t> train_rows;
    for (std::size_t r = 0; r < fold.size(); ++r)
      if (fold[r] != f) train_rows.push_back(r);
    const auto train_set = data.subset(train_rows);
    const auto validation = data.subset(out.fold_rows[f]);
    const auto balanced = upsample_minority(train_set, derive_seed(seed, "cv.upsample", f));
    const auto model = train(balanced, hp, derive_seed(seed, "cv.train", f));
    out.folds[f] = evaluate(model, validation, threshold, &train_set);
  });

  double sum = 0.0, sum_sens = 0.0, sum_spec = 0.0;
  for (const auto& r : out.folds) {
    sum += r.accuracy;
    sum_sens += r.sensitivity.value_or(0.0);
    sum_spec += r.specificity.value_or(0.0);
  }
  const double kk = static_cast<double>(k);
  out.mean_accuracy = sum / kk;
  out.mean_sensitivity = sum_sens / kk;
  out.mean_specificity = sum_spec / kk;
  double var = 0.0;
  for (const auto& r : out.folds) var += (r.accuracy - out.mean_accuracy) * (r.accuracy - out.mean_accuracy);
  out.std_accuracy = std::sqrt(var / (kk - 1.0));
  return out;
}

std::vector<FeatureScore> split_gain_importance(const GbmModel& model) {
  std::vector<double> total(model.features.size(), 0.0);
  for (const auto& t : model.trees)
    for (const auto& n : t.nodes)
      if (!n.is_leaf()) total[static_cast<std::size_t>(n.feature)] += n.gain;
  const double top = total.empty() ? 0.0 : *std::max_element(total.begin(), total.end());
  std::vector<std::size_t> order(total.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return total[a] > total[b]; });
  std::vector<FeatureScore> out;
  for (auto i : order)
    out.push_back({model.features[i].name, top > 0.0 ? (total[i] == top ? 100.0 : 100.0 * total[i] / top) : 0.0});
  return out;
}

}  // namespace litmap::learn
