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

#include "litmap/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "litmap/common.hpp"
#include "litmap/evaluation.hpp"
#include "litmap/kernels.hpp"

namespace litmap::learn {

double gcv_score(double mse, std::size_t leaves, double penalty, std::size_t n) {
  const double c = penalty * static_cast<double>(leaves);
  const double nn = static_cast<double>(n);
  if (nn <= c)
    throw DataError("GCV undefined: " + std::to_string(n) + " rows <= effective parameters " +
                    std::to_string(c) + " (" + std::to_string(leaves) +
                    " leaves); reduce elimination_trees or max_depth");
  const double shrink = 1.0 - c / nn;
  return mse / (shrink * shrink);
}

namespace {

struct Fit {
  double gcv = 0.0;
  std::set<std::size_t> used;  // matrix columns appearing in any split
};

Fit fit(const BinnedData& data, const std::vector<std::size_t>& subset, const Hyperparameters& hp,
        std::uint64_t seed, const GcvOptions& opts) {
  Hyperparameters reduced = hp;
  reduced.n_trees = opts.elimination_trees;
  std::vector<double> probs;
  const auto model = train_binned(data, subset, reduced, seed, nullptr, &probs);
  const double mse = kernels::squared_error(data.y, probs) / static_cast<double>(data.rows);
  Fit f;
  f.gcv = gcv_score(mse, model.total_leaves(), opts.penalty, data.rows);
  for (const auto& t : model.trees)
    for (const auto& n : t.nodes)
      if (!n.is_leaf()) f.used.insert(subset[static_cast<std::size_t>(n.feature)]);
  return f;
}

}  // namespace

GcvResult gcv_backward_eliminate(const LabeledSet& data, const Hyperparameters& hp,
                                 std::uint64_t seed, const GcvOptions& opts,
                                 const StepObserver& observer) {
  if (data.X.cols() < 2) throw ConfigError("feature elimination needs at least 2 features");
  if (opts.elimination_trees < 1) throw ConfigError("elimination_trees must be positive");

  const LabeledSet balanced = opts.upsample ? upsample_minority(data, derive_seed(seed, "gcv.upsample"))
                                            : data;
  const auto binned = BinnedData::build(balanced, hp.max_bins);
  const std::uint64_t train_seed = derive_seed(seed, "gcv.train");

  std::vector<std::size_t> active(binned.features.size());
  std::iota(active.begin(), active.end(), 0);
  Fit current = fit(binned, active, hp, train_seed, opts);

  GcvResult result;
  std::vector<double> score(active.size(), 0.0);

  while (active.size() > 1) {
    // Removing a feature no split uses leaves training unchanged, so its
    // GCV equals the current one exactly and needs no retrain.
    std::vector<Fit> candidates(active.size());
    std::vector<std::size_t> need;
    for (std::size_t i = 0; i < active.size(); ++i) {
      if (current.used.count(active[i]))
        need.push_back(i);
      else
        candidates[i] = current;
    }
    parallel_for(need.size(), opts.threads, [&](std::size_t j) {
      const std::size_t i = need[j];
      std::vector<std::size_t> reduced;
      reduced.reserve(active.size() - 1);
      for (std::size_t q = 0; q < active.size(); ++q)
        if (q != i) reduced.push_back(active[q]);
      candidates[i] = fit(binned, reduced, hp, train_seed, opts);
    });

    std::size_t best = 0;
    for (std::size_t i = 1; i < active.size(); ++i)
      if (candidates[i].gcv < candidates[best].gcv) best = i;
    for (std::size_t i = 0; i < active.size(); ++i)
      score[active[i]] = candidates[i].gcv - current.gcv;

    const double increase = candidates[best].gcv - current.gcv;
    if (increase > opts.tolerance * current.gcv) break;

    EliminationStep step;
    step.column = active[best];
    step.feature = binned.features[step.column].name;
    step.gcv_before = current.gcv;
    step.gcv_after = candidates[best].gcv;
    result.trace.push_back(step);
    current = std::move(candidates[best]);
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(best));
    if (observer && !observer(step)) break;
  }

  result.selected_columns = active;
  for (auto c : active) result.selected.push_back(binned.features[c].name);
  for (std::size_t c = 0; c < binned.features.size(); ++c)
    result.scores.emplace_back(binned.features[c].name, score[c]);
  result.final_gcv = current.gcv;
  return result;
}

}  // namespace litmap::learn
