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

#include "litmap/gbm.hpp"

#include <algorithm>
#include <array>
#include <bitset>
#include <cmath>
#include <deque>
#include <limits>
#include <memory>
#include <numeric>
#include <unordered_map>

#include "litmap/common.hpp"
#include "litmap/kernels.hpp"

namespace litmap::learn {

using features::Kind;

std::size_t LabeledSet::positives() const {
  return static_cast<std::size_t>(std::count(y.begin(), y.end(), std::uint8_t{1}));
}

LabeledSet LabeledSet::subset(std::span<const std::size_t> rows) const {
  LabeledSet out;
  out.X = X.select_rows(rows);
  out.y.reserve(rows.size());
  for (auto r : rows) out.y.push_back(y.at(r));
  return out;
}

LabeledSet attach_labels(features::FeatureMatrix X,
                         std::span<const ingest::LiteracyLabel> labels) {
  std::unordered_map<std::string_view, bool> literate;
  for (const auto& l : labels) literate.emplace(l.subscriber_id, l.literate);
  LabeledSet out;
  out.y.reserve(X.rows());
  for (const auto& id : X.ids) {
    const auto it = literate.find(id);
    if (it == literate.end()) throw DataError("no label for subscriber '" + id + "'");
    out.y.push_back(it->second ? 0 : 1);
  }
  out.X = std::move(X);
  return out;
}

double sigmoid(double x) {
  // Clamped so a finite score never rounds to a certain 0 or 1.
  constexpr double kLo = std::numeric_limits<double>::denorm_min();
  const double kHi = std::nextafter(1.0, 0.0);
  if (x >= 0) return std::min(1.0 / (1.0 + std::exp(-x)), kHi);
  const double e = std::exp(x);
  return std::max(e / (1.0 + e), kLo);
}

double Tree::evaluate(std::span<const double> row) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const auto& n = nodes[i];
    const double v = row[static_cast<std::size_t>(n.feature)];
    bool left;
    if (std::isnan(v))
      left = n.missing_left;
    else if (n.categorical)
      left = std::binary_search(n.left_categories.begin(), n.left_categories.end(), v);
    else
      left = v <= n.threshold;
    i = static_cast<std::size_t>(left ? n.left : n.right);
  }
  return nodes[i].value;
}

std::size_t Tree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

double GbmModel::raw_score(std::span<const double> row) const {
  double acc = 0.0;
  for (const auto& t : trees) acc += t.evaluate(row);
  return initial_score + learning_rate * acc;
}

double GbmModel::predict(std::span<const double> row) const { return sigmoid(raw_score(row)); }

std::vector<std::size_t> GbmModel::column_map(const features::FeatureMatrix& m) const {
  if (m.catalog_version != catalog_version)
    throw DataError("catalog version mismatch: model '" + catalog_version + "', features '" +
                    m.catalog_version + "'");
  std::vector<std::size_t> map;
  for (const auto& f : features) {
    const auto c = m.column_index(f.name);
    if (!c) throw DataError("feature matrix lacks model feature '" + f.name + "'");
    if (m.columns[*c].kind != f.kind)
      throw DataError("feature '" + f.name + "' changed kind between model and matrix");
    map.push_back(*c);
  }
  return map;
}

std::vector<double> GbmModel::predict_matrix(const features::FeatureMatrix& m) const {
  const auto map = column_map(m);
  std::vector<double> row(map.size());
  std::vector<double> out(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t j = 0; j < map.size(); ++j) row[j] = m.at(r, map[j]);
    out[r] = predict(row);
  }
  return out;
}

std::size_t GbmModel::total_leaves() const {
  std::size_t n = 0;
  for (const auto& t : trees) n += t.leaf_count();
  return n;
}

std::uint8_t BinMapper::code(double v) const {
  if (std::isnan(v)) return static_cast<std::uint8_t>(bins());
  if (categorical) {
    for (std::size_t b = 0; b < categories.size(); ++b)
      if (std::binary_search(categories[b].begin(), categories[b].end(), v))
        return static_cast<std::uint8_t>(b);
    return static_cast<std::uint8_t>(bins());
  }
  const auto it = std::lower_bound(uppers.begin(), uppers.end(), v);
  const auto b = static_cast<std::size_t>(it - uppers.begin());
  return static_cast<std::uint8_t>(std::min(b, uppers.size() - 1));
}

namespace {

BinMapper make_numeric_mapper(std::vector<double> vals, std::size_t max_bins) {
  BinMapper m;
  std::sort(vals.begin(), vals.end());
  std::vector<double> distinct = vals;
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() <= max_bins) {
    m.uppers = std::move(distinct);
    return m;
  }
  // Cut points at rank quantiles: depend only on the order of the values.
  const std::size_t n = vals.size();
  for (std::size_t b = 1; b < max_bins; ++b) {
    const std::size_t rank = (b * n + max_bins - 1) / max_bins;  // ceil(b*n/max_bins)
    const double cut = vals[std::max<std::size_t>(rank, 1) - 1];
    if (m.uppers.empty() || cut > m.uppers.back()) m.uppers.push_back(cut);
  }
  if (m.uppers.back() < vals.back()) m.uppers.push_back(vals.back());
  return m;
}

BinMapper make_categorical_mapper(std::vector<double> vals, std::size_t max_bins) {
  BinMapper m;
  m.categorical = true;
  std::sort(vals.begin(), vals.end());
  vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
  for (std::size_t i = 0; i < vals.size(); ++i) {
    if (i < max_bins)
      m.categories.push_back({vals[i]});
    else
      m.categories.back().push_back(vals[i]);  // overflow levels share the last bin
  }
  return m;
}

}  // namespace

BinnedData BinnedData::build(const LabeledSet& data, int max_bins) {
  const auto& X = data.X;
  if (X.rows() != data.y.size()) throw InvariantError("labels not aligned to rows");
  const std::size_t cap = static_cast<std::size_t>(std::clamp(max_bins, 2, 255));
  BinnedData b;
  b.rows = X.rows();
  b.features = X.columns;
  b.catalog_version = X.catalog_version;
  b.y.assign(data.y.begin(), data.y.end());
  b.codes.resize(X.cols() * X.rows());
  for (std::size_t c = 0; c < X.cols(); ++c) {
    std::vector<double> vals;
    for (std::size_t r = 0; r < X.rows(); ++r) {
      const double v = X.at(r, c);
      if (X.is_missing(r, c)) continue;
      if (!std::isfinite(v))
        throw DataError("non-finite value in feature '" + X.columns[c].name + "' row " +
                        X.ids[r] + " is not marked missing");
      vals.push_back(v);
    }
    b.mappers.push_back(X.columns[c].kind == Kind::kCategorical
                            ? make_categorical_mapper(std::move(vals), cap)
                            : make_numeric_mapper(std::move(vals), cap));
    const auto& mapper = b.mappers.back();
    for (std::size_t r = 0; r < X.rows(); ++r)
      b.codes[c * X.rows() + r] =
          X.is_missing(r, c) ? static_cast<std::uint8_t>(mapper.bins()) : mapper.code(X.at(r, c));
  }
  return b;
}

namespace {

struct Split {
  double gain = 0.0;
  std::size_t feature = 0;  // index into the subset
  bool missing_left = false;
  std::size_t numeric_bin = 0;    // numeric: codes <= bin go left
  std::bitset<256> left_bins;     // categorical
};

struct NodeRouting {
  bool categorical = false;
  std::size_t column = 0;  // column in BinnedData
  std::size_t numeric_bin = 0;
  std::bitset<256> left_bins;
  bool missing_left = false;
  std::uint8_t missing_code = 0;

  bool goes_left(std::uint8_t code) const {
    if (code == missing_code) return missing_left;
    return categorical ? left_bins.test(code) : code <= numeric_bin;
  }
};

class TreeGrower {
 public:
  TreeGrower(const BinnedData& data, std::span<const std::size_t> subset,
             const Hyperparameters& hp, const std::vector<double>& r, const std::vector<double>& h)
      : data_(data), subset_(subset), hp_(hp), r_(r), h_(h) {}

  Tree grow(std::vector<std::uint32_t>& rows, std::vector<NodeRouting>& routing) {
    Tree tree;
    routing.clear();
    struct Work {
      std::size_t node, begin, end;
      int depth;
      std::shared_ptr<const Histograms> hist;  // null: build from rows when needed
    };
    std::deque<Work> queue;
    tree.nodes.emplace_back();
    routing.emplace_back();
    queue.push_back({0, 0, rows.size(), 0, nullptr});
    while (!queue.empty()) {
      const Work w = queue.front();
      queue.pop_front();
      std::span<const std::uint32_t> node_rows(rows.data() + w.begin, w.end - w.begin);
      double sr = 0.0, sh = 0.0;
      for (auto i : node_rows) {
        sr += r_[i];
        sh += h_[i];
      }
      auto& node = tree.nodes[w.node];
      node.samples = static_cast<std::int32_t>(node_rows.size());
      node.value = std::clamp(sr / std::max(sh, 1e-12), -kLeafClip, kLeafClip);

      const auto n = node_rows.size();
      if (w.depth >= hp_.max_depth || n < 2 * static_cast<std::size_t>(hp_.min_samples_leaf))
        continue;
      const auto hist = w.hist ? w.hist : std::make_shared<const Histograms>(build(node_rows));
      const auto split = best_split(*hist, node_rows.size(), sr);
      if (!split) continue;

      const std::size_t column = subset_[split->feature];
      const auto& mapper = data_.mappers[column];
      NodeRouting route;
      route.categorical = mapper.categorical;
      route.column = column;
      route.numeric_bin = split->numeric_bin;
      route.left_bins = split->left_bins;
      route.missing_left = split->missing_left;
      route.missing_code = static_cast<std::uint8_t>(mapper.bins());

      const std::uint8_t* codes = data_.codes.data() + column * data_.rows;
      auto mid = std::stable_partition(rows.begin() + static_cast<std::ptrdiff_t>(w.begin),
                                       rows.begin() + static_cast<std::ptrdiff_t>(w.end),
                                       [&](std::uint32_t i) { return route.goes_left(codes[i]); });
      const std::size_t m = static_cast<std::size_t>(mid - rows.begin());

      TreeNode internal;
      internal.feature = static_cast<std::int32_t>(split->feature);
      internal.categorical = mapper.categorical;
      internal.missing_left = split->missing_left;
      internal.gain = split->gain;
      internal.samples = static_cast<std::int32_t>(n);
      if (mapper.categorical) {
        for (std::size_t b = 0; b < mapper.bins(); ++b)
          if (split->left_bins.test(b))
            internal.left_categories.insert(internal.left_categories.end(),
                                            mapper.categories[b].begin(),
                                            mapper.categories[b].end());
        std::sort(internal.left_categories.begin(), internal.left_categories.end());
      } else {
        internal.threshold = mapper.uppers[split->numeric_bin];
      }
      internal.left = static_cast<std::int32_t>(tree.nodes.size());
      internal.right = internal.left + 1;
      tree.nodes[w.node] = std::move(internal);
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      routing[w.node] = route;
      routing.emplace_back();
      routing.emplace_back();
      // Children that may split get histograms: the smaller one from its
      // rows, the larger one as parent minus smaller.
      std::shared_ptr<const Histograms> left_hist, right_hist;
      const std::size_t nl = m - w.begin, nr = w.end - m;
      const auto can_split = [&](std::size_t rows_in) {
        return w.depth + 1 < hp_.max_depth &&
               rows_in >= 2 * static_cast<std::size_t>(hp_.min_samples_leaf);
      };
      if (can_split(nl) || can_split(nr)) {
        const bool left_small = nl <= nr;
        const std::span<const std::uint32_t> small_rows =
            left_small ? std::span<const std::uint32_t>(rows.data() + w.begin, nl)
                       : std::span<const std::uint32_t>(rows.data() + m, nr);
        auto small = std::make_shared<const Histograms>(build(small_rows));
        auto large = std::make_shared<const Histograms>(subtract(*hist, *small));
        left_hist = left_small ? small : large;
        right_hist = left_small ? large : small;
      }
      queue.push_back({static_cast<std::size_t>(tree.nodes[w.node].left), w.begin, m, w.depth + 1,
                       std::move(left_hist)});
      queue.push_back({static_cast<std::size_t>(tree.nodes[w.node].right), m, w.end, w.depth + 1,
                       std::move(right_hist)});
    }
    return tree;
  }

 private:
  /// Per-feature bin counts and residual sums; bin B of a feature is "missing".
  struct Histograms {
    std::vector<double> cnt, sum;  // subset feature fi at offset fi * kStride
  };
  static constexpr std::size_t kStride = 257;

  Histograms build(std::span<const std::uint32_t> rows) const {
    Histograms h;
    h.cnt.assign(subset_.size() * kStride, 0.0);
    h.sum.assign(subset_.size() * kStride, 0.0);
    for (std::size_t fi = 0; fi < subset_.size(); ++fi) {
      const std::size_t column = subset_[fi];
      if (data_.mappers[column].bins() < 2) continue;
      const std::uint8_t* codes = data_.codes.data() + column * data_.rows;
      double* cnt = h.cnt.data() + fi * kStride;
      double* sum = h.sum.data() + fi * kStride;
      for (auto i : rows) {
        const auto c = codes[i];
        cnt[c] += 1.0;
        sum[c] += r_[i];
      }
    }
    return h;
  }

  static Histograms subtract(const Histograms& parent, const Histograms& part) {
    Histograms h;
    h.cnt.resize(parent.cnt.size());
    h.sum.resize(parent.sum.size());
    for (std::size_t j = 0; j < parent.cnt.size(); ++j) {
      h.cnt[j] = parent.cnt[j] - part.cnt[j];
      // Empty bins hold exactly zero, not a rounding residue.
      h.sum[j] = h.cnt[j] > 0.0 ? parent.sum[j] - part.sum[j] : 0.0;
    }
    return h;
  }

  std::optional<Split> best_split(const Histograms& hist, std::size_t rows, double total_s) const {
    const double total_n = static_cast<double>(rows);
    const double parent = total_s * total_s / total_n;
    const double min_leaf = static_cast<double>(hp_.min_samples_leaf);
    std::optional<Split> best;
    double best_gain = 0.0;

    std::array<std::size_t, 256> order{};

    for (std::size_t fi = 0; fi < subset_.size(); ++fi) {
      const std::size_t column = subset_[fi];
      const auto& mapper = data_.mappers[column];
      const std::size_t B = mapper.bins();
      if (B < 2) continue;
      const double* cnt = hist.cnt.data() + fi * kStride;
      const double* sum = hist.sum.data() + fi * kStride;
      const double miss_n = cnt[B];
      const double miss_s = sum[B];

      // Candidate bins in scan order. Categorical levels are ordered by
      // smoothed mean residual; rare levels are left out of the scan and so
      // always fall on the right.
      std::size_t K = 0;
      std::size_t scan_end = 0;
      if (mapper.categorical) {
        const double min_rows = static_cast<double>(hp_.min_category_rows);
        std::size_t rare = 0;
        for (std::size_t b = 0; b < B; ++b) {
          if (cnt[b] >= min_rows && cnt[b] > 0) order[K++] = b;
          else if (cnt[b] > 0) ++rare;
        }
        if (K == 0 || K + rare < 2) continue;
        std::stable_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(K),
                         [&](std::size_t a, std::size_t b) {
                           return sum[a] / (cnt[a] + hp_.cat_smooth) <
                                  sum[b] / (cnt[b] + hp_.cat_smooth);
                         });
        // With rare levels on the right every placed level may go left.
        scan_end = std::min<std::size_t>(rare > 0 ? K : K - 1,
                                         static_cast<std::size_t>(hp_.max_cat_left));
      } else {
        for (std::size_t b = 0; b < B; ++b)
          if (cnt[b] > 0) order[K++] = b;
        if (K < 2) continue;
        scan_end = K - 1;
      }

      double ln = 0.0, ls = 0.0;
      for (std::size_t k = 0; k < scan_end; ++k) {
        ln += cnt[order[k]];
        ls += sum[order[k]];
        for (int ml = 0; ml < 2; ++ml) {
          if (ml == 1 && miss_n == 0.0) break;
          const double Ln = ln + (ml ? miss_n : 0.0);
          const double Ls = ls + (ml ? miss_s : 0.0);
          const double Rn = total_n - Ln;
          const double Rs = total_s - Ls;
          if (Ln < min_leaf || Rn < min_leaf) continue;
          const double lt = Ls * Ls / Ln;
          const double rt = Rs * Rs / Rn;
          const double gain = lt + rt - parent;
          // A later candidate must win by more than rounding noise, so exact
          // ties go to the first in scan order whatever the residual signs.
          const double tol = 1e-12 * (1.0 + lt + rt);
          if (gain <= tol || gain <= best_gain + tol) continue;
          Split s;
          s.gain = gain;
          s.feature = fi;
          s.missing_left = miss_n > 0.0 ? ml == 1 : Ln >= Rn;
          if (mapper.categorical) {
            for (std::size_t j = 0; j <= k; ++j) s.left_bins.set(order[j]);
          } else {
            s.numeric_bin = order[k];
          }
          best = s;
          best_gain = gain;
        }
      }
    }
    return best;
  }

  const BinnedData& data_;
  std::span<const std::size_t> subset_;
  const Hyperparameters& hp_;
  const std::vector<double>& r_;
  const std::vector<double>& h_;
};

double mean_deviance(const std::vector<double>& scores, const std::vector<double>& y) {
  // Binomial deviance -2 log L per row, via log(1 + e^s) - y s.
  double acc = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double s = scores[i];
    const double softplus = s > 0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s));
    acc += softplus - y[i] * s;
  }
  return 2.0 * acc / static_cast<double>(scores.size());
}

}  // namespace

GbmModel train_binned(const BinnedData& data, std::span<const std::size_t> feature_subset,
                      const Hyperparameters& hp, std::uint64_t seed, TrainingTrace* trace,
                      std::vector<double>* final_probs) {
  if (hp.n_trees < 0 || hp.max_depth < 1 || hp.min_samples_leaf < 1)
    throw ConfigError("invalid tree hyperparameters");
  if (!(hp.learning_rate > 0.0 && hp.learning_rate <= 1.0))
    throw ConfigError("learning_rate must be in (0, 1]");
  if (!(hp.subsample > 0.0 && hp.subsample <= 1.0))
    throw ConfigError("subsample must be in (0, 1]");
  if (hp.min_category_rows < 1 || !(hp.cat_smooth >= 0.0) || hp.max_cat_left < 1)
    throw ConfigError("invalid categorical split guards");
  const std::size_t n = data.rows;
  const double positives = std::accumulate(data.y.begin(), data.y.end(), 0.0);
  if (n == 0 || positives == 0.0 || positives == static_cast<double>(n))
    throw DataError("training target is degenerate: all rows belong to one class");

  GbmModel model;
  model.catalog_version = data.catalog_version;
  for (auto c : feature_subset) model.features.push_back(data.features.at(c));
  model.hyperparameters = hp;
  model.learning_rate = hp.learning_rate;
  model.seed = seed;
  const double pbar = positives / static_cast<double>(n);
  model.initial_score = std::log(pbar / (1.0 - pbar));

  const auto& k = kernels::active();
  std::vector<double> scores(n, model.initial_score);
  std::vector<double> probs(n), r(n), h(n), leaf_values;
  std::vector<std::int32_t> leaf_of(n);
  std::vector<std::uint32_t> rows;
  std::vector<NodeRouting> routing;
  if (trace) trace->deviance.assign(1, mean_deviance(scores, data.y));

  std::mt19937_64 rng(derive_seed(seed, "gbm.subsample"));
  const std::size_t m = hp.subsample < 1.0
                            ? std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(
                                                           hp.subsample * static_cast<double>(n))))
                            : n;
  std::vector<std::uint32_t> all(n);
  std::iota(all.begin(), all.end(), 0u);

  TreeGrower grower(data, feature_subset, hp, r, h);
  for (int t = 0; t < hp.n_trees; ++t) {
    for (std::size_t i = 0; i < n; ++i) probs[i] = sigmoid(scores[i]);
    k.residual_hessian(data.y.data(), probs.data(), r.data(), h.data(), n);

    if (m < n) {
      rows = all;
      for (std::size_t i = 0; i < m; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n - 1);
        std::swap(rows[i], rows[pick(rng)]);
      }
      rows.resize(m);
      std::sort(rows.begin(), rows.end());
    } else {
      rows = all;
    }

    Tree tree = grower.grow(rows, routing);

    // Route every training row (sampled or not) to its leaf by bin code.
    leaf_values.assign(tree.nodes.size(), 0.0);
    for (std::size_t j = 0; j < tree.nodes.size(); ++j)
      if (tree.nodes[j].is_leaf()) leaf_values[j] = tree.nodes[j].value;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t node = 0;
      while (!tree.nodes[node].is_leaf()) {
        const auto& route = routing[node];
        const bool left = route.goes_left(data.codes[route.column * n + i]);
        node = static_cast<std::size_t>(left ? tree.nodes[node].left : tree.nodes[node].right);
      }
      leaf_of[i] = static_cast<std::int32_t>(node);
    }
    k.add_gathered(scores.data(), leaf_values.data(), leaf_of.data(), hp.learning_rate, n);
    model.trees.push_back(std::move(tree));
    if (trace) trace->deviance.push_back(mean_deviance(scores, data.y));
  }

  if (final_probs) {
    final_probs->resize(n);
    for (std::size_t i = 0; i < n; ++i) (*final_probs)[i] = sigmoid(scores[i]);
  }
  return model;
}

GbmModel train(const LabeledSet& data, const Hyperparameters& hp, std::uint64_t seed,
               TrainingTrace* trace) {
  const auto binned = BinnedData::build(data, hp.max_bins);
  std::vector<std::size_t> subset(binned.features.size());
  std::iota(subset.begin(), subset.end(), 0);
  return train_binned(binned, subset, hp, seed, trace);
}

}  // namespace litmap::learn
