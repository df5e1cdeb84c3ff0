#include "ucn/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "ucn/rng.hpp"

namespace ucn {

namespace {

struct SortedIndices {
  // One index list per feature, ordered by that feature's value (ties by
  // index). Bootstrap duplicates are allowed.
  std::array<std::vector<std::uint32_t>, 3> by_feature;
};

SortedIndices sort_indices(std::span<const std::array<double, 3>> X,
                           std::span<const std::uint32_t> samples) {
  SortedIndices s;
  for (int f = 0; f < 3; ++f) {
    auto& idx = s.by_feature[f];
    idx.assign(samples.begin(), samples.end());
    std::sort(idx.begin(), idx.end(),
              [&X, f](std::uint32_t a, std::uint32_t b) {
                if (X[a][f] != X[b][f]) return X[a][f] < X[b][f];
                return a < b;
              });
  }
  return s;
}

double mean_of(std::span<const double> y,
               const std::vector<std::uint32_t>& idx) {
  double s = 0.0;
  for (auto i : idx) s += y[i];
  return idx.empty() ? 0.0 : s / static_cast<double>(idx.size());
}

struct BestSplit {
  int feature = -1;
  double threshold = 0.0;
  double child_sse = std::numeric_limits<double>::infinity();
};

class TreeBuilder {
 public:
  TreeBuilder(std::span<const std::array<double, 3>> X,
              std::span<const double> y, const TreeFitParams& params)
      : X_(X), y_(y), params_(params) {}

  RegressionTree build(std::span<const std::uint32_t> samples) {
    RegressionTree tree;
    if (samples.empty())
      throw std::invalid_argument("fit_tree: no samples");
    grow(tree, sort_indices(X_, samples), 0);
    return tree;
  }

 private:
  int grow(RegressionTree& tree, SortedIndices node, int depth) {
    const auto& any = node.by_feature[0];
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[id].value = mean_of(y_, any);

    if (depth >= params_.max_depth ||
        any.size() < 2 * static_cast<std::size_t>(params_.min_samples_leaf))
      return id;

    const BestSplit split = find_split(node);
    if (split.feature < 0) return id;

    SortedIndices left, right;
    for (int f = 0; f < 3; ++f) {
      for (std::uint32_t i : node.by_feature[f]) {
        if (X_[i][split.feature] <= split.threshold)
          left.by_feature[f].push_back(i);
        else
          right.by_feature[f].push_back(i);
      }
    }
    tree.nodes[id].feature = split.feature;
    tree.nodes[id].threshold = split.threshold;
    const int l = grow(tree, std::move(left), depth + 1);
    const int r = grow(tree, std::move(right), depth + 1);
    tree.nodes[id].left = l;
    tree.nodes[id].right = r;
    return id;
  }

  BestSplit find_split(const SortedIndices& node) const {
    BestSplit best;
    const std::size_t n = node.by_feature[0].size();
    double total_sum = 0.0, total_sq = 0.0;
    for (std::uint32_t i : node.by_feature[0]) {
      total_sum += y_[i];
      total_sq += y_[i] * y_[i];
    }
    const double parent_sse =
        total_sq - total_sum * total_sum / static_cast<double>(n);
    best.child_sse = parent_sse;  // a split must strictly improve

    const std::size_t min_leaf =
        static_cast<std::size_t>(params_.min_samples_leaf);
    for (int f = 0; f < 3; ++f) {
      const auto& idx = node.by_feature[f];
      double left_sum = 0.0, left_sq = 0.0;
      for (std::size_t pos = 0; pos + 1 < n; ++pos) {
        const double yi = y_[idx[pos]];
        left_sum += yi;
        left_sq += yi * yi;
        const double xv = X_[idx[pos]][f];
        const double xn = X_[idx[pos + 1]][f];
        if (xv == xn) continue;  // can only cut between distinct values
        const std::size_t nl = pos + 1;
        const std::size_t nr = n - nl;
        if (nl < min_leaf || nr < min_leaf) continue;
        const double right_sum = total_sum - left_sum;
        const double right_sq = total_sq - left_sq;
        const double sse =
            (left_sq - left_sum * left_sum / static_cast<double>(nl)) +
            (right_sq - right_sum * right_sum / static_cast<double>(nr));
        if (sse < best.child_sse) {
          best.child_sse = sse;
          best.feature = f;
          best.threshold = 0.5 * (xv + xn);
        }
      }
    }
    return best;
  }

  std::span<const std::array<double, 3>> X_;
  std::span<const double> y_;
  TreeFitParams params_;
};

std::vector<std::array<double, 3>> scale_all(std::span<const CopPoint> X,
                                             const MinMaxScaler& scaler) {
  std::vector<std::array<double, 3>> out(X.size());
  for (std::size_t i = 0; i < X.size(); ++i) out[i] = scaler.transform(X[i]);
  return out;
}

void check_training_data(std::span<const CopPoint> X,
                         std::span<const double> y, int min_leaf) {
  if (X.empty() || y.empty())
    throw std::invalid_argument("fit: empty training data");
  if (X.size() != y.size())
    throw std::invalid_argument("fit: |X| != |y|");
  if (X.size() < 2 * static_cast<std::size_t>(min_leaf))
    throw std::invalid_argument("fit: need at least 2*min_samples_leaf rows");
  for (double v : y)
    if (!std::isfinite(v))
      throw std::invalid_argument("fit: non-finite target value");
}

double rmse(std::span<const double> err) {
  double s = 0.0;
  for (double e : err) s += e * e;
  return std::sqrt(s / static_cast<double>(err.size()));
}

}  // namespace

MinMaxScaler MinMaxScaler::fit(std::span<const CopPoint> X) {
  if (X.empty()) throw std::invalid_argument("MinMaxScaler: empty data");
  MinMaxScaler s;
  for (int f = 0; f < 3; ++f) {
    s.mins[f] = std::numeric_limits<double>::infinity();
    s.maxs[f] = -std::numeric_limits<double>::infinity();
  }
  for (const auto& cop : X) {
    const std::array<double, 3> v{cop.lambda_dbs, cop.r_sz, cop.p_tx_dbm};
    for (int f = 0; f < 3; ++f) {
      s.mins[f] = std::min(s.mins[f], v[f]);
      s.maxs[f] = std::max(s.maxs[f], v[f]);
    }
  }
  return s;
}

std::array<double, 3> MinMaxScaler::transform(const CopPoint& cop) const {
  const std::array<double, 3> v{cop.lambda_dbs, cop.r_sz, cop.p_tx_dbm};
  std::array<double, 3> out{};
  for (int f = 0; f < 3; ++f) {
    const double d = maxs[f] - mins[f];
    if (d <= 0.0) {
      out[f] = 0.0;
    } else {
      out[f] = std::clamp((v[f] - mins[f]) / d, 0.0, 1.0);
    }
  }
  return out;
}

TargetScale TargetScale::fit(std::span<const double> y) {
  if (y.empty()) throw std::invalid_argument("TargetScale: empty data");
  TargetScale t;
  t.t_min = *std::min_element(y.begin(), y.end());
  t.t_max = *std::max_element(y.begin(), y.end());
  return t;
}

double RegressionTree::predict(const std::array<double, 3>& x) const {
  int id = 0;
  while (nodes[id].feature >= 0)
    id = x[nodes[id].feature] <= nodes[id].threshold ? nodes[id].left
                                                     : nodes[id].right;
  return nodes[id].value;
}

RegressionTree fit_tree(std::span<const std::array<double, 3>> X,
                        std::span<const double> y,
                        std::span<const std::uint32_t> sample_indices,
                        const TreeFitParams& params) {
  TreeBuilder builder(X, y, params);
  return builder.build(sample_indices);
}

double GbtModel::predict(const CopPoint& cop) const {
  const std::array<double, 3> x = scaler.transform(cop);
  double acc = base_prediction;
  for (const auto& t : trees) acc += learning_rate * t.predict(x);
  return target_scale.denorm(acc);
}

GbtModel fit_gbt(std::span<const CopPoint> X, std::span<const double> y,
                 const GbtHparams& hp, TargetScale tscale) {
  check_training_data(X, y, hp.min_samples_leaf);
  GbtModel m;
  m.kind = "gbt";
  m.hparams = hp;
  m.learning_rate = hp.learning_rate;
  m.scaler = MinMaxScaler::fit(X);
  m.target_scale = tscale;

  const auto Xs = scale_all(X, m.scaler);
  const std::size_t n = X.size();
  std::vector<double> target(n);
  for (std::size_t i = 0; i < n; ++i) target[i] = tscale.norm(y[i]);

  m.base_prediction =
      std::accumulate(target.begin(), target.end(), 0.0) /
      static_cast<double>(n);

  std::vector<double> residual(n);
  for (std::size_t i = 0; i < n; ++i)
    residual[i] = target[i] - m.base_prediction;

  std::vector<std::uint32_t> all(n);
  std::iota(all.begin(), all.end(), 0u);
  const TreeFitParams tp{hp.max_depth, hp.min_samples_leaf};

  m.trees.reserve(hp.n_trees);
  for (int t = 0; t < hp.n_trees; ++t) {
    RegressionTree tree = fit_tree(Xs, residual, all, tp);
    for (std::size_t i = 0; i < n; ++i)
      residual[i] -= hp.learning_rate * tree.predict(Xs[i]);
    m.trees.push_back(std::move(tree));
  }
  return m;
}

GbtModel fit_forest(std::span<const CopPoint> X, std::span<const double> y,
                    const ForestHparams& hp, TargetScale tscale) {
  check_training_data(X, y, hp.min_samples_leaf);
  GbtModel m;
  m.kind = "forest";
  m.hparams = {hp.n_trees, 1.0 / hp.n_trees, hp.max_depth, hp.min_samples_leaf};
  m.learning_rate = 1.0 / hp.n_trees;
  m.base_prediction = 0.0;
  m.scaler = MinMaxScaler::fit(X);
  m.target_scale = tscale;

  const auto Xs = scale_all(X, m.scaler);
  const std::size_t n = X.size();
  std::vector<double> target(n);
  for (std::size_t i = 0; i < n; ++i) target[i] = tscale.norm(y[i]);

  const TreeFitParams tp{hp.max_depth, hp.min_samples_leaf};
  m.trees.reserve(hp.n_trees);
  for (int t = 0; t < hp.n_trees; ++t) {
    RngStream rng(derive_key(hp.seed, "rf.tree", static_cast<std::uint64_t>(t)));
    std::vector<std::uint32_t> sample(n);
    for (auto& s : sample) s = static_cast<std::uint32_t>(rng.below(n));
    m.trees.push_back(fit_tree(Xs, target, sample, tp));
  }
  return m;
}

std::vector<CandidateSpec> default_menu() {
  std::vector<CandidateSpec> menu;
  menu.push_back({"gbt_t200_lr0.1_d3", false, {200, 0.1, 3, 3}, {}});
  menu.push_back({"gbt_t400_lr0.05_d3", false, {400, 0.05, 3, 3}, {}});
  menu.push_back({"gbt_t200_lr0.1_d4", false, {200, 0.1, 4, 3}, {}});
  menu.push_back({"rf_t200_d6", true, {}, {200, 6, 3, 7}});
  return menu;
}

namespace {

GbtModel fit_candidate(std::span<const CopPoint> X, std::span<const double> y,
                       const CandidateSpec& c, TargetScale tscale) {
  return c.is_forest ? fit_forest(X, y, c.forest, tscale)
                     : fit_gbt(X, y, c.gbt, tscale);
}

}  // namespace

CandidateScore kfold_rmse(std::span<const CopPoint> X,
                          std::span<const double> y, int k,
                          const CandidateSpec& candidate,
                          std::uint64_t shuffle_seed) {
  const std::size_t n = X.size();
  if (k < 2) throw std::invalid_argument("kfold_rmse: k must be >= 2");
  if (static_cast<std::size_t>(k) > n)
    throw std::invalid_argument("kfold_rmse: k exceeds sample count");

  RngStream rng(derive_key(shuffle_seed, "cv.shuffle"));
  const auto order = rng.permutation(static_cast<std::uint32_t>(n));

  CandidateScore score;
  score.id = candidate.id;
  for (int fold = 0; fold < k; ++fold) {
    const std::size_t lo = n * fold / k;
    const std::size_t hi = n * (fold + 1) / k;
    std::vector<CopPoint> train_x;
    std::vector<double> train_y;
    train_x.reserve(n - (hi - lo));
    train_y.reserve(n - (hi - lo));
    for (std::size_t i = 0; i < n; ++i) {
      if (i >= lo && i < hi) continue;
      train_x.push_back(X[order[i]]);
      train_y.push_back(y[order[i]]);
    }
    const GbtModel m =
        fit_candidate(train_x, train_y, candidate, TargetScale::identity());
    std::vector<double> err;
    err.reserve(hi - lo);
    for (std::size_t i = lo; i < hi; ++i)
      err.push_back(m.predict(X[order[i]]) - y[order[i]]);
    score.fold_rmse.push_back(rmse(err));
  }

  double mean = 0.0;
  for (double v : score.fold_rmse) mean += v;
  mean /= static_cast<double>(k);
  double var = 0.0;
  for (double v : score.fold_rmse) var += (v - mean) * (v - mean);
  score.mean_rmse = mean;
  score.std_rmse = std::sqrt(var / static_cast<double>(k));
  return score;
}

namespace {

GbtModel train_one_target(std::span<const CopPoint> X,
                          std::span<const double> raw_y,
                          const std::string& role, const std::string& target,
                          int k, const std::vector<CandidateSpec>& menu,
                          std::uint64_t shuffle_seed, CvReport& report) {
  if (menu.empty()) throw std::invalid_argument("train: empty candidate menu");
  const TargetScale tscale = TargetScale::fit(raw_y);
  std::vector<double> yn(raw_y.size());
  for (std::size_t i = 0; i < raw_y.size(); ++i) yn[i] = tscale.norm(raw_y[i]);

  report.k = k;
  report.candidates.clear();
  std::size_t best = 0;
  for (std::size_t c = 0; c < menu.size(); ++c) {
    report.candidates.push_back(kfold_rmse(X, yn, k, menu[c], shuffle_seed));
    if (report.candidates[c].mean_rmse < report.candidates[best].mean_rmse)
      best = c;
  }
  report.chosen = menu[best].id;

  GbtModel m = fit_candidate(X, raw_y, menu[best], tscale);
  m.role = role;
  m.target_name = target;
  return m;
}

void check_alignment(const Database& a, const Database& b,
                     const char* what) {
  if (a.rows.size() != b.rows.size())
    throw std::invalid_argument(std::string(what) + ": row count mismatch");
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    const CopPoint& x = a.rows[i].cop;
    const CopPoint& y = b.rows[i].cop;
    if (x.lambda_dbs != y.lambda_dbs || x.r_sz != y.r_sz ||
        x.p_tx_dbm != y.p_tx_dbm)
      throw std::invalid_argument(std::string(what) +
                                  ": COP grid mismatch at row " +
                                  std::to_string(i));
  }
}

}  // namespace

TargetModels train_target_models(const Database& db, const std::string& role,
                                 int k, const std::vector<CandidateSpec>& menu,
                                 std::uint64_t shuffle_seed) {
  if (role != "model_e" && role != "model_r")
    throw std::invalid_argument("train: role must be model_e or model_r");
  std::vector<CopPoint> X;
  std::vector<double> ase, ee;
  X.reserve(db.rows.size());
  for (const auto& r : db.rows) {
    X.push_back(r.cop);
    ase.push_back(r.ase);
    ee.push_back(r.ee);
  }
  TargetModels out;
  out.ase = train_one_target(X, ase, role, "ase", k, menu, shuffle_seed,
                             out.ase_report);
  out.ee =
      train_one_target(X, ee, role, "ee", k, menu, shuffle_seed, out.ee_report);
  return out;
}

KpiModels train_kpi_models(const Database& erroneous, const Database& residual,
                           int k, const std::vector<CandidateSpec>& menu,
                           std::uint64_t shuffle_seed) {
  check_alignment(erroneous, residual, "train_kpi_models");
  KpiModels out;
  TargetModels e = train_target_models(erroneous, "model_e", k, menu,
                                       shuffle_seed);
  TargetModels r =
      train_target_models(residual, "model_r", k, menu, shuffle_seed);
  out.ase_e = std::move(e.ase);
  out.ee_e = std::move(e.ee);
  out.ase_r = std::move(r.ase);
  out.ee_r = std::move(r.ee);
  out.reports[0] = std::move(e.ase_report);
  out.reports[1] = std::move(e.ee_report);
  out.reports[2] = std::move(r.ase_report);
  out.reports[3] = std::move(r.ee_report);
  return out;
}

}  // namespace ucn
