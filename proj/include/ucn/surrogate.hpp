#pragma once

// COP -> KPI regression models.
//
// Each model is a tree ensemble over min-max scaled COP features. Targets
// are min-max normalized per database before fitting (so cross-validation
// RMSE is comparable across targets) and predictions are mapped back to KPI
// units on output. Gradient-boosted trees are the primary family; a random
// forest serves as the non-boosting control in the candidate menu.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ucn/datagen.hpp"
#include "ucn/netsim.hpp"

namespace ucn {

struct MinMaxScaler {
  std::array<double, 3> mins{0.0, 0.0, 0.0};
  std::array<double, 3> maxs{1.0, 1.0, 1.0};

  static MinMaxScaler fit(std::span<const CopPoint> X);
  // Maps into [0,1], clamping out-of-range inputs; a degenerate feature
  // (max == min) maps to 0.
  std::array<double, 3> transform(const CopPoint& cop) const;
};

// Affine map between KPI units and the [0,1] fitting scale.
struct TargetScale {
  double t_min = 0.0;
  double t_max = 1.0;

  static TargetScale fit(std::span<const double> y);
  static TargetScale identity() { return {0.0, 1.0}; }
  double norm(double v) const {
    const double d = t_max - t_min;
    return d > 0.0 ? (v - t_min) / d : 0.0;
  }
  double denorm(double v) const { return t_min + v * (t_max - t_min); }
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf mean
};

struct RegressionTree {
  std::vector<TreeNode> nodes;
  double predict(const std::array<double, 3>& x) const;
};

struct TreeFitParams {
  int max_depth = 3;
  int min_samples_leaf = 3;
};

// CART-style least-squares fit on (already scaled) features.
RegressionTree fit_tree(std::span<const std::array<double, 3>> X,
                        std::span<const double> y,
                        std::span<const std::uint32_t> sample_indices,
                        const TreeFitParams& params);

struct GbtHparams {
  int n_trees = 200;
  double learning_rate = 0.1;
  int max_depth = 3;
  int min_samples_leaf = 3;
};

struct GbtModel {
  std::string kind = "gbt";  // gbt | forest
  std::string role;          // model_e | model_r
  std::string target_name;   // ase | ee
  GbtHparams hparams;
  double base_prediction = 0.0;
  double learning_rate = 0.1;
  MinMaxScaler scaler;
  TargetScale target_scale;
  std::vector<RegressionTree> trees;

  // base + lr * sum of tree outputs, mapped back to KPI units.
  double predict(const CopPoint& cop) const;
};

// Least-squares gradient boosting; the optional target scale is stored on
// the returned model so predictions come out in KPI units.
GbtModel fit_gbt(std::span<const CopPoint> X, std::span<const double> y,
                 const GbtHparams& hp,
                 TargetScale tscale = TargetScale::identity());

struct ForestHparams {
  int n_trees = 200;
  int max_depth = 6;
  int min_samples_leaf = 3;
  std::uint64_t seed = 7;
};

// Bootstrap-aggregated trees, expressed as a GbtModel with base 0 and
// learning rate 1/n_trees so one prediction path serves both families.
GbtModel fit_forest(std::span<const CopPoint> X, std::span<const double> y,
                    const ForestHparams& hp,
                    TargetScale tscale = TargetScale::identity());

struct CandidateSpec {
  std::string id;
  bool is_forest = false;
  GbtHparams gbt;
  ForestHparams forest;
};

// GBT presets plus the random-forest control.
std::vector<CandidateSpec> default_menu();

struct CandidateScore {
  std::string id;
  std::vector<double> fold_rmse;
  double mean_rmse = 0.0;
  double std_rmse = 0.0;
};

struct CvReport {
  int k = 0;
  std::vector<CandidateScore> candidates;
  std::string chosen;  // candidate with minimal mean RMSE (first on ties)
};

// K-fold RMSE with a contiguous split of seeded-shuffled indices.
CandidateScore kfold_rmse(std::span<const CopPoint> X,
                          std::span<const double> y, int k,
                          const CandidateSpec& candidate,
                          std::uint64_t shuffle_seed);

struct TargetModels {
  GbtModel ase;
  GbtModel ee;
  CvReport ase_report;
  CvReport ee_report;
};

// Fits one model per KPI from a database: menu-wide cross-validation picks
// the candidate, which is then refit on the full data. `role` is recorded
// on the models (model_e for KPI-level models, model_r for residuals).
TargetModels train_target_models(const Database& db, const std::string& role,
                                 int k, const std::vector<CandidateSpec>& menu,
                                 std::uint64_t shuffle_seed);

struct KpiModels {
  GbtModel ase_e, ee_e;  // fitted to erroneous KPIs
  GbtModel ase_r, ee_r;  // fitted to ideal - erroneous residuals
  CvReport reports[4];   // ase_e, ee_e, ase_r, ee_r
};

// The Model-E / Model-R pair set: E from the erroneous database, R from the
// residual database. Databases must share one COP grid.
KpiModels train_kpi_models(const Database& erroneous, const Database& residual,
                           int k, const std::vector<CandidateSpec>& menu,
                           std::uint64_t shuffle_seed);

void save_model(const GbtModel& model, const std::string& path);
GbtModel load_model(const std::string& path);
// Loads and rejects models whose recorded role/target do not match.
GbtModel load_model(const std::string& path, const std::string& expected_role,
                    const std::string& expected_target);

}  // namespace ucn
