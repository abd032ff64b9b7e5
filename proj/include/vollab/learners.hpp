#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace vollab::learners {

using Matrix = std::vector<std::vector<double>>; // row major

// ---------------------------------------------------------------------------
// L1-regularized linear regression
// ---------------------------------------------------------------------------

struct LassoFit {
    double alpha = 0.0;
    std::vector<double> coefficients;
    double intercept = 0.0;
    int n_sweeps = 0;

    double predict(const std::vector<double>& row) const;
};

// Objective (2n)^-1 ||y - b0 - X b||^2 + alpha ||b||_1, intercept unpenalized.
// Cyclic coordinate descent to duality gap <= gap_tol; alpha = 0 solves the
// normal equations directly. Throws NumericalError past the sweep cap.
LassoFit lasso_fit(const Matrix& x, const std::vector<double>& y, double alpha,
                   double gap_tol = 1e-9);

// Smallest alpha for which the all-zero coefficient vector is optimal.
double alpha_max(const Matrix& x, const std::vector<double>& y);

// sum_i |beta_alpha,i| / sum_i |beta_0,i| (absolute-value convention).
double shrinkage_factor(const LassoFit& fit, const LassoFit& ols);

struct LassoPath {
    std::vector<double> alphas; // decreasing, alpha_max down to ratio*alpha_max
    std::vector<LassoFit> fits;
    std::vector<double> shrinkage;
    LassoFit ols;
};

LassoPath lasso_path(const Matrix& x, const std::vector<double>& y, int n_alphas = 100,
                     double alpha_min_ratio = 1e-4);

struct CvResult {
    double best_alpha = 0.0;
    std::vector<double> alphas;
    std::vector<double> mean_scores; // mean explained variance across folds
};

// k seeded random 80/20 splits of the given rows; mean explained variance per
// alpha on the verification part; ties resolved toward stronger
// regularization (larger alpha).
CvResult cross_validate_alpha(const Matrix& x, const std::vector<double>& y,
                              const std::vector<double>& alphas, int k, std::uint64_t seed);

// 1 - Var(y - y_hat) / Var(y). Offset-insensitive by construction.
double explained_variance(const std::vector<double>& y, const std::vector<double>& y_hat);

// ---------------------------------------------------------------------------
// Random forest regression
// ---------------------------------------------------------------------------

struct ForestSettings {
    int n_trees = 250;
    bool bootstrap = true; // test hook: off reproduces training targets with 1 tree
    std::uint64_t seed = 0;
};

struct TreeNode {
    int feature = -1; // -1: leaf
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    double value = 0.0;
};

struct Tree {
    std::vector<TreeNode> nodes;
    double predict(const std::vector<double>& row) const;
};

struct ForestModel {
    ForestSettings settings;
    std::vector<Tree> trees;

    double predict(const std::vector<double>& row) const;
    std::vector<double> predict_all(const Matrix& x) const;
};

// Bagged CART regression trees grown to pure leaves, variance-reduction
// splits over all features. Trees fit in parallel on per-tree RNG streams.
ForestModel forest_fit(const Matrix& x, const std::vector<double>& y,
                       const ForestSettings& settings = ForestSettings{});

namespace serial_ref {
// Plain loop kept as the reference implementation; bit-identical to the
// OpenMP kernel.
ForestModel forest_fit(const Matrix& x, const std::vector<double>& y,
                       const ForestSettings& settings = ForestSettings{});
} // namespace serial_ref

struct ImportanceReport {
    std::vector<double> mean; // per feature, over n_repeats forests
    std::vector<double> stddev;
    double baseline_mean = 0.0; // mean held-out explained variance
    int n_repeats = 0;
};

// For each of n_repeats seeds: fit a forest, score it on the held-out set,
// then measure the explained-variance drop after permuting one feature column
// (one seeded permutation per feature per forest).
ImportanceReport permutation_importance(const Matrix& x_train, const std::vector<double>& y_train,
                                        const Matrix& x_test, const std::vector<double>& y_test,
                                        const ForestSettings& settings, int n_repeats,
                                        std::uint64_t base_seed);

} // namespace vollab::learners
