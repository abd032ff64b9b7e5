#include "vollab/learners.hpp"
#include "vollab/errors.hpp"
#include "vollab/math/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace vollab::learners {

namespace {

void check_xy(const Matrix& x, const std::vector<double>& y) {
    if (x.empty() || x.size() != y.size()) {
        throw ValidationError("learners: feature matrix and target size mismatch");
    }
    const std::size_t p = x.front().size();
    for (const auto& row : x) {
        if (row.size() != p) {
            throw ValidationError("learners: ragged feature matrix");
        }
    }
}

struct Centered {
    Matrix x;
    std::vector<double> y;
    std::vector<double> x_mean;
    double y_mean = 0.0;
    std::vector<double> col_sq; // (1/n) sum x_c^2 per column
};

Centered center(const Matrix& x, const std::vector<double>& y) {
    Centered c;
    const std::size_t n = x.size();
    const std::size_t p = x.front().size();
    c.x = x;
    c.y = y;
    c.x_mean.assign(p, 0.0);
    for (const auto& row : x) {
        for (std::size_t j = 0; j < p; ++j) {
            c.x_mean[j] += row[j];
        }
    }
    for (double& m : c.x_mean) {
        m /= static_cast<double>(n);
    }
    c.y_mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            c.x[i][j] -= c.x_mean[j];
        }
        c.y[i] -= c.y_mean;
    }
    c.col_sq.assign(p, 0.0);
    for (const auto& row : c.x) {
        for (std::size_t j = 0; j < p; ++j) {
            c.col_sq[j] += row[j] * row[j];
        }
    }
    for (double& v : c.col_sq) {
        v /= static_cast<double>(n);
    }
    return c;
}

double soft_threshold(double value, double threshold) {
    if (value > threshold) {
        return value - threshold;
    }
    if (value < -threshold) {
        return value + threshold;
    }
    return 0.0;
}

// Dense symmetric solve by Gaussian elimination with partial pivoting;
// the normal-equation path for alpha = 0.
std::vector<double> solve_normal_equations(const Centered& c) {
    const std::size_t n = c.x.size();
    const std::size_t p = c.x.front().size();
    std::vector<std::vector<double>> a(p, std::vector<double>(p + 1, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            for (std::size_t k = j; k < p; ++k) {
                a[j][k] += c.x[i][j] * c.x[i][k];
            }
            a[j][p] += c.x[i][j] * c.y[i];
        }
    }
    for (std::size_t j = 0; j < p; ++j) {
        for (std::size_t k = 0; k < j; ++k) {
            a[j][k] = a[k][j];
        }
    }
    for (std::size_t col = 0; col < p; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < p; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) {
                pivot = r;
            }
        }
        if (std::abs(a[pivot][col]) < 1e-12) {
            throw NumericalError("lasso_fit(alpha=0): singular normal equations");
        }
        std::swap(a[col], a[pivot]);
        for (std::size_t r = 0; r < p; ++r) {
            if (r == col) {
                continue;
            }
            const double factor = a[r][col] / a[col][col];
            for (std::size_t k = col; k <= p; ++k) {
                a[r][k] -= factor * a[col][k];
            }
        }
    }
    std::vector<double> beta(p);
    for (std::size_t j = 0; j < p; ++j) {
        beta[j] = a[j][p] / a[j][j];
    }
    return beta;
}

LassoFit finish_fit(const Centered& c, std::vector<double> beta, double alpha, int sweeps) {
    LassoFit fit;
    fit.alpha = alpha;
    fit.intercept = c.y_mean;
    for (std::size_t j = 0; j < beta.size(); ++j) {
        fit.intercept -= beta[j] * c.x_mean[j];
    }
    fit.coefficients = std::move(beta);
    fit.n_sweeps = sweeps;
    return fit;
}

// Cyclic coordinate descent on centered data, warm-startable.
LassoFit coordinate_descent(const Centered& c, double alpha, double gap_tol,
                            std::vector<double> beta) {
    const std::size_t n = c.x.size();
    const std::size_t p = c.x.front().size();
    std::vector<double> residual = c.y;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            residual[i] -= c.x[i][j] * beta[j];
        }
    }
    constexpr int kMaxSweeps = 100000;
    for (int sweep = 1; sweep <= kMaxSweeps; ++sweep) {
        for (std::size_t j = 0; j < p; ++j) {
            if (c.col_sq[j] == 0.0) {
                continue;
            }
            double rho = 0.0;
            if (beta[j] != 0.0) {
                for (std::size_t i = 0; i < n; ++i) {
                    residual[i] += c.x[i][j] * beta[j];
                }
            }
            for (std::size_t i = 0; i < n; ++i) {
                rho += c.x[i][j] * residual[i];
            }
            rho /= static_cast<double>(n);
            const double updated = soft_threshold(rho, alpha) / c.col_sq[j];
            if (updated != 0.0) {
                for (std::size_t i = 0; i < n; ++i) {
                    residual[i] -= c.x[i][j] * updated;
                }
            }
            beta[j] = updated;
        }
        // Duality gap: primal minus the value of the scaled-residual dual point.
        double rss = 0.0, l1 = 0.0, ry = 0.0, corr_max = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            rss += residual[i] * residual[i];
            ry += residual[i] * c.y[i];
        }
        for (std::size_t j = 0; j < p; ++j) {
            l1 += std::abs(beta[j]);
            double xr = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                xr += c.x[i][j] * residual[i];
            }
            corr_max = std::max(corr_max, std::abs(xr));
        }
        const double nn = static_cast<double>(n);
        const double primal = rss / (2.0 * nn) + alpha * l1;
        const double scale = corr_max > alpha * nn ? alpha * nn / corr_max : 1.0;
        const double dual = scale / nn * ry - scale * scale / (2.0 * nn) * rss;
        if (primal - dual <= gap_tol) {
            return finish_fit(c, std::move(beta), alpha, sweep);
        }
    }
    double max_coef = 0.0;
    for (double b : beta) {
        max_coef = std::max(max_coef, std::abs(b));
    }
    throw NumericalError("lasso_fit: no convergence after 100000 sweeps (alpha=" +
                         std::to_string(alpha) + ", max|coef|=" + std::to_string(max_coef) + ")");
}

} // namespace

double LassoFit::predict(const std::vector<double>& row) const {
    double value = intercept;
    for (std::size_t j = 0; j < coefficients.size(); ++j) {
        value += coefficients[j] * row[j];
    }
    return value;
}

LassoFit lasso_fit(const Matrix& x, const std::vector<double>& y, double alpha, double gap_tol) {
    check_xy(x, y);
    if (alpha < 0.0) {
        throw ValidationError("lasso_fit: alpha must be non-negative");
    }
    const Centered c = center(x, y);
    if (alpha == 0.0) {
        return finish_fit(c, solve_normal_equations(c), 0.0, 0);
    }
    return coordinate_descent(c, alpha, gap_tol, std::vector<double>(x.front().size(), 0.0));
}

double alpha_max(const Matrix& x, const std::vector<double>& y) {
    check_xy(x, y);
    const Centered c = center(x, y);
    double best = 0.0;
    for (std::size_t j = 0; j < c.x.front().size(); ++j) {
        double xy = 0.0;
        for (std::size_t i = 0; i < c.x.size(); ++i) {
            xy += c.x[i][j] * c.y[i];
        }
        best = std::max(best, std::abs(xy) / static_cast<double>(c.x.size()));
    }
    return best;
}

double shrinkage_factor(const LassoFit& fit, const LassoFit& ols) {
    double num = 0.0, den = 0.0;
    for (double b : fit.coefficients) {
        num += std::abs(b);
    }
    for (double b : ols.coefficients) {
        den += std::abs(b);
    }
    if (den == 0.0) {
        throw ValidationError("shrinkage_factor: OLS coefficient norm is zero");
    }
    return num / den;
}

LassoPath lasso_path(const Matrix& x, const std::vector<double>& y, int n_alphas,
                     double alpha_min_ratio) {
    check_xy(x, y);
    if (n_alphas < 2) {
        throw ValidationError("lasso_path: need at least 2 grid points");
    }
    LassoPath path;
    path.ols = lasso_fit(x, y, 0.0);
    const double a_max = alpha_max(x, y);
    if (a_max == 0.0) {
        throw ValidationError("lasso_path: target uncorrelated with every feature");
    }
    const Centered c = center(x, y);
    std::vector<double> beta(x.front().size(), 0.0);
    const double ratio_step = std::log(alpha_min_ratio) / (n_alphas - 1);
    for (int g = 0; g < n_alphas; ++g) {
        const double alpha = a_max * std::exp(ratio_step * g);
        LassoFit fit = coordinate_descent(c, alpha, 1e-9, beta);
        beta = fit.coefficients; // warm start down the path
        path.alphas.push_back(alpha);
        path.shrinkage.push_back(shrinkage_factor(fit, path.ols));
        path.fits.push_back(std::move(fit));
    }
    return path;
}

double explained_variance(const std::vector<double>& y, const std::vector<double>& y_hat) {
    if (y.size() != y_hat.size() || y.size() < 2) {
        throw ValidationError("explained_variance: need >= 2 matching observations");
    }
    const double n = static_cast<double>(y.size());
    double y_mean = 0.0, r_mean = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        y_mean += y[i];
        r_mean += y[i] - y_hat[i];
    }
    y_mean /= n;
    r_mean /= n;
    double y_var = 0.0, r_var = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        y_var += (y[i] - y_mean) * (y[i] - y_mean);
        const double r = y[i] - y_hat[i] - r_mean;
        r_var += r * r;
    }
    if (y_var == 0.0) {
        throw ValidationError("explained_variance: target variance is zero");
    }
    return 1.0 - r_var / y_var;
}

CvResult cross_validate_alpha(const Matrix& x, const std::vector<double>& y,
                              const std::vector<double>& alphas, int k, std::uint64_t seed) {
    check_xy(x, y);
    if (alphas.empty()) {
        throw ValidationError("cross_validate_alpha: empty alpha grid");
    }
    if (k < 2 || x.size() < static_cast<std::size_t>(2 * k)) {
        throw ValidationError("cross_validate_alpha: too few rows for " + std::to_string(k) +
                              " folds");
    }
    const std::size_t n = x.size();
    CvResult result;
    result.alphas = alphas;
    result.mean_scores.assign(alphas.size(), 0.0);

    for (int fold = 0; fold < k; ++fold) {
        // Random 80/20 split per fold.
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        rng::Xoshiro256 gen(seed, 0xCF0000 + static_cast<std::uint64_t>(fold));
        for (std::size_t i = n - 1; i > 0; --i) {
            const std::size_t j = static_cast<std::size_t>(gen.next_u64() % (i + 1));
            std::swap(order[i], order[j]);
        }
        const std::size_t n_verify = std::max<std::size_t>(1, n / 5);
        Matrix x_fit, x_verify;
        std::vector<double> y_fit, y_verify;
        for (std::size_t i = 0; i < n; ++i) {
            if (i < n_verify) {
                x_verify.push_back(x[order[i]]);
                y_verify.push_back(y[order[i]]);
            } else {
                x_fit.push_back(x[order[i]]);
                y_fit.push_back(y[order[i]]);
            }
        }
        const Centered c = center(x_fit, y_fit);
        std::vector<double> beta(x.front().size(), 0.0);
        // Descend the grid with warm starts; alphas arrive in any order, so
        // process an index ordering sorted by decreasing alpha.
        std::vector<std::size_t> by_alpha(alphas.size());
        std::iota(by_alpha.begin(), by_alpha.end(), std::size_t{0});
        std::sort(by_alpha.begin(), by_alpha.end(),
                  [&](std::size_t a, std::size_t b) { return alphas[a] > alphas[b]; });
        for (std::size_t idx : by_alpha) {
            LassoFit fit = alphas[idx] == 0.0
                               ? finish_fit(c, solve_normal_equations(c), 0.0, 0)
                               : coordinate_descent(c, alphas[idx], 1e-9, beta);
            beta = fit.coefficients;
            std::vector<double> y_hat(y_verify.size());
            for (std::size_t i = 0; i < x_verify.size(); ++i) {
                y_hat[i] = fit.predict(x_verify[i]);
            }
            result.mean_scores[idx] += explained_variance(y_verify, y_hat);
        }
    }
    for (double& s : result.mean_scores) {
        s /= k;
    }
    // Argmax with ties toward stronger regularization.
    std::size_t best = 0;
    for (std::size_t i = 1; i < alphas.size(); ++i) {
        const bool better = result.mean_scores[i] > result.mean_scores[best];
        const bool tie_larger = result.mean_scores[i] == result.mean_scores[best] &&
                                alphas[i] > alphas[best];
        if (better || tie_larger) {
            best = i;
        }
    }
    result.best_alpha = alphas[best];
    return result;
}

// ---------------------------------------------------------------------------
// Random forest
// ---------------------------------------------------------------------------

namespace {

struct TreeBuilder {
    const Matrix& x;
    const std::vector<double>& y;
    std::vector<TreeNode> nodes;

    std::int32_t build(std::vector<std::size_t> idx) {
        const std::size_t count = idx.size();
        double sum = 0.0;
        bool pure = true;
        for (std::size_t i : idx) {
            sum += y[i];
            if (y[i] != y[idx.front()]) {
                pure = false;
            }
        }
        const double mean = sum / static_cast<double>(count);
        if (pure || count < 2) {
            nodes.push_back({-1, 0.0, -1, -1, mean});
            return static_cast<std::int32_t>(nodes.size() - 1);
        }

        // Exhaustive variance-reduction scan over every feature. Splits sit
        // on order statistics (left group: x <= largest left value), which
        // makes the grown tree invariant under strictly monotone transforms.
        const std::size_t p = x.front().size();
        double best_gain = -1.0;
        std::size_t best_feature = 0;
        double best_threshold = 0.0;
        std::vector<std::pair<double, std::size_t>> sorted(count);
        for (std::size_t feature = 0; feature < p; ++feature) {
            for (std::size_t i = 0; i < count; ++i) {
                sorted[i] = {x[idx[i]][feature], idx[i]};
            }
            std::sort(sorted.begin(), sorted.end());
            double left_sum = 0.0;
            for (std::size_t split = 1; split < count; ++split) {
                left_sum += y[sorted[split - 1].second];
                if (sorted[split - 1].first == sorted[split].first) {
                    continue; // can only split between distinct values
                }
                const double right_sum = sum - left_sum;
                const double gain =
                    left_sum * left_sum / static_cast<double>(split) +
                    right_sum * right_sum / static_cast<double>(count - split) -
                    sum * sum / static_cast<double>(count);
                if (gain > best_gain) {
                    best_gain = gain;
                    best_feature = feature;
                    best_threshold = sorted[split - 1].first;
                }
            }
        }
        if (best_gain < 0.0) {
            nodes.push_back({-1, 0.0, -1, -1, mean}); // identical rows, mixed targets
            return static_cast<std::int32_t>(nodes.size() - 1);
        }

        std::vector<std::size_t> left_idx, right_idx;
        for (std::size_t i : idx) {
            (x[i][best_feature] <= best_threshold ? left_idx : right_idx).push_back(i);
        }
        idx.clear();
        idx.shrink_to_fit();
        nodes.push_back({static_cast<int>(best_feature), best_threshold, -1, -1, 0.0});
        const auto node_id = static_cast<std::int32_t>(nodes.size() - 1);
        const std::int32_t left = build(std::move(left_idx));
        const std::int32_t right = build(std::move(right_idx));
        nodes[static_cast<std::size_t>(node_id)].left = left;
        nodes[static_cast<std::size_t>(node_id)].right = right;
        return node_id;
    }
};

Tree build_tree(const Matrix& x, const std::vector<double>& y, const ForestSettings& settings,
                std::uint64_t tree_index) {
    const std::size_t n = x.size();
    std::vector<std::size_t> idx(n);
    if (settings.bootstrap) {
        rng::Xoshiro256 gen(settings.seed, 0xF0000000ULL + tree_index);
        for (std::size_t i = 0; i < n; ++i) {
            idx[i] = static_cast<std::size_t>(gen.next_u64() % n);
        }
    } else {
        std::iota(idx.begin(), idx.end(), std::size_t{0});
    }
    TreeBuilder builder{x, y, {}};
    builder.build(std::move(idx));
    return Tree{std::move(builder.nodes)};
}

ForestModel forest_fit_impl(const Matrix& x, const std::vector<double>& y,
                            const ForestSettings& settings, bool parallel) {
    check_xy(x, y);
    if (settings.n_trees < 1) {
        throw ValidationError("forest_fit: need at least one tree");
    }
    ForestModel model;
    model.settings = settings;
    model.trees.resize(static_cast<std::size_t>(settings.n_trees));
    if (parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int t = 0; t < settings.n_trees; ++t) {
            model.trees[static_cast<std::size_t>(t)] =
                build_tree(x, y, settings, static_cast<std::uint64_t>(t));
        }
    } else {
        for (int t = 0; t < settings.n_trees; ++t) {
            model.trees[static_cast<std::size_t>(t)] =
                build_tree(x, y, settings, static_cast<std::uint64_t>(t));
        }
    }
    return model;
}

} // namespace

double Tree::predict(const std::vector<double>& row) const {
    std::size_t node = 0;
    // Root is the first node pushed; internal nodes reference children by index.
    while (nodes[node].feature >= 0) {
        const TreeNode& current = nodes[node];
        node = static_cast<std::size_t>(row[static_cast<std::size_t>(current.feature)] <=
                                                current.threshold
                                            ? current.left
                                            : current.right);
    }
    return nodes[node].value;
}

double ForestModel::predict(const std::vector<double>& row) const {
    double sum = 0.0;
    for (const Tree& tree : trees) {
        sum += tree.predict(row);
    }
    return sum / static_cast<double>(trees.size());
}

std::vector<double> ForestModel::predict_all(const Matrix& x) const {
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = predict(x[i]);
    }
    return out;
}

ForestModel forest_fit(const Matrix& x, const std::vector<double>& y,
                       const ForestSettings& settings) {
    return forest_fit_impl(x, y, settings, true);
}

namespace serial_ref {
ForestModel forest_fit(const Matrix& x, const std::vector<double>& y,
                       const ForestSettings& settings) {
    return forest_fit_impl(x, y, settings, false);
}
} // namespace serial_ref

ImportanceReport permutation_importance(const Matrix& x_train, const std::vector<double>& y_train,
                                        const Matrix& x_test, const std::vector<double>& y_test,
                                        const ForestSettings& settings, int n_repeats,
                                        std::uint64_t base_seed) {
    check_xy(x_train, y_train);
    check_xy(x_test, y_test);
    if (n_repeats < 1) {
        throw ValidationError("permutation_importance: need n_repeats >= 1");
    }
    const std::size_t p = x_train.front().size();
    const std::size_t n_test = x_test.size();
    Matrix drops(static_cast<std::size_t>(n_repeats), std::vector<double>(p, 0.0));
    std::vector<double> baselines(static_cast<std::size_t>(n_repeats), 0.0);

#pragma omp parallel for schedule(dynamic)
    for (int repeat = 0; repeat < n_repeats; ++repeat) {
        ForestSettings fs = settings;
        fs.seed = rng::mix64(base_seed ^ rng::mix64(static_cast<std::uint64_t>(repeat) + 1));
        const ForestModel forest = serial_ref::forest_fit(x_train, y_train, fs);
        const double baseline = explained_variance(y_test, forest.predict_all(x_test));
        baselines[static_cast<std::size_t>(repeat)] = baseline;
        for (std::size_t feature = 0; feature < p; ++feature) {
            // One seeded permutation of the held-out column per (repeat, feature).
            std::vector<std::size_t> perm(n_test);
            std::iota(perm.begin(), perm.end(), std::size_t{0});
            rng::Xoshiro256 gen(base_seed,
                                0xBEEF0000ULL + static_cast<std::uint64_t>(repeat) * 1024ULL +
                                    static_cast<std::uint64_t>(feature));
            for (std::size_t i = n_test - 1; i > 0; --i) {
                const std::size_t j = static_cast<std::size_t>(gen.next_u64() % (i + 1));
                std::swap(perm[i], perm[j]);
            }
            Matrix shuffled = x_test;
            for (std::size_t i = 0; i < n_test; ++i) {
                shuffled[i][feature] = x_test[perm[i]][feature];
            }
            const double permuted = explained_variance(y_test, forest.predict_all(shuffled));
            drops[static_cast<std::size_t>(repeat)][feature] = baseline - permuted;
        }
    }

    ImportanceReport report;
    report.n_repeats = n_repeats;
    report.mean.assign(p, 0.0);
    report.stddev.assign(p, 0.0);
    for (int r = 0; r < n_repeats; ++r) {
        report.baseline_mean += baselines[static_cast<std::size_t>(r)];
        for (std::size_t j = 0; j < p; ++j) {
            report.mean[j] += drops[static_cast<std::size_t>(r)][j];
        }
    }
    report.baseline_mean /= n_repeats;
    for (double& m : report.mean) {
        m /= n_repeats;
    }
    for (int r = 0; r < n_repeats; ++r) {
        for (std::size_t j = 0; j < p; ++j) {
            const double d = drops[static_cast<std::size_t>(r)][j] - report.mean[j];
            report.stddev[j] += d * d;
        }
    }
    for (double& s : report.stddev) {
        s = std::sqrt(s / n_repeats);
    }
    return report;
}

} // namespace vollab::learners
