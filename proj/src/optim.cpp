#include "vollab/optim.hpp"
#include "vollab/errors.hpp"
#include "vollab/math/rng.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace vollab::opt {

namespace {

void check_box(const std::vector<double>& lo, const std::vector<double>& hi) {
    if (lo.empty() || lo.size() != hi.size()) {
        throw ValidationError("optimizer: box bounds empty or mismatched");
    }
    for (std::size_t i = 0; i < lo.size(); ++i) {
        if (!(lo[i] <= hi[i])) {
            throw ValidationError("optimizer: lower bound above upper bound");
        }
    }
}

std::vector<double> clip(std::vector<double> x, const std::vector<double>& lo,
                         const std::vector<double>& hi) {
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = std::clamp(x[i], lo[i], hi[i]);
    }
    return x;
}

double guarded(const Objective& f, const std::vector<double>& x, int& evals) {
    ++evals;
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::max();
}

} // namespace

OptResult differential_evolution(const Objective& f, const std::vector<double>& lo,
                                 const std::vector<double>& hi, const DeSettings& settings) {
    check_box(lo, hi);
    const std::size_t dim = lo.size();
    const std::size_t np = static_cast<std::size_t>(settings.pop_per_dim) * dim;
    if (np < 4) {
        throw ValidationError("differential_evolution: population too small");
    }
    rng::Xoshiro256 gen(settings.seed, 0xDE);

    std::vector<std::vector<double>> pop(np, std::vector<double>(dim));
    std::vector<double> cost(np);
    for (auto& member : pop) {
        for (std::size_t i = 0; i < dim; ++i) {
            member[i] = lo[i] + gen.next_uniform() * (hi[i] - lo[i]);
        }
    }

    int evals = 0;
    std::vector<int> eval_counts(np, 0);
#pragma omp parallel for schedule(static)
    for (std::int64_t m = 0; m < static_cast<std::int64_t>(np); ++m) {
        int local = 0;
        cost[static_cast<std::size_t>(m)] = guarded(f, pop[static_cast<std::size_t>(m)], local);
        eval_counts[static_cast<std::size_t>(m)] = local;
    }
    for (int c : eval_counts) {
        evals += c;
    }

    std::size_t best = static_cast<std::size_t>(
        std::min_element(cost.begin(), cost.end()) - cost.begin());
    bool converged = false;

    std::vector<std::vector<double>> trial(np, std::vector<double>(dim));
    std::vector<double> trial_cost(np);
    for (int generation = 0; generation < settings.max_generations; ++generation) {
        const double spread = *std::max_element(cost.begin(), cost.end()) -
                              *std::min_element(cost.begin(), cost.end());
        if (spread <= settings.spread_tol) {
            converged = true;
            break;
        }
        // Mutation and crossover draw from a single serial stream; evaluation
        // of the trial population is the parallel part.
        for (std::size_t m = 0; m < np; ++m) {
            std::size_t r1 = m, r2 = m;
            while (r1 == m) {
                r1 = static_cast<std::size_t>(gen.next_u64() % np);
            }
            while (r2 == m || r2 == r1) {
                r2 = static_cast<std::size_t>(gen.next_u64() % np);
            }
            const std::size_t forced = static_cast<std::size_t>(gen.next_u64() % dim);
            for (std::size_t i = 0; i < dim; ++i) {
                if (i == forced || gen.next_uniform() < settings.crossover) {
                    trial[m][i] = pop[best][i] + settings.weight * (pop[r1][i] - pop[r2][i]);
                } else {
                    trial[m][i] = pop[m][i];
                }
            }
            trial[m] = clip(std::move(trial[m]), lo, hi);
        }
#pragma omp parallel for schedule(static)
        for (std::int64_t m = 0; m < static_cast<std::int64_t>(np); ++m) {
            int local = 0;
            trial_cost[static_cast<std::size_t>(m)] =
                guarded(f, trial[static_cast<std::size_t>(m)], local);
            eval_counts[static_cast<std::size_t>(m)] = local;
        }
        for (int c : eval_counts) {
            evals += c;
        }
        for (std::size_t m = 0; m < np; ++m) {
            if (trial_cost[m] <= cost[m]) {
                pop[m] = trial[m];
                cost[m] = trial_cost[m];
                if (cost[m] < cost[best]) {
                    best = m;
                }
            }
        }
    }
    return {pop[best], cost[best], evals, converged};
}

OptResult lbfgsb_minimize(const Objective& f, const std::vector<double>& x0,
                          const std::vector<double>& lo, const std::vector<double>& hi,
                          const LbfgsSettings& settings) {
    check_box(lo, hi);
    const std::size_t dim = lo.size();
    if (x0.size() != dim) {
        throw ValidationError("lbfgsb: x0 dimension mismatch");
    }

    int evals = 0;
    std::vector<double> x = clip(x0, lo, hi);
    double fx = guarded(f, x, evals);
    std::vector<double> best_x = x;
    double best_f = fx;

    const auto gradient = [&](const std::vector<double>& at) {
        std::vector<double> g(dim, 0.0);
        for (std::size_t i = 0; i < dim; ++i) {
            const double h =
                settings.fd_rel_step * std::max(std::abs(at[i]), 1e-4 * (hi[i] - lo[i]) + 1e-12);
            std::vector<double> xp = at, xm = at;
            xp[i] = std::min(at[i] + h, hi[i]);
            xm[i] = std::max(at[i] - h, lo[i]);
            if (xp[i] == xm[i]) {
                continue; // degenerate box coordinate
            }
            g[i] = (guarded(f, xp, evals) - guarded(f, xm, evals)) / (xp[i] - xm[i]);
        }
        return g;
    };

    // Gradient components pointing out of the box at an active bound do not
    // count towards convergence.
    const auto projected_grad_norm = [&](const std::vector<double>& at,
                                         const std::vector<double>& g) {
        double norm = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            const bool blocked_low = at[i] <= lo[i] && g[i] > 0.0;
            const bool blocked_high = at[i] >= hi[i] && g[i] < 0.0;
            if (!blocked_low && !blocked_high) {
                norm = std::max(norm, std::abs(g[i]));
            }
        }
        return norm;
    };

    std::deque<std::pair<std::vector<double>, std::vector<double>>> history; // (s, y)
    std::vector<double> g = gradient(x);
    bool converged = false;

    for (int iter = 0; iter < settings.max_iterations; ++iter) {
        if (projected_grad_norm(x, g) <= settings.grad_tol * (1.0 + std::abs(fx))) {
            converged = true;
            break;
        }

        // Two-loop recursion.
        std::vector<double> q = g;
        std::vector<double> alpha(history.size());
        for (std::size_t h = history.size(); h-- > 0;) {
            const auto& [s, y] = history[h];
            double sy = 0.0, sq = 0.0;
            for (std::size_t i = 0; i < dim; ++i) {
                sy += s[i] * y[i];
                sq += s[i] * q[i];
            }
            alpha[h] = sq / sy;
            for (std::size_t i = 0; i < dim; ++i) {
                q[i] -= alpha[h] * y[i];
            }
        }
        if (!history.empty()) {
            const auto& [s, y] = history.back();
            double sy = 0.0, yy = 0.0;
            for (std::size_t i = 0; i < dim; ++i) {
                sy += s[i] * y[i];
                yy += y[i] * y[i];
            }
            const double gamma = sy / yy;
            for (double& qi : q) {
                qi *= gamma;
            }
        }
        for (std::size_t h = 0; h < history.size(); ++h) {
            const auto& [s, y] = history[h];
            double sy = 0.0, yq = 0.0;
            for (std::size_t i = 0; i < dim; ++i) {
                sy += s[i] * y[i];
                yq += y[i] * q[i];
            }
            const double beta = yq / sy;
            for (std::size_t i = 0; i < dim; ++i) {
                q[i] += (alpha[h] - beta) * s[i];
            }
        }
        std::vector<double> direction(dim);
        double dg = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            direction[i] = -q[i];
            dg += direction[i] * g[i];
        }
        if (!(dg < 0.0)) { // not a descent direction: restart from steepest descent
            history.clear();
            for (std::size_t i = 0; i < dim; ++i) {
                direction[i] = -g[i];
            }
        }

        // Backtracking Armijo search along the projected path.
        constexpr double kArmijo = 1e-4;
        const auto try_step = [&](double step, std::vector<double>& cand) {
            cand.resize(dim);
            for (std::size_t i = 0; i < dim; ++i) {
                cand[i] = x[i] + step * direction[i];
            }
            cand = clip(std::move(cand), lo, hi);
            double decrease = 0.0;
            for (std::size_t i = 0; i < dim; ++i) {
                decrease += g[i] * (cand[i] - x[i]);
            }
            const double fc = guarded(f, cand, evals);
            const bool ok = fc <= fx + kArmijo * decrease && fc < fx;
            return std::pair<bool, double>{ok, fc};
        };
        double step = 1.0;
        std::vector<double> x_new;
        double f_new = fx;
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls) {
            std::vector<double> cand;
            const auto [ok, fc] = try_step(step, cand);
            if (ok) {
                x_new = std::move(cand);
                f_new = fc;
                accepted = true;
                // The unit step passing outright hints the model underestimates
                // the step scale (short-step collapse); expand while it pays.
                if (ls == 0) {
                    for (int grow = 0; grow < 30; ++grow) {
                        std::vector<double> wide;
                        const auto [ok_wide, f_wide] = try_step(step * 2.0, wide);
                        if (!ok_wide || f_wide >= f_new) {
                            break;
                        }
                        step *= 2.0;
                        x_new = std::move(wide);
                        f_new = f_wide;
                    }
                }
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            converged = projected_grad_norm(x, g) <= 1e2 * settings.grad_tol * (1.0 + std::abs(fx));
            break; // no further progress at double resolution
        }

        std::vector<double> g_new = gradient(x_new);
        std::vector<double> s(dim), y(dim);
        double sy = 0.0, s_norm = 0.0, y_norm = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            s[i] = x_new[i] - x[i];
            y[i] = g_new[i] - g[i];
            sy += s[i] * y[i];
            s_norm += s[i] * s[i];
            y_norm += y[i] * y[i];
        }
        if (sy > 1e-10 * std::sqrt(s_norm * y_norm)) {
            history.emplace_back(std::move(s), std::move(y));
            if (static_cast<int>(history.size()) > settings.memory) {
                history.pop_front();
            }
        }

        const double improvement = fx - f_new;
        x = std::move(x_new);
        g = std::move(g_new);
        fx = f_new;
        if (fx < best_f) {
            best_f = fx;
            best_x = x;
        }
        if (improvement <= settings.f_tol * (1.0 + std::abs(fx))) {
            converged = true;
            break;
        }
    }

    if (fx < best_f) {
        best_f = fx;
        best_x = x;
    }
    return {best_x, best_f, evals, converged};
}

} // namespace vollab::opt
