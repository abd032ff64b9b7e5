#include "vollab/calibration.hpp"
#include "vollab/csv.hpp"
#include "vollab/errors.hpp"
#include "vollab/features.hpp"
#include "vollab/learners.hpp"
#include "vollab/mc.hpp"
#include "vollab/runconfig.hpp"
#include "vollab/synthetic.hpp"
#include "vollab/version.hpp"
#include "vollab/vstoxx.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <omp.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

namespace {

using vollab::RunConfig;
namespace calib = vollab::calib;
namespace features = vollab::features;
namespace learners = vollab::learners;
namespace csvio = vollab::csv;

constexpr int kExitValidation = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

features::LoadPaths data_paths(const RunConfig& cfg) {
    return {cfg.data_dir + "/options.csv", cfg.data_dir + "/index.csv",
            cfg.data_dir + "/futures.csv", cfg.data_dir + "/flows.csv"};
}

void warn_all(const std::vector<std::string>& warnings) {
    for (const std::string& w : warnings) {
        std::cerr << "warning: " << w << "\n";
    }
}

int cmd_gen(const RunConfig& cfg) {
    vollab::synthetic::GeneratorConfig gen;
    gen.n_days = cfg.gen_days;
    gen.seed = cfg.seed;
    gen.inventory_effect_strength = cfg.gen_effect;
    gen.noise_scale = cfg.gen_noise;
    gen.out_dir = cfg.out_dir;
    const auto files = vollab::synthetic::generate_synthetic(gen);
    std::cout << "wrote " << files.options << ", " << files.index << ", " << files.futures
              << ", " << files.flows << "\n";
    return 0;
}

int cmd_calibrate(const RunConfig& cfg) {
    const features::DailyData data = features::load_daily_data(data_paths(cfg));
    warn_all(data.warnings);
    if (data.days.empty()) {
        throw vollab::DataError("calibrate: no usable days after the join");
    }
    const calib::Weights weights{cfg.w_sigma, cfg.w_idx};
    vollab::vstoxx::FutureGrid grid;
    grid.n_nodes = cfg.future_grid_nodes;
    const std::vector<calib::DayRecord> records =
        calib::run_timeseries(data.days, cfg.seed, weights, grid);

    std::filesystem::create_directories(cfg.out_dir);
    csvio::Writer out(cfg.resolved_calib_file());
    out.comment(cfg.provenance("calibrate"));
    out.row({"date", "kappa", "theta", "xi", "rho", "v0", "objective", "model_future",
             "market_future", "diff_price", "converged", "error"});
    int failures = 0;
    for (const calib::DayRecord& r : records) {
        if (!r.ok) {
            ++failures;
        }
        out.row({csvio::Writer::format(r.date), csvio::Writer::format(r.params.kappa),
                 csvio::Writer::format(r.params.theta), csvio::Writer::format(r.params.xi),
                 csvio::Writer::format(r.params.rho), csvio::Writer::format(r.params.v0),
                 csvio::Writer::format(r.objective), csvio::Writer::format(r.model_future),
                 csvio::Writer::format(r.market_future), csvio::Writer::format(r.diff_price),
                 r.converged ? "1" : "0", r.error});
    }
    std::cout << "calibrated " << records.size() << " days (" << failures << " failures) -> "
              << cfg.resolved_calib_file() << "\n";
    return 0;
}

std::vector<calib::DayRecord> read_calibration(const std::string& path) {
    const csvio::Table table = csvio::Table::read_file(path);
    const std::size_t c_date = table.column("date");
    const std::size_t c_kappa = table.column("kappa");
    const std::size_t c_theta = table.column("theta");
    const std::size_t c_xi = table.column("xi");
    const std::size_t c_rho = table.column("rho");
    const std::size_t c_v0 = table.column("v0");
    const std::size_t c_obj = table.column("objective");
    const std::size_t c_model = table.column("model_future");
    const std::size_t c_market = table.column("market_future");
    const std::size_t c_diff = table.column("diff_price");
    const std::size_t c_conv = table.column("converged");
    const std::size_t c_err = table.column("error");
    std::vector<calib::DayRecord> records;
    records.reserve(table.n_rows());
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        calib::DayRecord rec;
        rec.date = table.date(r, c_date);
        rec.error = table.cell(r, c_err);
        rec.ok = rec.error.empty();
        if (rec.ok) {
            rec.params = {table.number(r, c_kappa), table.number(r, c_theta),
                          table.number(r, c_xi), table.number(r, c_rho), table.number(r, c_v0)};
            rec.objective = table.number(r, c_obj);
            rec.model_future = table.number(r, c_model);
            rec.market_future = table.number(r, c_market);
            rec.diff_price = table.number(r, c_diff);
            rec.converged = table.number(r, c_conv) != 0.0;
        }
        records.push_back(std::move(rec));
    }
    return records;
}

int cmd_analyze(const RunConfig& cfg) {
    const features::DailyData data = features::load_daily_data(data_paths(cfg));
    warn_all(data.warnings);
    const std::vector<calib::DayRecord> records = read_calibration(cfg.resolved_calib_file());
    std::vector<std::string> warnings;
    const std::vector<features::FeatureRow> rows =
        features::build_feature_table(data, records, warnings);
    warn_all(warnings);
    if (rows.size() < 10) {
        throw vollab::DataError("analyze: too few joined rows: " + std::to_string(rows.size()));
    }
    std::filesystem::create_directories(cfg.out_dir);

    // Correlation structure over the full Table-I set, target included.
    const features::CorrelationMatrix corr = features::correlation_matrix(rows);
    warn_all(corr.warnings);
    {
        csvio::Writer out(cfg.out_dir + "/correlation.csv");
        out.comment(cfg.provenance("analyze"));
        std::vector<std::string> header{"feature"};
        header.insert(header.end(), corr.names.begin(), corr.names.end());
        out.row(header);
        for (std::size_t i = 0; i < corr.names.size(); ++i) {
            std::vector<std::string> cells{corr.names[i]};
            for (double v : corr.values[i]) {
                cells.push_back(csvio::Writer::format(v));
            }
            out.row(cells);
        }
    }

    const features::ConsolidatedTable table = features::consolidate(rows);
    const features::SplitIndices split =
        features::train_test_split(table.x.size(), cfg.test_fraction, cfg.seed);
    learners::Matrix x_train, x_test;
    std::vector<double> y_train, y_test;
    for (std::size_t i : split.train) {
        x_train.push_back(table.x[i]);
        y_train.push_back(table.y[i]);
    }
    for (std::size_t i : split.test) {
        x_test.push_back(table.x[i]);
        y_test.push_back(table.y[i]);
    }

    // Lasso on standardized features (train statistics only).
    const features::Scaler scaler = features::Scaler::fit(x_train, table.feature_names);
    const learners::Matrix xs_train = scaler.apply(x_train);
    const learners::Matrix xs_test = scaler.apply(x_test);

    const learners::LassoPath path =
        learners::lasso_path(xs_train, y_train, cfg.lasso_alphas);
    {
        csvio::Writer out(cfg.out_dir + "/lasso_path.csv");
        out.comment(cfg.provenance("analyze"));
        std::vector<std::string> header{"alpha", "shrinkage"};
        for (const std::string& name : table.feature_names) {
            header.push_back("coef_" + name);
        }
        out.row(header);
        for (std::size_t g = 0; g < path.alphas.size(); ++g) {
            std::vector<std::string> cells{csvio::Writer::format(path.alphas[g]),
                                           csvio::Writer::format(path.shrinkage[g])};
            for (double b : path.fits[g].coefficients) {
                cells.push_back(csvio::Writer::format(b));
            }
            out.row(cells);
        }
    }

    const learners::CvResult cv =
        learners::cross_validate_alpha(xs_train, y_train, path.alphas, cfg.cv_folds, cfg.seed);
    {
        csvio::Writer out(cfg.out_dir + "/cv_scores.csv");
        out.comment(cfg.provenance("analyze"));
        out.row({"alpha", "mean_explained_variance"});
        for (std::size_t i = 0; i < cv.alphas.size(); ++i) {
            out.row({csvio::Writer::format(cv.alphas[i]),
                     csvio::Writer::format(cv.mean_scores[i])});
        }
    }

    const learners::LassoFit lasso = learners::lasso_fit(xs_train, y_train, cv.best_alpha);
    std::vector<double> lasso_train_hat(xs_train.size()), lasso_test_hat(xs_test.size());
    for (std::size_t i = 0; i < xs_train.size(); ++i) {
        lasso_train_hat[i] = lasso.predict(xs_train[i]);
    }
    for (std::size_t i = 0; i < xs_test.size(); ++i) {
        lasso_test_hat[i] = lasso.predict(xs_test[i]);
    }

    // Forest consumes raw features; trees are scale-invariant.
    learners::ForestSettings forest_settings;
    forest_settings.n_trees = cfg.forest_trees;
    forest_settings.seed = cfg.seed;
    const learners::ForestModel forest = learners::forest_fit(x_train, y_train, forest_settings);
    const std::vector<double> forest_train_hat = forest.predict_all(x_train);
    const std::vector<double> forest_test_hat = forest.predict_all(x_test);

    const learners::ImportanceReport importance = learners::permutation_importance(
        x_train, y_train, x_test, y_test, forest_settings, cfg.importance_repeats, cfg.seed);
    {
        csvio::Writer out(cfg.out_dir + "/importance.csv");
        out.comment(cfg.provenance("analyze"));
        out.row({"feature", "mean", "std"});
        for (std::size_t j = 0; j < table.feature_names.size(); ++j) {
            out.row({table.feature_names[j], csvio::Writer::format(importance.mean[j]),
                     csvio::Writer::format(importance.stddev[j])});
        }
    }

    {
        csvio::Writer out(cfg.out_dir + "/predictions.csv");
        out.comment(cfg.provenance("analyze"));
        out.row({"date", "split", "y", "y_hat_lasso", "y_hat_forest"});
        for (std::size_t k = 0; k < split.train.size(); ++k) {
            const std::size_t i = split.train[k];
            out.row({csvio::Writer::format(table.dates[i]), "train",
                     csvio::Writer::format(table.y[i]), csvio::Writer::format(lasso_train_hat[k]),
                     csvio::Writer::format(forest_train_hat[k])});
        }
        for (std::size_t k = 0; k < split.test.size(); ++k) {
            const std::size_t i = split.test[k];
            out.row({csvio::Writer::format(table.dates[i]), "test",
                     csvio::Writer::format(table.y[i]), csvio::Writer::format(lasso_test_hat[k]),
                     csvio::Writer::format(forest_test_hat[k])});
        }
    }

    nlohmann::json metrics;
    metrics["provenance"] = cfg.provenance("analyze");
    metrics["n_train"] = split.train.size();
    metrics["n_test"] = split.test.size();
    metrics["lasso"]["alpha"] = cv.best_alpha;
    metrics["lasso"]["shrinkage"] = learners::shrinkage_factor(lasso, path.ols);
    metrics["lasso"]["train_explained_variance"] =
        learners::explained_variance(y_train, lasso_train_hat);
    metrics["lasso"]["test_explained_variance"] =
        learners::explained_variance(y_test, lasso_test_hat);
    metrics["forest"]["n_trees"] = cfg.forest_trees;
    metrics["forest"]["train_explained_variance"] =
        learners::explained_variance(y_train, forest_train_hat);
    metrics["forest"]["test_explained_variance"] =
        learners::explained_variance(y_test, forest_test_hat);
    metrics["importance"]["n_repeats"] = cfg.importance_repeats;
    metrics["importance"]["baseline_mean_explained_variance"] = importance.baseline_mean;
    {
        std::FILE* f = std::fopen((cfg.out_dir + "/metrics.json").c_str(), "wb");
        if (f == nullptr) {
            throw vollab::DataError("cannot write " + cfg.out_dir + "/metrics.json");
        }
        const std::string text = metrics.dump(2);
        std::fwrite(text.data(), 1, text.size(), f);
        std::fputc('\n', f);
        std::fclose(f);
    }
    std::cout << "analyzed " << rows.size() << " rows -> " << cfg.out_dir << "\n";
    return 0;
}

struct OracleArgs {
    double kappa = 2.0, theta = 0.04, xi = 0.5, rho = -0.7, v0 = 0.04;
    double tau = 30.0 / 365.0;
    double forward = 100.0, strike = 100.0;
    std::string target = "future";
    bool antithetic = false;
};

int cmd_oracle(const RunConfig& cfg, const OracleArgs& args) {
    const vollab::heston::HestonParams params{args.kappa, args.theta, args.xi, args.rho,
                                              args.v0};
    params.validate();
    vollab::mc::McEstimate est;
    if (args.target == "future") {
        est = vollab::mc::mc_vstoxx_future(params, args.tau, cfg.mc_paths, cfg.mc_steps, cfg.seed,
                                           args.antithetic);
    } else if (args.target == "call") {
        est = vollab::mc::mc_call(params, args.forward, args.strike, args.tau, cfg.mc_paths,
                                  cfg.mc_steps, cfg.seed, args.antithetic);
    } else {
        throw vollab::ValidationError("oracle: unknown target '" + args.target +
                                      "' (use future|call)");
    }
    nlohmann::json out;
    out["target"] = args.target;
    out["value"] = est.value;
    out["std_error"] = est.std_error;
    out["n_paths"] = est.n_paths;
    out["n_steps"] = est.n_steps;
    out["seed"] = est.seed;
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_report(const RunConfig& cfg) {
    const std::string report_dir = cfg.out_dir + "/report";
    std::filesystem::create_directories(report_dir);

    // Fig 1 analog: market vs model futures price and the difference.
    const std::vector<calib::DayRecord> records = read_calibration(cfg.resolved_calib_file());
    {
        csvio::Writer out(report_dir + "/fig1_prices.csv");
        out.comment(cfg.provenance("report"));
        out.row({"date", "market_future", "model_future", "diff_price"});
        for (const calib::DayRecord& r : records) {
            if (!r.ok) {
                continue;
            }
            out.row({csvio::Writer::format(r.date), csvio::Writer::format(r.market_future),
                     csvio::Writer::format(r.model_future), csvio::Writer::format(r.diff_price)});
        }
    }

    // Fig 2 analog: correlation matrix pass-through.
    {
        const csvio::Table corr = csvio::Table::read_file(cfg.out_dir + "/correlation.csv");
        csvio::Writer out(report_dir + "/fig2_correlation.csv");
        out.comment(cfg.provenance("report"));
        out.row(corr.header());
        for (std::size_t r = 0; r < corr.n_rows(); ++r) {
            std::vector<std::string> cells;
            for (std::size_t c = 0; c < corr.header().size(); ++c) {
                cells.push_back(corr.cell(r, c));
            }
            out.row(cells);
        }
    }

    // Fig 3 analog: importance ranking, largest mean first.
    {
        const csvio::Table imp = csvio::Table::read_file(cfg.out_dir + "/importance.csv");
        const std::size_t c_feat = imp.column("feature");
        const std::size_t c_mean = imp.column("mean");
        const std::size_t c_std = imp.column("std");
        std::vector<std::size_t> order(imp.n_rows());
        for (std::size_t i = 0; i < order.size(); ++i) {
            order[i] = i;
        }
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return imp.number(a, c_mean) > imp.number(b, c_mean);
        });
        csvio::Writer out(report_dir + "/fig3_importance.csv");
        out.comment(cfg.provenance("report"));
        out.row({"feature", "mean", "std"});
        for (std::size_t i : order) {
            out.row({imp.cell(i, c_feat), imp.cell(i, c_mean), imp.cell(i, c_std)});
        }
    }

    // Fig 4 analog: per-day observed target vs both model predictions.
    {
        const csvio::Table pred = csvio::Table::read_file(cfg.out_dir + "/predictions.csv");
        csvio::Writer out(report_dir + "/fig4_predictions.csv");
        out.comment(cfg.provenance("report"));
        out.row(pred.header());
        for (std::size_t r = 0; r < pred.n_rows(); ++r) {
            std::vector<std::string> cells;
            for (std::size_t c = 0; c < pred.header().size(); ++c) {
                cells.push_back(pred.cell(r, c));
            }
            out.row(cells);
        }
    }
    std::cout << "report written to " << report_dir << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Heston-based volatility-index futures pricing and residual analysis"};
    app.set_version_flag("--version", std::string("vollab ") + vollab::kVersion);
    app.require_subcommand(1);

    // --config is applied first; explicit flags override file values.
    RunConfig cfg;
    std::string config_path;
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--config") {
            config_path = argv[i + 1];
        }
    }
    try {
        if (!config_path.empty()) {
            cfg = RunConfig::load_file(config_path);
        }
    } catch (const vollab::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const vollab::DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }

    std::string config_dummy;
    app.add_option("--config", config_dummy, "flat key=value config file");
    app.add_option("--seed", cfg.seed, "master RNG seed");
    app.add_option("--out", cfg.out_dir, "output directory");
    app.add_option("--threads", cfg.threads, "cap OpenMP worker count (0: default)");

    auto* gen = app.add_subcommand("gen", "generate a synthetic market bundle");
    gen->add_option("--days", cfg.gen_days, "number of trading days (>= 50)");
    gen->add_option("--effect", cfg.gen_effect, "planted inventory effect strength");
    gen->add_option("--noise", cfg.gen_noise, "futures price noise, index points");

    auto* calibrate = app.add_subcommand("calibrate", "calibrate the model day by day");
    calibrate->add_option("--data", cfg.data_dir, "directory with the four input CSVs");
    std::vector<double> weights;
    calibrate->add_option("--weights", weights, "smile and index weights")->expected(2);
    calibrate->add_option("--grid-nodes", cfg.future_grid_nodes,
                          "futures integration grid nodes");

    auto* analyze = app.add_subcommand("analyze", "correlations, Lasso path + CV, forest");
    analyze->add_option("--data", cfg.data_dir, "directory with the four input CSVs");
    analyze->add_option("--calib", cfg.calib_file, "calibration CSV (default <out>/calibration.csv)");
    analyze->add_option("--test-fraction", cfg.test_fraction, "held-out fraction");
    analyze->add_option("--folds", cfg.cv_folds, "cross-validation folds");
    analyze->add_option("--trees", cfg.forest_trees, "forest size");
    analyze->add_option("--importance-repeats", cfg.importance_repeats,
                        "forests for permutation importance");

    OracleArgs oracle_args;
    auto* oracle = app.add_subcommand("oracle", "Monte Carlo oracle run");
    oracle->add_option("--kappa", oracle_args.kappa, "mean reversion speed");
    oracle->add_option("--theta", oracle_args.theta, "long-term variance");
    oracle->add_option("--xi", oracle_args.xi, "vol of vol");
    oracle->add_option("--rho", oracle_args.rho, "correlation");
    oracle->add_option("--v0", oracle_args.v0, "initial variance");
    oracle->add_option("--tau", oracle_args.tau, "time to expiry, years");
    oracle->add_option("--forward", oracle_args.forward, "forward (call target)");
    oracle->add_option("--strike", oracle_args.strike, "strike (call target)");
    oracle->add_option("--target", oracle_args.target, "future|call");
    oracle->add_flag("--antithetic", oracle_args.antithetic, "antithetic variates");
    oracle->add_option("--paths", cfg.mc_paths, "Monte Carlo paths");
    oracle->add_option("--steps", cfg.mc_steps, "Euler steps");

    auto* report = app.add_subcommand("report", "emit figure-shaped data files");
    report->add_option("--calib", cfg.calib_file, "calibration CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e); // --help / --version
        }
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }

    try {
        if (cfg.threads > 0) {
            omp_set_num_threads(cfg.threads);
        }
        if (!weights.empty()) {
            cfg.w_sigma = weights[0];
            cfg.w_idx = weights[1];
        }
        if (gen->parsed()) {
            return cmd_gen(cfg);
        }
        if (calibrate->parsed()) {
            return cmd_calibrate(cfg);
        }
        if (analyze->parsed()) {
            return cmd_analyze(cfg);
        }
        if (oracle->parsed()) {
            return cmd_oracle(cfg, oracle_args);
        }
        if (report->parsed()) {
            return cmd_report(cfg);
        }
        std::cerr << "error: no subcommand\n";
        return kExitValidation;
    } catch (const vollab::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const vollab::DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const vollab::NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
}
