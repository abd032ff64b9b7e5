#pragma once

#include <cstdint>
#include <string>

namespace vollab {

// Flat key=value run configuration. Command-line flags override file values;
// the serialized form round-trips losslessly and its hash goes into every
// output's provenance line.
struct RunConfig {
    std::string data_dir = "data";
    std::string out_dir = "out";
    std::string calib_file; // empty: <out_dir>/calibration.csv
    std::uint64_t seed = 0;
    int threads = 0; // 0: runtime default

    double w_sigma = 10000.0;
    double w_idx = 2.0;
    int future_grid_nodes = 100000;

    long long mc_paths = 1000000;
    int mc_steps = 500;

    int gen_days = 500;
    double gen_effect = 1.0;
    double gen_noise = 0.05;

    double test_fraction = 0.30;
    int cv_folds = 5;
    int forest_trees = 250;
    int importance_repeats = 30;
    int lasso_alphas = 100;

    std::string serialize() const;
    static RunConfig parse(const std::string& text);
    static RunConfig load_file(const std::string& path);

    std::string resolved_calib_file() const;
    std::uint64_t hash() const; // FNV-1a 64 over the canonical serialization
    std::string provenance(const std::string& command) const;
};

} // namespace vollab
