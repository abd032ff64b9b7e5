#pragma once

#include "vollab/calibration.hpp"
#include "vollab/dates.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace vollab::features {

// Per-day aggregated position and flow data (one row of flows.csv).
struct FlowRow {
    Date date;
    double pos_a = 0.0, pos_p = 0.0, pos_m = 0.0;
    double pos_change_a = 0.0, pos_change_p = 0.0, pos_change_m = 0.0;
    double trad_vol_a = 0.0, trad_vol_p = 0.0, trad_vol_m = 0.0, trad_vol_tot = 0.0;
    double avg_fut_spd = 0.0, avg_fut_bid_sz = 0.0, avg_fut_ask_sz = 0.0;
    double option_pos_a = 0.0, option_pos_p = 0.0, option_pos_m = 0.0;
};

struct DailyData {
    std::vector<calib::MarketDay> days; // sorted by date
    std::vector<FlowRow> flows;         // aligned with days
    std::vector<std::string> warnings;
};

struct LoadPaths {
    std::string options;
    std::string index;
    std::string futures;
    std::string flows;
};

// Joins the four CSV sources by date. Days missing any source are dropped
// with a warning; duplicate keys and schema violations throw DataError.
// The front-month future is selected per the roll rule: the contract expiring
// soonest among those with at least two calendar days to expiry.
DailyData load_daily_data(const LoadPaths& paths);

// One day's feature vector plus the target.
struct FeatureRow {
    Date date;
    double diff_price = 0.0; // target: market minus model futures price
    double market_price = 0.0;
    double vstoxx = 0.0;
    double fit_residual = 0.0;
    double days_to_expiry = 0.0;
    FlowRow flow;
};

// Joins daily data with calibration records by date. Days without a usable
// calibration are reported in `warnings` and skipped.
std::vector<FeatureRow> build_feature_table(const DailyData& data,
                                            const std::vector<calib::DayRecord>& calib_records,
                                            std::vector<std::string>& warnings);

// Full Table-I column set, target included; the fixed order used everywhere.
std::vector<std::string> full_column_names();
std::vector<double> full_column_values(const FeatureRow& row);

struct CorrelationMatrix {
    std::vector<std::string> names;
    std::vector<std::vector<double>> values; // symmetric, unit diagonal
    std::vector<std::string> warnings;       // constant columns
};

// Pearson correlations over all Table-I columns including the target.
// Requires >= 3 rows; a constant column correlates as 0 with a warning.
CorrelationMatrix correlation_matrix(const std::vector<FeatureRow>& rows);

// Consolidated model inputs: market price kept, vstoxx / option positions /
// fit residual dropped, target separated out.
struct ConsolidatedTable {
    std::vector<std::string> feature_names; // fixed 15 columns
    std::vector<std::vector<double>> x;     // one row per day
    std::vector<double> y;                  // diff_price
    std::vector<Date> dates;
};

ConsolidatedTable consolidate(const std::vector<FeatureRow>& rows);

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

// Seeded random split; index lists come back sorted. Needs >= 10 rows.
SplitIndices train_test_split(std::size_t n_rows, double test_fraction, std::uint64_t seed);

// Column scaler: subtract mean, divide by population standard deviation.
struct Scaler {
    std::vector<double> mean;
    std::vector<double> stddev;

    static Scaler fit(const std::vector<std::vector<double>>& x,
                      const std::vector<std::string>& names);
    std::vector<std::vector<double>> apply(const std::vector<std::vector<double>>& x) const;
    std::vector<std::vector<double>> inverse(const std::vector<std::vector<double>>& x) const;
};

} // namespace vollab::features
