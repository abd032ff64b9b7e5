#include "vollab/features.hpp"
#include "vollab/csv.hpp"
#include "vollab/errors.hpp"
#include "vollab/math/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace vollab::features {

namespace {

// Front-month selection: roll to the back month one calendar day before the
// front expiry, i.e. a contract is eligible while expiry - date >= 2.
constexpr std::int64_t kRollDays = 2;

void check_zero_sum(const FlowRow& flow) {
    const auto near_zero = [](double sum, double scale) {
        return std::abs(sum) <= 1e-6 * std::max(1.0, scale);
    };
    const double pos_sum = flow.pos_a + flow.pos_p + flow.pos_m;
    const double pos_scale = std::abs(flow.pos_a) + std::abs(flow.pos_p) + std::abs(flow.pos_m);
    if (!near_zero(pos_sum, pos_scale)) {
        throw DataError("flows: positions do not sum to zero on " + flow.date.to_string());
    }
    const double chg_sum = flow.pos_change_a + flow.pos_change_p + flow.pos_change_m;
    const double chg_scale = std::abs(flow.pos_change_a) + std::abs(flow.pos_change_p) +
                             std::abs(flow.pos_change_m);
    if (!near_zero(chg_sum, chg_scale)) {
        throw DataError("flows: position changes do not sum to zero on " + flow.date.to_string());
    }
    const double vol_sum = flow.trad_vol_a + flow.trad_vol_p + flow.trad_vol_m;
    if (!near_zero(vol_sum - flow.trad_vol_tot, flow.trad_vol_tot)) {
        throw DataError("flows: per-account volumes do not sum to the total on " +
                        flow.date.to_string());
    }
}

} // namespace

DailyData load_daily_data(const LoadPaths& paths) {
    DailyData out;

    // options.csv: date, expiry_date, strike, implied_vol, forward
    const csv::Table options = csv::Table::read_file(paths.options);
    const std::size_t o_date = options.column("date");
    const std::size_t o_expiry = options.column("expiry_date");
    const std::size_t o_strike = options.column("strike");
    const std::size_t o_vol = options.column("implied_vol");
    const std::size_t o_fwd = options.column("forward");
    std::map<Date, std::vector<calib::ChainRow>> chains;
    std::set<std::tuple<std::int64_t, std::int64_t, double>> option_keys;
    for (std::size_t r = 0; r < options.n_rows(); ++r) {
        const Date date = options.date(r, o_date);
        calib::ChainRow row;
        row.expiry = options.date(r, o_expiry);
        row.strike = options.number(r, o_strike);
        row.implied_vol = options.number(r, o_vol);
        row.forward = options.number(r, o_fwd);
        if (!option_keys.emplace(date.days(), row.expiry.days(), row.strike).second) {
            throw DataError(paths.options + ": duplicate (date, expiry, strike) key on " +
                            date.to_string());
        }
        chains[date].push_back(row);
    }

    // index.csv: date, vstoxx
    const csv::Table index = csv::Table::read_file(paths.index);
    const std::size_t i_date = index.column("date");
    const std::size_t i_vstoxx = index.column("vstoxx");
    std::map<Date, double> index_by_date;
    for (std::size_t r = 0; r < index.n_rows(); ++r) {
        const Date date = index.date(r, i_date);
        if (!index_by_date.emplace(date, index.number(r, i_vstoxx)).second) {
            throw DataError(paths.index + ": duplicate date " + date.to_string());
        }
    }

    // futures.csv: date, expiry_date, settlement_price
    const csv::Table futures = csv::Table::read_file(paths.futures);
    const std::size_t f_date = futures.column("date");
    const std::size_t f_expiry = futures.column("expiry_date");
    const std::size_t f_price = futures.column("settlement_price");
    std::map<Date, std::vector<std::pair<Date, double>>> futures_by_date;
    std::set<std::pair<std::int64_t, std::int64_t>> future_keys;
    for (std::size_t r = 0; r < futures.n_rows(); ++r) {
        const Date date = futures.date(r, f_date);
        const Date expiry = futures.date(r, f_expiry);
        if (!future_keys.emplace(date.days(), expiry.days()).second) {
            throw DataError(paths.futures + ": duplicate (date, expiry) key on " +
                            date.to_string());
        }
        futures_by_date[date].emplace_back(expiry, futures.number(r, f_price));
    }

    // flows.csv
    const csv::Table flows = csv::Table::read_file(paths.flows);
    const auto col = [&](const char* name) { return flows.column(name); };
    const std::size_t cols[] = {
        col("date"),          col("pos_a"),          col("pos_p"),
        col("pos_m"),         col("pos_change_a"),   col("pos_change_p"),
        col("pos_change_m"),  col("trad_vol_a"),     col("trad_vol_p"),
        col("trad_vol_m"),    col("trad_vol_tot"),   col("avg_fut_spd"),
        col("avg_fut_bid_sz"), col("avg_fut_ask_sz"), col("option_pos_a"),
        col("option_pos_p"),  col("option_pos_m")};
    std::map<Date, FlowRow> flows_by_date;
    for (std::size_t r = 0; r < flows.n_rows(); ++r) {
        FlowRow row;
        row.date = flows.date(r, cols[0]);
        row.pos_a = flows.number(r, cols[1]);
        row.pos_p = flows.number(r, cols[2]);
        row.pos_m = flows.number(r, cols[3]);
        row.pos_change_a = flows.number(r, cols[4]);
        row.pos_change_p = flows.number(r, cols[5]);
        row.pos_change_m = flows.number(r, cols[6]);
        row.trad_vol_a = flows.number(r, cols[7]);
        row.trad_vol_p = flows.number(r, cols[8]);
        row.trad_vol_m = flows.number(r, cols[9]);
        row.trad_vol_tot = flows.number(r, cols[10]);
        row.avg_fut_spd = flows.number(r, cols[11]);
        row.avg_fut_bid_sz = flows.number(r, cols[12]);
        row.avg_fut_ask_sz = flows.number(r, cols[13]);
        row.option_pos_a = flows.number(r, cols[14]);
        row.option_pos_p = flows.number(r, cols[15]);
        row.option_pos_m = flows.number(r, cols[16]);
        check_zero_sum(row);
        if (!flows_by_date.emplace(row.date, row).second) {
            throw DataError(paths.flows + ": duplicate date " + row.date.to_string());
        }
    }

    for (const auto& [date, chain] : chains) {
        const auto idx_it = index_by_date.find(date);
        const auto fut_it = futures_by_date.find(date);
        const auto flow_it = flows_by_date.find(date);
        if (idx_it == index_by_date.end() || fut_it == futures_by_date.end() ||
            flow_it == flows_by_date.end()) {
            out.warnings.push_back("dropped " + date.to_string() + ": missing source data");
            continue;
        }
        // front month under the roll rule
        const std::pair<Date, double>* front = nullptr;
        for (const auto& contract : fut_it->second) {
            if (contract.first - date >= kRollDays &&
                (front == nullptr || contract.first < front->first)) {
                front = &contract;
            }
        }
        if (front == nullptr) {
            out.warnings.push_back("dropped " + date.to_string() + ": no live futures contract");
            continue;
        }
        calib::MarketDay day;
        day.date = date;
        try {
            day.slice = calib::select_slice(chain, date);
        } catch (const DataError& e) {
            out.warnings.push_back("dropped " + date.to_string() + ": " + e.what());
            continue;
        }
        day.vstoxx_observed = idx_it->second;
        day.future_expiry = front->first;
        day.future_market_price = front->second;
        out.days.push_back(std::move(day));
        out.flows.push_back(flow_it->second);
    }
    return out;
}

std::vector<FeatureRow> build_feature_table(const DailyData& data,
                                            const std::vector<calib::DayRecord>& calib_records,
                                            std::vector<std::string>& warnings) {
    std::map<Date, const calib::DayRecord*> by_date;
    for (const calib::DayRecord& record : calib_records) {
        by_date[record.date] = &record;
    }
    std::vector<FeatureRow> rows;
    rows.reserve(data.days.size());
    for (std::size_t i = 0; i < data.days.size(); ++i) {
        const calib::MarketDay& day = data.days[i];
        const auto it = by_date.find(day.date);
        if (it == by_date.end()) {
            warnings.push_back("no calibration record for " + day.date.to_string());
            continue;
        }
        if (!it->second->ok) {
            warnings.push_back("calibration failed on " + day.date.to_string() + ": " +
                               it->second->error);
            continue;
        }
        FeatureRow row;
        row.date = day.date;
        row.diff_price = it->second->diff_price;
        row.market_price = day.future_market_price;
        row.vstoxx = day.vstoxx_observed;
        row.fit_residual = it->second->objective;
        row.days_to_expiry = static_cast<double>(day.future_expiry - day.date);
        row.flow = data.flows[i];
        rows.push_back(row);
    }
    return rows;
}

std::vector<std::string> full_column_names() {
    return {"diff_price",    "market_price",   "vstoxx",         "fit_residual",
            "days_to_expiry", "pos_a",          "pos_p",          "pos_m",
            "pos_change_a",  "pos_change_p",   "pos_change_m",   "trad_vol_a",
            "trad_vol_p",    "trad_vol_m",     "trad_vol_tot",   "avg_fut_spd",
            "avg_fut_bid_sz", "avg_fut_ask_sz", "option_pos_a",   "option_pos_p",
            "option_pos_m"};
}

std::vector<double> full_column_values(const FeatureRow& r) {
    return {r.diff_price,
            r.market_price,
            r.vstoxx,
            r.fit_residual,
            r.days_to_expiry,
            r.flow.pos_a,
            r.flow.pos_p,
            r.flow.pos_m,
            r.flow.pos_change_a,
            r.flow.pos_change_p,
            r.flow.pos_change_m,
            r.flow.trad_vol_a,
            r.flow.trad_vol_p,
            r.flow.trad_vol_m,
            r.flow.trad_vol_tot,
            r.flow.avg_fut_spd,
            r.flow.avg_fut_bid_sz,
            r.flow.avg_fut_ask_sz,
            r.flow.option_pos_a,
            r.flow.option_pos_p,
            r.flow.option_pos_m};
}

CorrelationMatrix correlation_matrix(const std::vector<FeatureRow>& rows) {
    if (rows.size() < 3) {
        throw ValidationError("correlation_matrix: need at least 3 rows, got " +
                              std::to_string(rows.size()));
    }
    CorrelationMatrix out;
    out.names = full_column_names();
    const std::size_t p = out.names.size();
    const std::size_t n = rows.size();

    std::vector<std::vector<double>> columns(p, std::vector<double>(n));
    for (std::size_t r = 0; r < n; ++r) {
        const std::vector<double> values = full_column_values(rows[r]);
        for (std::size_t c = 0; c < p; ++c) {
            columns[c][r] = values[c];
        }
    }

    std::vector<double> mean(p, 0.0), sd(p, 0.0);
    for (std::size_t c = 0; c < p; ++c) {
        for (double v : columns[c]) {
            mean[c] += v;
        }
        mean[c] /= static_cast<double>(n);
        for (double v : columns[c]) {
            sd[c] += (v - mean[c]) * (v - mean[c]);
        }
        sd[c] = std::sqrt(sd[c] / static_cast<double>(n));
        if (sd[c] == 0.0) {
            out.warnings.push_back("column '" + out.names[c] +
                                   "' is constant; correlations set to 0");
        }
    }

    out.values.assign(p, std::vector<double>(p, 0.0));
    for (std::size_t i = 0; i < p; ++i) {
        out.values[i][i] = 1.0;
        for (std::size_t j = i + 1; j < p; ++j) {
            double cov = 0.0;
            for (std::size_t r = 0; r < n; ++r) {
                cov += (columns[i][r] - mean[i]) * (columns[j][r] - mean[j]);
            }
            cov /= static_cast<double>(n);
            const double denom = sd[i] * sd[j];
            const double corr = denom > 0.0 ? std::clamp(cov / denom, -1.0, 1.0) : 0.0;
            out.values[i][j] = corr;
            out.values[j][i] = corr;
        }
    }
    return out;
}

ConsolidatedTable consolidate(const std::vector<FeatureRow>& rows) {
    ConsolidatedTable table;
    table.feature_names = {"market_price", "days_to_expiry", "pos_a",          "pos_p",
                           "pos_m",        "pos_change_a",   "pos_change_p",   "pos_change_m",
                           "trad_vol_a",   "trad_vol_p",     "trad_vol_m",     "trad_vol_tot",
                           "avg_fut_spd",  "avg_fut_bid_sz", "avg_fut_ask_sz"};
    table.x.reserve(rows.size());
    for (const FeatureRow& r : rows) {
        table.x.push_back({r.market_price, r.days_to_expiry, r.flow.pos_a, r.flow.pos_p,
                           r.flow.pos_m, r.flow.pos_change_a, r.flow.pos_change_p,
                           r.flow.pos_change_m, r.flow.trad_vol_a, r.flow.trad_vol_p,
                           r.flow.trad_vol_m, r.flow.trad_vol_tot, r.flow.avg_fut_spd,
                           r.flow.avg_fut_bid_sz, r.flow.avg_fut_ask_sz});
        table.y.push_back(r.diff_price);
        table.dates.push_back(r.date);
    }
    return table;
}

SplitIndices train_test_split(std::size_t n_rows, double test_fraction, std::uint64_t seed) {
    if (n_rows < 10) {
        throw ValidationError("train_test_split: need at least 10 rows");
    }
    if (!(test_fraction > 0.0) || !(test_fraction < 1.0)) {
        throw ValidationError("train_test_split: test_fraction must be in (0, 1)");
    }
    std::vector<std::size_t> order(n_rows);
    for (std::size_t i = 0; i < n_rows; ++i) {
        order[i] = i;
    }
    rng::Xoshiro256 gen(seed, 0x5B17);
    for (std::size_t i = n_rows - 1; i > 0; --i) {
        const std::size_t j = static_cast<std::size_t>(gen.next_u64() % (i + 1));
        std::swap(order[i], order[j]);
    }
    const auto n_test = static_cast<std::size_t>(
        std::llround(test_fraction * static_cast<double>(n_rows)));
    SplitIndices split;
    split.test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
    split.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
    std::sort(split.test.begin(), split.test.end());
    std::sort(split.train.begin(), split.train.end());
    return split;
}

Scaler Scaler::fit(const std::vector<std::vector<double>>& x,
                   const std::vector<std::string>& names) {
    if (x.empty()) {
        throw ValidationError("scaler: empty feature matrix");
    }
    const std::size_t p = x.front().size();
    Scaler scaler;
    scaler.mean.assign(p, 0.0);
    scaler.stddev.assign(p, 0.0);
    const double n = static_cast<double>(x.size());
    for (const auto& row : x) {
        for (std::size_t c = 0; c < p; ++c) {
            scaler.mean[c] += row[c];
        }
    }
    for (double& m : scaler.mean) {
        m /= n;
    }
    for (const auto& row : x) {
        for (std::size_t c = 0; c < p; ++c) {
            const double d = row[c] - scaler.mean[c];
            scaler.stddev[c] += d * d;
        }
    }
    for (std::size_t c = 0; c < p; ++c) {
        scaler.stddev[c] = std::sqrt(scaler.stddev[c] / n); // population convention
        if (scaler.stddev[c] == 0.0) {
            const std::string name = c < names.size() ? names[c] : std::to_string(c);
            throw ValidationError("scaler: column '" + name + "' is constant");
        }
    }
    return scaler;
}

std::vector<std::vector<double>> Scaler::apply(const std::vector<std::vector<double>>& x) const {
    std::vector<std::vector<double>> out = x;
    for (auto& row : out) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            row[c] = (row[c] - mean[c]) / stddev[c];
        }
    }
    return out;
}

std::vector<std::vector<double>> Scaler::inverse(const std::vector<std::vector<double>>& x) const {
    std::vector<std::vector<double>> out = x;
    for (auto& row : out) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            row[c] = row[c] * stddev[c] + mean[c];
        }
    }
    return out;
}

} // namespace vollab::features
