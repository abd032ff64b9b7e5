#include "vollab/synthetic.hpp"
#include "vollab/black.hpp"
#include "vollab/csv.hpp"
#include "vollab/dates.hpp"
#include "vollab/errors.hpp"
#include "vollab/heston.hpp"
#include "vollab/math/rng.hpp"
#include "vollab/version.hpp"
#include "vollab/vstoxx.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <vector>

namespace vollab::synthetic {

namespace {

constexpr int kWarmupDays = 1; // one extra day so day 0 has position changes

// Moneyness grid of the emitted smile; inside the calibration box and far
// from the region where extrinsic value drops below quadrature resolution.
constexpr double kMoneynessGrid[] = {-5.0, -4.0, -3.2, -2.5, -1.9,  -1.4, -1.0, -0.65,
                                     -0.35, 0.0, 0.3,  0.65, 1.0,  1.5,  2.2,  3.0};

bool is_weekday(const Date& d) {
    const int dow = static_cast<int>(((d.days() % 7) + 7 + 4) % 7); // 0 = Sunday
    return dow != 0 && dow != 6;
}

// Mean-reverting parameter path, clipped inside the working range.
struct ArState {
    double value;
    double base;
    double revert;   // pull toward base per day
    double step_std;
    double lo, hi;

    void advance(double z) {
        value += revert * (base - value) + step_std * z;
        value = std::clamp(value, lo, hi);
    }
};

} // namespace

GeneratedFiles generate_synthetic(const GeneratorConfig& config) {
    if (config.n_days < 50) {
        throw ValidationError("generate_synthetic: need n_days >= 50, got " +
                              std::to_string(config.n_days));
    }
    if (config.noise_scale < 0.0 || config.inventory_effect_strength < 0.0) {
        throw ValidationError("generate_synthetic: effect and noise must be non-negative");
    }
    std::filesystem::create_directories(config.out_dir);
    const std::string dir = config.out_dir.empty() ? "." : config.out_dir;
    GeneratedFiles files{dir + "/options.csv", dir + "/index.csv", dir + "/futures.csv",
                         dir + "/flows.csv"};

    csv::Writer options(files.options);
    csv::Writer index(files.index);
    csv::Writer futures(files.futures);
    csv::Writer flows(files.flows);
    const std::string provenance =
        std::string("vollab ") + kVersion + " gen seed=" + std::to_string(config.seed) +
        " days=" + std::to_string(config.n_days) +
        " effect=" + csv::Writer::format(config.inventory_effect_strength) +
        " noise=" + csv::Writer::format(config.noise_scale);
    for (csv::Writer* w : {&options, &index, &futures, &flows}) {
        w->comment(provenance);
    }
    options.row({"date", "expiry_date", "strike", "implied_vol", "forward"});
    index.row({"date", "vstoxx"});
    futures.row({"date", "expiry_date", "settlement_price"});
    flows.row({"date", "pos_a", "pos_p", "pos_m", "pos_change_a", "pos_change_p", "pos_change_m",
               "trad_vol_a", "trad_vol_p", "trad_vol_m", "trad_vol_tot", "avg_fut_spd",
               "avg_fut_bid_sz", "avg_fut_ask_sz", "option_pos_a", "option_pos_p",
               "option_pos_m"});

    rng::Xoshiro256 rng_params(config.seed, 1);
    rng::Xoshiro256 rng_forward(config.seed, 2);
    rng::Xoshiro256 rng_positions(config.seed, 3);
    rng::Xoshiro256 rng_option_pos(config.seed, 4);
    rng::Xoshiro256 rng_micro(config.seed, 5);
    rng::Xoshiro256 rng_future_noise(config.seed, 6);

    ArState kappa{2.0, 2.0, 0.02, 0.02, 0.3, 6.0};
    ArState theta{0.045, 0.045, 0.02, 0.0008, 0.02, 0.12};
    ArState xi{0.6, 0.6, 0.02, 0.01, 0.2, 1.2};
    ArState rho{-0.65, -0.65, 0.02, 0.008, -0.92, -0.3};
    ArState v0{0.05, 0.05, 0.03, 0.0025, 0.015, 0.3};
    double log_forward = std::log(3400.0);

    const double ar_pos = 0.97;
    const double pos_step = 2.2 * kPositionScale * std::sqrt(1.0 - ar_pos * ar_pos);
    const double stationary = 2.2 * kPositionScale;
    double pos_p = stationary * rng_positions.next_normal();
    double pos_a = stationary * rng_positions.next_normal();
    double opt_ar_p = 1147.0 * rng_option_pos.next_normal();
    double opt_ar_a = 1147.0 * rng_option_pos.next_normal();

    // Monthly expiry grid: the 18th of every month from the start.
    Date date = Date::from_ymd(2016, 5, 2);
    std::vector<Date> expiry_grid;
    for (int month = 0; month < 24 + config.n_days / 20; ++month) {
        const int y = 2016 + (4 + month) / 12;
        const int m = (4 + month) % 12 + 1;
        expiry_grid.push_back(Date::from_ymd(y, m, 18));
    }

    double prev_pos_p = 0.0, prev_pos_a = 0.0, prev_pos_m = 0.0;
    int emitted = 0;
    for (int day = -kWarmupDays - 1; emitted < config.n_days; date = date + 1) {
        if (!is_weekday(date)) {
            continue;
        }
        ++day;
        kappa.advance(rng_params.next_normal());
        theta.advance(rng_params.next_normal());
        xi.advance(rng_params.next_normal());
        rho.advance(rng_params.next_normal());
        v0.advance(rng_params.next_normal());
        log_forward += 0.008 * rng_forward.next_normal();
        pos_p = ar_pos * pos_p + pos_step * rng_positions.next_normal();
        pos_a = ar_pos * pos_a + pos_step * rng_positions.next_normal();
        opt_ar_p = 0.9 * opt_ar_p + 500.0 * rng_option_pos.next_normal();
        opt_ar_a = 0.9 * opt_ar_a + 500.0 * rng_option_pos.next_normal();
        const double micro[6] = {rng_micro.next_normal(), rng_micro.next_normal(),
                                 rng_micro.next_normal(), rng_micro.next_normal(),
                                 rng_micro.next_normal(), rng_micro.next_normal()};

        const double rounded_pos_p = std::round(pos_p);
        const double rounded_pos_a = std::round(pos_a);
        const double rounded_pos_m = -rounded_pos_p - rounded_pos_a;

        if (day < 0) {
            prev_pos_p = rounded_pos_p;
            prev_pos_a = rounded_pos_a;
            prev_pos_m = rounded_pos_m;
            continue; // warmup day only seeds the position changes
        }

        const heston::HestonParams params{kappa.value, theta.value, xi.value, rho.value,
                                          v0.value};
        const double forward = std::exp(log_forward);
        const double vstoxx_level = vstoxx::vstoxx_index(params);
        index.row({csv::Writer::format(date), csv::Writer::format(vstoxx_level)});

        // Option chain: every listed monthly expiry between 25 and 400 days out.
        for (const Date& expiry : expiry_grid) {
            const std::int64_t lag = expiry - date;
            if (lag < 25 || lag > 400) {
                continue;
            }
            const double tau = static_cast<double>(lag) / 365.0;
            const double atm_price = heston::heston_call(params, forward, forward, tau);
            const double atm_vol = black::implied_vol(atm_price, forward, forward, tau);
            std::vector<double> strikes;
            strikes.reserve(std::size(kMoneynessGrid));
            for (double m : kMoneynessGrid) {
                strikes.push_back(forward * std::exp(-m * atm_vol * std::sqrt(tau)));
            }
            const std::vector<double> vols = heston::model_smile(params, forward, strikes, tau);
            for (std::size_t j = 0; j < strikes.size(); ++j) {
                options.row({csv::Writer::format(date), csv::Writer::format(expiry),
                             csv::Writer::format(strikes[j]), csv::Writer::format(vols[j]),
                             csv::Writer::format(forward)});
            }
        }

        // Futures: front and back month (occasionally a third contract).
        std::vector<Date> live;
        for (const Date& expiry : expiry_grid) {
            const std::int64_t lag = expiry - date;
            if (lag >= 1 && lag <= 75) {
                live.push_back(expiry);
            }
        }
        Date front_expiry;
        bool have_front = false;
        for (const Date& expiry : live) {
            if (expiry - date >= 2 && (!have_front || expiry < front_expiry)) {
                front_expiry = expiry;
                have_front = true;
            }
        }
        const double front_model =
            have_front ? vstoxx::vstoxx_future(params, year_fraction(date, front_expiry))
                       : vstoxx_level;
        const double planted = config.inventory_effect_strength *
                               (std::tanh(rounded_pos_p / kPositionScale) -
                                std::tanh(rounded_pos_a / kPositionScale)) *
                               (front_model / 20.0);
        for (const Date& expiry : live) {
            const double model = expiry == front_expiry
                                     ? front_model
                                     : vstoxx::vstoxx_future(params, year_fraction(date, expiry));
            const double noise = config.noise_scale * rng_future_noise.next_normal();
            futures.row({csv::Writer::format(date), csv::Writer::format(expiry),
                         csv::Writer::format(model + planted + noise)});
        }

        const double chg_p = rounded_pos_p - prev_pos_p;
        const double chg_a = rounded_pos_a - prev_pos_a;
        const double chg_m = rounded_pos_m - prev_pos_m;
        prev_pos_p = rounded_pos_p;
        prev_pos_a = rounded_pos_a;
        prev_pos_m = rounded_pos_m;

        const double vol_a = std::abs(chg_a) + std::round(500.0 + 400.0 * std::abs(micro[0]));
        const double vol_p = std::abs(chg_p) + std::round(500.0 + 400.0 * std::abs(micro[1]));
        const double vol_m = std::abs(chg_m) + std::round(500.0 + 400.0 * std::abs(micro[2]));
        const double spread =
            0.02 + 0.004 * (front_model - 18.0) / 5.0 + 0.004 * std::abs(micro[3]);
        const double bid_sz = std::max(10.0, std::round(250.0 + 60.0 * micro[4]));
        const double ask_sz = std::max(10.0, std::round(250.0 + 60.0 * micro[5]));
        const double opt_pos_p = std::round(-900.0 * (vstoxx_level - 21.0) + opt_ar_p);
        const double opt_pos_a = std::round(700.0 * (vstoxx_level - 21.0) + opt_ar_a);
        const double opt_pos_m = -opt_pos_p - opt_pos_a;

        flows.row({csv::Writer::format(date), csv::Writer::format(rounded_pos_a),
                   csv::Writer::format(rounded_pos_p), csv::Writer::format(rounded_pos_m),
                   csv::Writer::format(chg_a), csv::Writer::format(chg_p),
                   csv::Writer::format(chg_m), csv::Writer::format(vol_a),
                   csv::Writer::format(vol_p), csv::Writer::format(vol_m),
                   csv::Writer::format(vol_a + vol_p + vol_m), csv::Writer::format(spread),
                   csv::Writer::format(bid_sz), csv::Writer::format(ask_sz),
                   csv::Writer::format(opt_pos_a), csv::Writer::format(opt_pos_p),
                   csv::Writer::format(opt_pos_m)});
        ++emitted;
    }
    return files;
}

} // namespace vollab::synthetic
