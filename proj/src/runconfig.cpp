#include "vollab/runconfig.hpp"
#include "vollab/errors.hpp"
#include "vollab/version.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace vollab {

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) {
            throw std::invalid_argument(v);
        }
        return x;
    } catch (const std::exception&) {
        throw ValidationError("config: bad numeric value for " + key + ": '" + v + "'");
    }
}

long long parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const long long x = std::stoll(v, &used);
        if (used != v.size()) {
            throw std::invalid_argument(v);
        }
        return x;
    } catch (const std::exception&) {
        throw ValidationError("config: bad integer value for " + key + ": '" + v + "'");
    }
}

} // namespace

std::string RunConfig::serialize() const {
    std::ostringstream out;
    out << "calib_file=" << calib_file << '\n';
    out << "cv_folds=" << cv_folds << '\n';
    out << "data_dir=" << data_dir << '\n';
    out << "forest_trees=" << forest_trees << '\n';
    out << "future_grid_nodes=" << future_grid_nodes << '\n';
    out << "gen_days=" << gen_days << '\n';
    out << "gen_effect=" << fmt_double(gen_effect) << '\n';
    out << "gen_noise=" << fmt_double(gen_noise) << '\n';
    out << "importance_repeats=" << importance_repeats << '\n';
    out << "lasso_alphas=" << lasso_alphas << '\n';
    out << "mc_paths=" << mc_paths << '\n';
    out << "mc_steps=" << mc_steps << '\n';
    out << "out_dir=" << out_dir << '\n';
    out << "seed=" << seed << '\n';
    out << "test_fraction=" << fmt_double(test_fraction) << '\n';
    out << "threads=" << threads << '\n';
    out << "w_idx=" << fmt_double(w_idx) << '\n';
    out << "w_sigma=" << fmt_double(w_sigma) << '\n';
    return out.str();
}

RunConfig RunConfig::parse(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty() || line[0] == '#') {
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ValidationError("config line " + std::to_string(line_no) +
                                  ": expected key=value, got '" + line + "'");
        }
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (key == "calib_file") {
            cfg.calib_file = value;
        } else if (key == "cv_folds") {
            cfg.cv_folds = static_cast<int>(parse_int(key, value));
        } else if (key == "data_dir") {
            cfg.data_dir = value;
        } else if (key == "forest_trees") {
            cfg.forest_trees = static_cast<int>(parse_int(key, value));
        } else if (key == "future_grid_nodes") {
            cfg.future_grid_nodes = static_cast<int>(parse_int(key, value));
        } else if (key == "gen_days") {
            cfg.gen_days = static_cast<int>(parse_int(key, value));
        } else if (key == "gen_effect") {
            cfg.gen_effect = parse_double(key, value);
        } else if (key == "gen_noise") {
            cfg.gen_noise = parse_double(key, value);
        } else if (key == "importance_repeats") {
            cfg.importance_repeats = static_cast<int>(parse_int(key, value));
        } else if (key == "lasso_alphas") {
            cfg.lasso_alphas = static_cast<int>(parse_int(key, value));
        } else if (key == "mc_paths") {
            cfg.mc_paths = parse_int(key, value);
        } else if (key == "mc_steps") {
            cfg.mc_steps = static_cast<int>(parse_int(key, value));
        } else if (key == "out_dir") {
            cfg.out_dir = value;
        } else if (key == "seed") {
            cfg.seed = static_cast<std::uint64_t>(parse_int(key, value));
        } else if (key == "test_fraction") {
            cfg.test_fraction = parse_double(key, value);
        } else if (key == "threads") {
            cfg.threads = static_cast<int>(parse_int(key, value));
        } else if (key == "w_idx") {
            cfg.w_idx = parse_double(key, value);
        } else if (key == "w_sigma") {
            cfg.w_sigma = parse_double(key, value);
        } else {
            throw ValidationError("config: unknown key '" + key + "'");
        }
    }
    return cfg;
}

RunConfig RunConfig::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open config file: " + path);
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str());
}

std::string RunConfig::resolved_calib_file() const {
    return calib_file.empty() ? out_dir + "/calibration.csv" : calib_file;
}

std::uint64_t RunConfig::hash() const {
    const std::string text = serialize();
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::string RunConfig::provenance(const std::string& command) const {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "vollab %s %s seed=%" PRIu64 " config=%016" PRIx64, kVersion,
                  command.c_str(), seed, hash());
    return buf;
}

} // namespace vollab
