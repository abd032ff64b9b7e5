#pragma once

#include <cstdint>
#include <string>

namespace vollab::synthetic {

// Synthetic market bundle with a planted inventory effect. The futures
// market price is
//   model price + effect * (tanh(pos_p/P0) - tanh(pos_a/P0)) * (level/20) + noise,
// so the proprietary account pushes the price above the model when long and
// the agency account when short, scaled by the price level. Option smiles and
// the index are exact model outputs of a slowly drifting parameter path.
struct GeneratorConfig {
    int n_days = 500;
    std::uint64_t seed = 0;
    double inventory_effect_strength = 1.0; // index points at full tanh swing
    double noise_scale = 0.05;              // iid gaussian, index points
    std::string out_dir;
};

// Position scale of the tanh saturation, contracts.
inline constexpr double kPositionScale = 4000.0;

struct GeneratedFiles {
    std::string options;
    std::string index;
    std::string futures;
    std::string flows;
};

// Writes options.csv, index.csv, futures.csv, flows.csv into out_dir.
// Byte-identical output for identical config.
GeneratedFiles generate_synthetic(const GeneratorConfig& config);

} // namespace vollab::synthetic
