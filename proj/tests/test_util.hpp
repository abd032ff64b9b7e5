#pragma once

#include "vollab/heston.hpp"
#include "vollab/math/rng.hpp"

#include <filesystem>
#include <unistd.h>
#include <string>

namespace testutil {

// Uniform draw from the calibration box.
inline vollab::heston::HestonParams random_box_params(vollab::rng::Xoshiro256& gen) {
    using namespace vollab::heston;
    const auto draw = [&](ParamBounds b) { return b.lo + gen.next_uniform() * (b.hi - b.lo); };
    return {draw(kKappaBounds), draw(kThetaBounds), draw(kXiBounds), draw(kRhoBounds),
            draw(kV0Bounds)};
}

// Unique scratch directory under the system temp root, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        root_ = std::filesystem::temp_directory_path() /
                ("vollab_test_" + tag + "_" + std::to_string(::getpid()));
        std::filesystem::remove_all(root_);
        std::filesystem::create_directories(root_);
    }
    ~TempDir() { std::filesystem::remove_all(root_); }
    std::string path(const std::string& name = "") const {
        return name.empty() ? root_.string() : (root_ / name).string();
    }

private:
    std::filesystem::path root_;
};

} // namespace testutil
