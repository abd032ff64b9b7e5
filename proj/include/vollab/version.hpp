#pragma once

namespace vollab {

inline constexpr const char* kVersion = "0.1.0";

} // namespace vollab
