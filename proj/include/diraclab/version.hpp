#pragma once

namespace diraclab {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace diraclab
