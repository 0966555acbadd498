#pragma once

namespace heisenlab {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace heisenlab
