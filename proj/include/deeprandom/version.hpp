#pragma once

namespace deeprandom {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace deeprandom
