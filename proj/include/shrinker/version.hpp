#pragma once

namespace shrinker {

inline constexpr const char* kVersion = "0.1.0";

} // namespace shrinker
