#pragma once

namespace colonmap {

inline constexpr const char *kVersion = "0.1.0";

} // namespace colonmap
