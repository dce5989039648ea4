#pragma once

namespace udw {

inline constexpr const char* k_version = "udw 0.1.0";

}  // namespace udw
