#pragma once

namespace sepctl {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace sepctl
