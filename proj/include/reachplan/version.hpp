#pragma once

namespace reachplan {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace reachplan
