#pragma once

namespace vast {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace vast
