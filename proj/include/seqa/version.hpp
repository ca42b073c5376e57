#pragma once

namespace seqa {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace seqa
