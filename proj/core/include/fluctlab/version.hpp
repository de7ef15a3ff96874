#pragma once

namespace fluctlab {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace fluctlab
