#pragma once

namespace soficlab {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace soficlab
