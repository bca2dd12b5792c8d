#pragma once

namespace denitsim {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace denitsim
