#pragma once

namespace codnopt {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace codnopt
