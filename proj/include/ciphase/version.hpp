#pragma once

namespace ciphase {

inline constexpr const char* version_string = "0.1.0";

}  // namespace ciphase
