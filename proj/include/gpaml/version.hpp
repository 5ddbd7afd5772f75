#pragma once

namespace gpaml {

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace gpaml
