#pragma once

namespace incubation {

inline constexpr const char* version = "0.1.0";

} // namespace incubation
