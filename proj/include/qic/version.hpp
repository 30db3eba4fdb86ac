#pragma once

namespace qic {

inline constexpr const char* version() { return "1.0.0"; }

} // namespace qic
