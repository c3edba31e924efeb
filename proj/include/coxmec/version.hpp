#pragma once

namespace coxmec {

inline constexpr const char* kVersion = "0.1.0";

} // namespace coxmec
