#pragma once

namespace hnequiv {

inline constexpr const char* kVersion = "1.0.0";

} // namespace hnequiv
