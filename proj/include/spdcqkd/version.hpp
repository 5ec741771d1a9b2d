#pragma once

namespace spdcqkd {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace spdcqkd
