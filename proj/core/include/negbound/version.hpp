#pragma once

namespace negbound {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace negbound
