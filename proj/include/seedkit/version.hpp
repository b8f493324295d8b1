#pragma once

namespace seedkit {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace seedkit
