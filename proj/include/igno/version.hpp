#pragma once

namespace igno {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kContainerVersion = 1;

const char* version();

}  // namespace igno
