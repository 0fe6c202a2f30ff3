#pragma once

namespace hdp {

inline constexpr const char* kProjectName = "hdpbench";
inline constexpr const char* kVersion = "0.1.0";

} // namespace hdp
