#pragma once

namespace corecut {

inline constexpr const char* kToolName = "corecut";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace corecut
