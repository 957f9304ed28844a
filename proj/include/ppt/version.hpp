#pragma once

namespace ppt {

inline constexpr const char* kToolName = "pptsim";
inline constexpr const char* kVersion = "0.1.0";

}  // namespace ppt
