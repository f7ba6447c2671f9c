#pragma once

namespace deap {

inline constexpr const char* kProjectName = "deap-sim";
inline constexpr const char* kProjectVersion = "1.0.0";

}  // namespace deap
