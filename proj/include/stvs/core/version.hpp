#pragma once

namespace stvs {

#ifdef STVS_VERSION
inline constexpr const char* kVersion = STVS_VERSION;
#else
inline constexpr const char* kVersion = "0.1.0+unknown";
#endif

}  // namespace stvs
