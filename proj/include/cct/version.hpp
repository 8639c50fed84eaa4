#pragma once

namespace cct {

inline constexpr const char* kLibraryVersion = "1.0.0";

}  // namespace cct
