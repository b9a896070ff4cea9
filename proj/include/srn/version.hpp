#pragma once

namespace srn {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace srn
