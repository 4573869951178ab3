#pragma once

namespace losref {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace losref
