#pragma once

namespace meshstyle {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace meshstyle
