#pragma once

#include <string_view>

namespace elr {

inline constexpr std::string_view kVersion = "0.1.0";

}  // namespace elr
