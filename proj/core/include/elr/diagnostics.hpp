#pragma once

#include <string>
#include <vector>

namespace elr {

/// Non-fatal problems collected along a run (provider degradation, unknown
/// titles, shortfalls). Fatal problems are exceptions.
using Warnings = std::vector<std::string>;

}  // namespace elr
