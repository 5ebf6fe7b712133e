#pragma once

#include <string_view>

namespace sparcs {

#ifndef SPARCS_VERSION
#define SPARCS_VERSION "0.0.0"
#endif

inline constexpr std::string_view kVersion = "sparcs " SPARCS_VERSION;

}  // namespace sparcs
