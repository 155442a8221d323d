#pragma once

namespace toeplab {

inline constexpr char const* version = "0.3.0";

}  // namespace toeplab
