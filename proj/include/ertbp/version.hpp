#pragma once

namespace ertbp {

inline constexpr const char* version = "0.1.0";

}  // namespace ertbp
