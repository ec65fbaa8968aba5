#pragma once

namespace sgbp {
inline constexpr const char* kVersion = "0.1.0";
}
