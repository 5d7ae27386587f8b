#pragma once

namespace kpo {
inline constexpr const char* kVersion = "0.1.0";
}
