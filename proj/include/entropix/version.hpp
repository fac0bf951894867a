#pragma once

namespace entropix {

inline constexpr const char* kVersion = "0.1.0";

} // namespace entropix
