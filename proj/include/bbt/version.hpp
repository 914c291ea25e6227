#pragma once

namespace bbt {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kToolName = "bbt";

}  // namespace bbt
