#pragma once

namespace erlab {

inline constexpr const char* kToolName = "erlab";
inline constexpr const char* kToolVersion = "0.1.0";

// Schema version for serialized policy parameter dumps. Bump when the
// feature layout changes.
inline constexpr const char* kParamsLayoutVersion = "erlab-policy-layout-v1";

} // namespace erlab
