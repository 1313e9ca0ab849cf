#pragma once

namespace plume {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace plume
