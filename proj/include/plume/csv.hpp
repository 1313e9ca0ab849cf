#pragma once

#include <charconv>
#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>

namespace plume::csv {

/// Shortest decimal form that round-trips to the same double. All simulator
/// output goes through this so reruns compare byte-for-byte.
inline std::string fmt(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string fmt(int v) { return std::to_string(v); }
inline std::string fmt(long v) { return std::to_string(v); }
inline std::string fmt(std::uint64_t v) { return std::to_string(v); }

/// Append one CSV row from preformatted fields.
inline void row(std::ostream& os, std::initializer_list<std::string_view> fields) {
    bool first = true;
    for (const auto& f : fields) {
        if (!first) os << ',';
        os << f;
        first = false;
    }
    os << '\n';
}

}  // namespace plume::csv
