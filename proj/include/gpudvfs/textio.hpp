#ifndef GPUDVFS_TEXTIO_HPP
#define GPUDVFS_TEXTIO_HPP

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace gpudvfs {

/// %.9g — the canonical CSV number format (9 significant digits).
inline std::string format_g9(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

/// %.17g — lossless double round-trip for model and sidecar files.
inline std::string format_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// Locale-independent full-string double parse; nullopt on any leftover text.
inline std::optional<double> parse_strict_double(const std::string& s) {
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) return std::nullopt;
    return v;
}

/// Consume leading '#' metadata-comment lines (config hash / seed stamps).
inline void skip_comment_lines(std::istream& in) {
    while (in.peek() == '#') {
        std::string line;
        std::getline(in, line);
    }
}

inline std::vector<std::string> split_on_comma(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace gpudvfs

#endif
