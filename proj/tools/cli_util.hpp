#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace fogfleet::cli {

// exit codes: 0 ok, 1 user error, 2 internal error
inline constexpr int exit_ok = 0;
inline constexpr int exit_user_error = 1;
inline constexpr int exit_internal_error = 2;

class user_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// "15h", "20m", "90s", "1500ms", or a bare number of seconds.
inline double parse_duration_s(const std::string& text) {
    if (text.empty()) throw user_error("empty duration");
    std::size_t pos = 0;
    double value;
    try {
        value = std::stod(text, &pos);
    } catch (const std::exception&) {
        throw user_error("invalid duration '" + text + "'");
    }
    std::string unit = text.substr(pos);
    if (unit.empty() || unit == "s") return value;
    if (unit == "ms") return value / 1000.0;
    if (unit == "m" || unit == "min") return value * 60.0;
    if (unit == "h") return value * 3600.0;
    if (unit == "d") return value * 86400.0;
    throw user_error("unknown duration unit '" + unit + "' in '" + text + "'");
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw user_error("cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw user_error("cannot write " + path);
    out << content;
}

}  // namespace fogfleet::cli
