#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace fogfleet {

struct endpoint {
    std::string host;
    std::uint16_t port = 0;

    auto operator<=>(const endpoint&) const = default;

    std::string str() const { return host + ":" + std::to_string(port); }

    static endpoint parse(const std::string& s) {
        auto pos = s.rfind(':');
        if (pos == std::string::npos || pos + 1 >= s.size())
            throw std::invalid_argument("endpoint: expected host:port, got '" + s + "'");
        int p = std::stoi(s.substr(pos + 1));
        if (p < 0 || p > 65535) throw std::invalid_argument("endpoint: port out of range in '" + s + "'");
        return endpoint{s.substr(0, pos), static_cast<std::uint16_t>(p)};
    }
};

}  // namespace fogfleet
