#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string>

namespace fogfleet {

// Fixed-width opaque identifier. Comparable, hashable, hex-printable.
template <std::size_t N>
struct byte_id {
    std::array<std::uint8_t, N> bytes{};

    static constexpr std::size_t size = N;

    auto operator<=>(const byte_id&) const = default;

    bool is_zero() const {
        for (auto b : bytes)
            if (b != 0) return false;
        return true;
    }

    std::string hex() const {
        static constexpr char digits[] = "0123456789abcdef";
        std::string out;
        out.reserve(2 * N);
        for (auto b : bytes) {
            out.push_back(digits[b >> 4]);
            out.push_back(digits[b & 0xf]);
        }
        return out;
    }

    static byte_id from_hex(const std::string& s) {
        if (s.size() != 2 * N)
            throw std::invalid_argument("byte_id: hex string must be " + std::to_string(2 * N) +
                                        " chars, got " + std::to_string(s.size()));
        auto nibble = [](char c) -> std::uint8_t {
            if (c >= '0' && c <= '9') return static_cast<std::uint8_t>(c - '0');
            if (c >= 'a' && c <= 'f') return static_cast<std::uint8_t>(c - 'a' + 10);
            if (c >= 'A' && c <= 'F') return static_cast<std::uint8_t>(c - 'A' + 10);
            throw std::invalid_argument("byte_id: invalid hex character");
        };
        byte_id out;
        for (std::size_t i = 0; i < N; ++i)
            out.bytes[i] = static_cast<std::uint8_t>(nibble(s[2 * i]) << 4 | nibble(s[2 * i + 1]));
        return out;
    }

    // Label-derived id: hashes an arbitrary-length name into the fixed width.
    // Defined in ids.cpp (needs the hash).
    static byte_id from_label(std::string_view label);
};

using request_id = byte_id<16>;
using peer_guid = byte_id<32>;
using service_id = byte_id<32>;
using connection_id = byte_id<32>;

template <std::size_t N>
struct byte_id_hash {
    std::size_t operator()(const byte_id<N>& id) const {
        // ids are already uniform (hash outputs); fold the first 8 bytes.
        std::uint64_t v;
        std::memcpy(&v, id.bytes.data(), sizeof v);
        return static_cast<std::size_t>(v);
    }
};

}  // namespace fogfleet
