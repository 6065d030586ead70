#include "fogfleet/hash.hpp"

#include <openssl/sha.h>

#include <cstring>
#include <vector>

namespace fogfleet {

std::array<std::uint8_t, 32> sha256(std::span<const std::uint8_t> data) {
    std::array<std::uint8_t, 32> out;
    SHA256(data.data(), data.size(), out.data());
    return out;
}

request_id new_request_id(const peer_guid& client, std::uint64_t sequence) {
    std::array<std::uint8_t, 40> buf;
    std::memcpy(buf.data(), client.bytes.data(), 32);
    for (int i = 0; i < 8; ++i)
        buf[32 + i] = static_cast<std::uint8_t>(sequence >> (8 * (7 - i)));
    auto digest = sha256(buf);
    request_id id;
    std::memcpy(id.bytes.data(), digest.data(), 16);
    return id;
}

connection_id make_connection_id(const peer_guid& a, const peer_guid& b, const service_id& service) {
    const peer_guid& lo = (a <= b) ? a : b;
    const peer_guid& hi = (a <= b) ? b : a;
    std::array<std::uint8_t, 96> buf;
    std::memcpy(buf.data(), lo.bytes.data(), 32);
    std::memcpy(buf.data() + 32, hi.bytes.data(), 32);
    std::memcpy(buf.data() + 64, service.bytes.data(), 32);
    connection_id id;
    id.bytes = sha256(buf);
    return id;
}

connection_id group_connection_id(const peer_guid& robot, const service_id& service) {
    return make_connection_id(robot, robot, service);
}

template <std::size_t N>
byte_id<N> byte_id<N>::from_label(std::string_view label) {
    auto digest = sha256(std::span<const std::uint8_t>(
        reinterpret_cast<const std::uint8_t*>(label.data()), label.size()));
    byte_id<N> out;
    std::memcpy(out.bytes.data(), digest.data(), N);
    return out;
}

template struct byte_id<16>;
template struct byte_id<32>;

}  // namespace fogfleet
