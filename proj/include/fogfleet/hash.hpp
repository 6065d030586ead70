#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "fogfleet/bytes.hpp"

namespace fogfleet {

// SHA-256 over a byte span (OpenSSL-backed).
std::array<std::uint8_t, 32> sha256(std::span<const std::uint8_t> data);

// Deterministic per-request identifier: first 16 bytes of
// SHA-256(client_guid || sequence as 8-byte big-endian).
request_id new_request_id(const peer_guid& client, std::uint64_t sequence);

// Identifier for a logical peer-to-peer connection. Symmetric in the peer
// order and stable across relaunch of either peer.
connection_id make_connection_id(const peer_guid& a, const peer_guid& b, const service_id& service);

// Session id carried by replicated request frames: all replicas of one
// robot/service pair share it, so a single encoded frame fans out unchanged.
connection_id group_connection_id(const peer_guid& robot, const service_id& service);

}  // namespace fogfleet
