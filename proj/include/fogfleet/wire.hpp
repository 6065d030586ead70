#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fogfleet/bytes.hpp"

namespace fogfleet::wire {

// Frame layout, big-endian, one frame per datagram:
//   magic "FGFT" (4) | version (1) | msg_type (1) | flags (2)
//   | connection_id (32) | request_id (16) | service_id (32)
//   | payload_len (4) | payload
inline constexpr std::uint8_t protocol_version = 1;
inline constexpr std::size_t header_bytes = 4 + 1 + 1 + 2 + 32 + 16 + 32 + 4;
inline constexpr std::size_t max_payload_bytes = 64 * 1024;
inline constexpr std::uint8_t magic[4] = {'F', 'G', 'F', 'T'};

enum class msg_type : std::uint8_t {
    request = 1,
    response = 2,
    heartbeat = 3,
    advertise = 4,
    lookup = 5,
    lookup_reply = 6,
    addr_reflect = 7,
    addr_reply = 8,
    disconnect_report = 9,
};

// flags bit 0: frame was relayed by a gateway
inline constexpr std::uint16_t flag_gateway_forwarded = 1u << 0;

struct envelope {
    msg_type type = msg_type::request;
    std::uint16_t flags = 0;
    connection_id connection{};
    request_id request{};
    service_id service{};
    std::vector<std::uint8_t> payload;

    bool operator==(const envelope&) const = default;
};

enum class wire_errc {
    bad_magic,
    bad_version,
    bad_msg_type,
    truncated_frame,
    length_mismatch,
    oversized_payload,
};

class wire_error : public std::runtime_error {
public:
    wire_error(wire_errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    wire_errc code() const { return code_; }

private:
    wire_errc code_;
};

std::vector<std::uint8_t> encode(const envelope& e);
envelope decode(std::span<const std::uint8_t> frame);

// Immutable encoded frame shared across replica transmissions. Copying the
// handle shares the bytes; deep copies are counted so tests can assert the
// zero-copy contract.
class frame_buffer {
public:
    frame_buffer() = default;
    explicit frame_buffer(std::vector<std::uint8_t> bytes);

    static frame_buffer encode_envelope(const envelope& e) { return frame_buffer(encode(e)); }

    std::span<const std::uint8_t> bytes() const;
    std::size_t size() const { return data_ ? data_->size() : 0; }
    const std::uint8_t* data_ptr() const { return data_ ? data_->data() : nullptr; }
    bool valid() const { return static_cast<bool>(data_); }

    // Explicit deep copy; the only way the payload bytes are ever duplicated.
    frame_buffer deep_copy() const;

    static std::uint64_t deep_copy_count();
    static void reset_deep_copy_count();

private:
    std::shared_ptr<const std::vector<std::uint8_t>> data_;
};

std::string to_string(msg_type t);

}  // namespace fogfleet::wire
