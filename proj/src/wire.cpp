#include "fogfleet/wire.hpp"

#include <atomic>
#include <cstring>

namespace fogfleet::wire {

namespace {

std::atomic<std::uint64_t> g_deep_copies{0};

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
}

std::uint16_t get_u16(const std::uint8_t* p) {
    return static_cast<std::uint16_t>(p[0] << 8 | p[1]);
}

std::uint32_t get_u32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) << 24 | static_cast<std::uint32_t>(p[1]) << 16 |
           static_cast<std::uint32_t>(p[2]) << 8 | static_cast<std::uint32_t>(p[3]);
}

bool valid_msg_type(std::uint8_t t) {
    return t >= static_cast<std::uint8_t>(msg_type::request) &&
           t <= static_cast<std::uint8_t>(msg_type::disconnect_report);
}

}  // namespace

std::vector<std::uint8_t> encode(const envelope& e) {
    if (e.payload.size() > max_payload_bytes)
        throw wire_error(wire_errc::oversized_payload,
                         "encode: payload exceeds 64 KiB cap (" + std::to_string(e.payload.size()) + ")");
    if (!valid_msg_type(static_cast<std::uint8_t>(e.type)))
        throw wire_error(wire_errc::bad_msg_type, "encode: unknown msg_type");
    std::vector<std::uint8_t> out;
    out.reserve(header_bytes + e.payload.size());
    out.insert(out.end(), magic, magic + 4);
    out.push_back(protocol_version);
    out.push_back(static_cast<std::uint8_t>(e.type));
    put_u16(out, e.flags);
    out.insert(out.end(), e.connection.bytes.begin(), e.connection.bytes.end());
    out.insert(out.end(), e.request.bytes.begin(), e.request.bytes.end());
    out.insert(out.end(), e.service.bytes.begin(), e.service.bytes.end());
    put_u32(out, static_cast<std::uint32_t>(e.payload.size()));
    out.insert(out.end(), e.payload.begin(), e.payload.end());
    return out;
}

envelope decode(std::span<const std::uint8_t> frame) {
    if (frame.size() < header_bytes)
        throw wire_error(wire_errc::truncated_frame,
                         "decode: frame shorter than header (" + std::to_string(frame.size()) + " bytes)");
    if (std::memcmp(frame.data(), magic, 4) != 0)
        throw wire_error(wire_errc::bad_magic, "decode: bad magic");
    if (frame[4] != protocol_version)
        throw wire_error(wire_errc::bad_version,
                         "decode: unsupported version " + std::to_string(frame[4]));
    if (!valid_msg_type(frame[5]))
        throw wire_error(wire_errc::bad_msg_type,
                         "decode: unknown msg_type " + std::to_string(frame[5]));

    envelope e;
    e.type = static_cast<msg_type>(frame[5]);
    e.flags = get_u16(frame.data() + 6);
    std::memcpy(e.connection.bytes.data(), frame.data() + 8, 32);
    std::memcpy(e.request.bytes.data(), frame.data() + 40, 16);
    std::memcpy(e.service.bytes.data(), frame.data() + 56, 32);
    std::uint32_t len = get_u32(frame.data() + 88);
    if (len > max_payload_bytes)
        throw wire_error(wire_errc::oversized_payload,
                         "decode: claimed payload exceeds 64 KiB cap");
    std::size_t actual = frame.size() - header_bytes;
    if (actual < len)
        throw wire_error(wire_errc::truncated_frame, "decode: payload truncated");
    if (actual > len)
        throw wire_error(wire_errc::length_mismatch,
                         "decode: payload_len does not match frame size");
    e.payload.assign(frame.begin() + header_bytes, frame.end());
    return e;
}

frame_buffer::frame_buffer(std::vector<std::uint8_t> bytes)
    : data_(std::make_shared<const std::vector<std::uint8_t>>(std::move(bytes))) {}

std::span<const std::uint8_t> frame_buffer::bytes() const {
    if (!data_) return {};
    return std::span<const std::uint8_t>(data_->data(), data_->size());
}

frame_buffer frame_buffer::deep_copy() const {
    g_deep_copies.fetch_add(1, std::memory_order_relaxed);
    return data_ ? frame_buffer(std::vector<std::uint8_t>(*data_)) : frame_buffer();
}

std::uint64_t frame_buffer::deep_copy_count() { return g_deep_copies.load(std::memory_order_relaxed); }
void frame_buffer::reset_deep_copy_count() { g_deep_copies.store(0, std::memory_order_relaxed); }

std::string to_string(msg_type t) {
    switch (t) {
        case msg_type::request: return "REQUEST";
        case msg_type::response: return "RESPONSE";
        case msg_type::heartbeat: return "HEARTBEAT";
        case msg_type::advertise: return "ADVERTISE";
        case msg_type::lookup: return "LOOKUP";
        case msg_type::lookup_reply: return "LOOKUP_REPLY";
        case msg_type::addr_reflect: return "ADDR_REFLECT";
        case msg_type::addr_reply: return "ADDR_REPLY";
        case msg_type::disconnect_report: return "DISCONNECT_REPORT";
    }
    return "UNKNOWN";
}

}  // namespace fogfleet::wire
