#include "fogfleet/discovery.hpp"

#include <nlohmann/json.hpp>

#include "fogfleet/hash.hpp"

namespace fogfleet::discovery {

using nlohmann::json;

namespace {

std::vector<std::uint8_t> to_bytes(const std::string& s) {
    return std::vector<std::uint8_t>(s.begin(), s.end());
}

std::string to_text(const std::vector<std::uint8_t>& payload) {
    return std::string(payload.begin(), payload.end());
}

}  // namespace

void directory::advertise(const directory_entry& entry) {
    std::lock_guard lock(mu_);
    entries_[key{entry.service, entry.peer}] = entry;
}

void directory::heartbeat(const service_id& service, const peer_guid& peer, double now_ms) {
    std::lock_guard lock(mu_);
    auto it = entries_.find(key{service, peer});
    if (it != entries_.end()) it->second.last_heartbeat_ms = now_ms;
}

std::vector<directory_entry> directory::lookup(const service_id& service, double now_ms) const {
    std::lock_guard lock(mu_);
    std::vector<directory_entry> out;
    for (const auto& [k, e] : entries_) {
        if (k.first != service) continue;
        if (now_ms - e.last_heartbeat_ms > ttl_ms_) continue;
        out.push_back(e);
    }
    return out;
}

void directory::report_disconnect(const connection_id& conn, const peer_guid& reporter,
                                  const peer_guid& dead_peer, const service_id& service) {
    if (make_connection_id(reporter, dead_peer, service) != conn) return;  // not a party, ignore
    std::lock_guard lock(mu_);
    entries_.erase(key{service, dead_peer});
}

void directory::evict_stale(double now_ms) {
    std::lock_guard lock(mu_);
    for (auto it = entries_.begin(); it != entries_.end();) {
        if (now_ms - it->second.last_heartbeat_ms > ttl_ms_)
            it = entries_.erase(it);
        else
            ++it;
    }
}

std::size_t directory::size() const {
    std::lock_guard lock(mu_);
    return entries_.size();
}

wire::envelope make_addr_reflect(const peer_guid& self) {
    wire::envelope e;
    e.type = wire::msg_type::addr_reflect;
    std::copy(self.bytes.begin(), self.bytes.end(), e.connection.bytes.begin());
    return e;
}

wire::envelope reflect(const wire::envelope& request, const endpoint& observed_source) {
    wire::envelope reply;
    reply.type = wire::msg_type::addr_reply;
    reply.connection = request.connection;
    reply.request = request.request;
    reply.service = request.service;
    reply.payload = to_bytes(observed_source.str());
    return reply;
}

endpoint parse_addr_reply(const wire::envelope& reply) {
    return endpoint::parse(to_text(reply.payload));
}

wire::envelope make_advertise(const directory_entry& entry) {
    json body;
    body["peer"] = entry.peer.hex();
    json addrs = json::array();
    for (const auto& a : entry.addresses) addrs.push_back(a.str());
    body["addresses"] = addrs;
    wire::envelope e;
    e.type = wire::msg_type::advertise;
    e.service = entry.service;
    e.payload = to_bytes(body.dump());
    return e;
}

wire::envelope make_heartbeat(const service_id& service, const peer_guid& peer) {
    json body;
    body["peer"] = peer.hex();
    wire::envelope e;
    e.type = wire::msg_type::heartbeat;
    e.service = service;
    e.payload = to_bytes(body.dump());
    return e;
}

wire::envelope make_lookup(const service_id& service) {
    wire::envelope e;
    e.type = wire::msg_type::lookup;
    e.service = service;
    return e;
}

wire::envelope make_lookup_reply(const service_id& service, const std::vector<directory_entry>& entries) {
    json body;
    json list = json::array();
    for (const auto& entry : entries) {
        json item;
        item["peer"] = entry.peer.hex();
        json addrs = json::array();
        for (const auto& a : entry.addresses) addrs.push_back(a.str());
        item["addresses"] = addrs;
        list.push_back(item);
    }
    body["entries"] = list;
    wire::envelope e;
    e.type = wire::msg_type::lookup_reply;
    e.service = service;
    e.payload = to_bytes(body.dump());
    return e;
}

std::vector<directory_entry> parse_lookup_reply(const wire::envelope& reply) {
    auto body = json::parse(to_text(reply.payload));
    std::vector<directory_entry> out;
    for (const auto& item : body.at("entries")) {
        directory_entry e;
        e.service = reply.service;
        e.peer = peer_guid::from_hex(item.at("peer").get<std::string>());
        for (const auto& a : item.at("addresses")) e.addresses.push_back(endpoint::parse(a.get<std::string>()));
        out.push_back(std::move(e));
    }
    return out;
}

wire::envelope make_disconnect_report(const peer_guid& reporter, const peer_guid& dead_peer,
                                      const service_id& service) {
    json body;
    body["reporter"] = reporter.hex();
    body["dead_peer"] = dead_peer.hex();
    wire::envelope e;
    e.type = wire::msg_type::disconnect_report;
    e.connection = make_connection_id(reporter, dead_peer, service);
    e.service = service;
    e.payload = to_bytes(body.dump());
    return e;
}

std::optional<wire::envelope> directory_service::handle(const wire::envelope& frame,
                                                        const endpoint& source, double now_ms) {
    switch (frame.type) {
        case wire::msg_type::addr_reflect:
            return reflect(frame, source);
        case wire::msg_type::advertise: {
            auto body = json::parse(to_text(frame.payload));
            directory_entry e;
            e.service = frame.service;
            e.peer = peer_guid::from_hex(body.at("peer").get<std::string>());
            for (const auto& a : body.at("addresses"))
                e.addresses.push_back(endpoint::parse(a.get<std::string>()));
            e.last_heartbeat_ms = now_ms;
            dir_->advertise(e);
            return std::nullopt;
        }
        case wire::msg_type::heartbeat: {
            auto body = json::parse(to_text(frame.payload));
            dir_->heartbeat(frame.service, peer_guid::from_hex(body.at("peer").get<std::string>()),
                            now_ms);
            return std::nullopt;
        }
        case wire::msg_type::lookup:
            return make_lookup_reply(frame.service, dir_->lookup(frame.service, now_ms));
        case wire::msg_type::disconnect_report: {
            auto body = json::parse(to_text(frame.payload));
            dir_->report_disconnect(frame.connection,
                                    peer_guid::from_hex(body.at("reporter").get<std::string>()),
                                    peer_guid::from_hex(body.at("dead_peer").get<std::string>()),
                                    frame.service);
            // Ack by echoing the report type with an empty payload.
            wire::envelope ack;
            ack.type = wire::msg_type::disconnect_report;
            ack.connection = frame.connection;
            ack.request = frame.request;
            ack.service = frame.service;
            return ack;
        }
        default:
            return std::nullopt;  // data-plane frames never touch the directory
    }
}

}  // namespace fogfleet::discovery
