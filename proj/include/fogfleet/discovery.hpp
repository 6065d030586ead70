#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "fogfleet/bytes.hpp"
#include "fogfleet/endpoint.hpp"
#include "fogfleet/wire.hpp"

namespace fogfleet::discovery {

struct directory_entry {
    service_id service{};
    peer_guid peer{};
    std::vector<endpoint> addresses;
    double last_heartbeat_ms = 0;
};

// Control-plane registry of service -> address bindings. Holds no
// application payloads; losing it never interrupts established traffic.
// Single-writer by contract: the owning service thread applies commands in
// order, lookups take a snapshot.
class directory {
public:
    explicit directory(double heartbeat_interval_ms = 1000.0, double ttl_intervals = 3.0)
        : ttl_ms_(heartbeat_interval_ms * ttl_intervals) {}

    void advertise(const directory_entry& entry);

    // Heartbeat refresh for an existing binding; unknown bindings are ignored
    // (the peer is expected to re-advertise).
    void heartbeat(const service_id& service, const peer_guid& peer, double now_ms);

    // All non-stale entries for the service; unknown service -> empty.
    std::vector<directory_entry> lookup(const service_id& service, double now_ms) const;

    // Purges the dead peer's bindings for the service. The reporter proves it
    // is a party to the connection by presenting ids that hash to the
    // connection id; anything else is ignored.
    void report_disconnect(const connection_id& conn, const peer_guid& reporter,
                           const peer_guid& dead_peer, const service_id& service);

    void evict_stale(double now_ms);
    std::size_t size() const;
    double ttl_ms() const { return ttl_ms_; }

private:
    using key = std::pair<service_id, peer_guid>;

    mutable std::mutex mu_;
    std::map<key, directory_entry> entries_;
    double ttl_ms_;
};

// STUN-style reflection: the reply payload is the observed transport source
// address, ASCII "host:port".
wire::envelope make_addr_reflect(const peer_guid& self);
wire::envelope reflect(const wire::envelope& request, const endpoint& observed_source);
endpoint parse_addr_reply(const wire::envelope& reply);

// Control payload builders (JSON bodies inside the binary envelope).
wire::envelope make_advertise(const directory_entry& entry);
wire::envelope make_heartbeat(const service_id& service, const peer_guid& peer);
wire::envelope make_lookup(const service_id& service);
wire::envelope make_lookup_reply(const service_id& service, const std::vector<directory_entry>& entries);
std::vector<directory_entry> parse_lookup_reply(const wire::envelope& reply);
wire::envelope make_disconnect_report(const peer_guid& reporter, const peer_guid& dead_peer,
                                      const service_id& service);

// Frame-level handler for the co-deployed metadata/reflector service: feeds
// ADVERTISE/HEARTBEAT/LOOKUP/ADDR_REFLECT/DISCONNECT_REPORT frames into the
// directory and produces the reply frame, if any.
class directory_service {
public:
    explicit directory_service(directory& dir) : dir_(&dir) {}

    std::optional<wire::envelope> handle(const wire::envelope& frame, const endpoint& source,
                                         double now_ms);

private:
    directory* dir_;
};

}  // namespace fogfleet::discovery
