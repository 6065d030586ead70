#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "fogfleet/bytes.hpp"
#include "fogfleet/endpoint.hpp"
#include "fogfleet/hash.hpp"
#include "fogfleet/latency_distribution.hpp"
#include "fogfleet/registry.hpp"
#include "fogfleet/wire.hpp"

namespace fogfleet::proxy {

// Where encoded frames go: UDP sockets in real mode, scheduled message
// events in simulation, a recording stub in tests.
class transport {
public:
    virtual ~transport() = default;
    virtual void send(const endpoint& dest, const wire::frame_buffer& frame) = 0;
};

struct submit_result {
    request_id id;
    wire::frame_buffer frame;   // the single shared encoded frame
    std::size_t transmissions = 0;
};

// Robot-side request fan-out. One envelope is built and encoded once; the
// same immutable frame is handed to the transport for every endpoint.
class replicator {
public:
    replicator(peer_guid self, transport& out, pending_registry& registry)
        : self_(self), out_(&out), registry_(&registry) {}

    submit_result submit(const service_id& service, std::vector<std::uint8_t> payload,
                         std::span<const endpoint> endpoints, double deadline_ms,
                         pending_registry::response_sink on_response,
                         pending_registry::timeout_sink on_timeout);

    const peer_guid& self() const { return self_; }
    std::uint64_t sequence() const { return sequence_; }

private:
    peer_guid self_;
    transport* out_;
    pending_registry* registry_;
    std::uint64_t sequence_ = 0;
};

using payload_service = std::function<std::vector<std::uint8_t>(std::span<const std::uint8_t>)>;

struct serve_result {
    // Empty on service failure: no NACK is sent, the replication layer and
    // the client's timeout are the recovery mechanism.
    std::optional<wire::envelope> response;
    double compute_delay_ms = 0;  // sampled from the compute model, 0 if none
};

// Server-side invocation: runs the service on the request payload and builds
// the RESPONSE with identical connection/request/service ids. uniform_draw
// feeds the compute model's inverse CDF when a synthetic delay is configured.
serve_result serve(const wire::envelope& request, const payload_service& service,
                   const std::optional<latency_distribution>& compute_model = {},
                   double uniform_draw = 0.0);

}  // namespace fogfleet::proxy
