#include "fogfleet/proxy.hpp"

#include <stdexcept>

namespace fogfleet::proxy {

submit_result replicator::submit(const service_id& service, std::vector<std::uint8_t> payload,
                                 std::span<const endpoint> endpoints, double deadline_ms,
                                 pending_registry::response_sink on_response,
                                 pending_registry::timeout_sink on_timeout) {
    if (endpoints.empty()) throw std::invalid_argument("submit: no endpoints");

    wire::envelope e;
    e.type = wire::msg_type::request;
    e.connection = group_connection_id(self_, service);
    e.request = new_request_id(self_, sequence_++);
    e.service = service;
    e.payload = std::move(payload);

    std::vector<std::string> sent_to;
    sent_to.reserve(endpoints.size());
    for (const auto& ep : endpoints) sent_to.push_back(ep.str());
    registry_->register_request(e.request, deadline_ms, std::move(sent_to), std::move(on_response),
                                std::move(on_timeout));

    auto frame = wire::frame_buffer::encode_envelope(e);
    for (const auto& ep : endpoints) out_->send(ep, frame);

    return submit_result{e.request, frame, endpoints.size()};
}

serve_result serve(const wire::envelope& request, const payload_service& service,
                   const std::optional<latency_distribution>& compute_model, double uniform_draw) {
    if (request.type != wire::msg_type::request)
        throw std::invalid_argument("serve: envelope is not a REQUEST");

    serve_result result;
    if (compute_model) result.compute_delay_ms = compute_model->sample(uniform_draw);

    try {
        auto out = service(std::span<const std::uint8_t>(request.payload.data(), request.payload.size()));
        wire::envelope resp;
        resp.type = wire::msg_type::response;
        resp.flags = 0;
        resp.connection = request.connection;
        resp.request = request.request;
        resp.service = request.service;
        resp.payload = std::move(out);
        result.response = std::move(resp);
    } catch (const std::exception&) {
        // Service failure produces silence; the client's timeout is the
        // error surface.
        result.response.reset();
    }
    return result;
}

}  // namespace fogfleet::proxy
