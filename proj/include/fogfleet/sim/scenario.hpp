#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fogfleet/fleet.hpp"
#include "fogfleet/latency_distribution.hpp"

namespace fogfleet::sim {

struct interval_schedule {
    double interval_ms = 100;
};

struct poisson_schedule {
    double rate_per_s = 10;
};

using request_schedule = std::variant<interval_schedule, poisson_schedule>;

// Fault injectors reproducing the experimental conditions: regional network
// slowdown, compute oversubscription, spot preemption, interface outage.
struct region_slowdown_fault {
    std::string region;
    double added_ms = 0;
    double start_ms = 0;
    double end_ms = 0;
};

struct oversubscription_fault {
    std::string server;
    double load_factor = 1.0;
    double period_ms = 1000;  // concurrent client bursts in the first half of each period
};

struct preemption_fault {
    std::string server;
    std::vector<double> at_ms;                               // scripted kill times
    std::optional<reliability::failure_model> stochastic;    // or drawn uptimes
};

struct interface_outage_fault {
    std::string interface;
    double start_ms = 0;
    double end_ms = 0;
};

using fault_injector = std::variant<region_slowdown_fault, oversubscription_fault, preemption_fault,
                                    interface_outage_fault>;

enum class matcher_mode_t { all_pairs, matched };

struct direct_topology {};
struct gateway_topology {
    double bandwidth_bytes_per_s = 1e6;  // robot -> gateway uplink
};
using topology_cfg = std::variant<direct_topology, gateway_topology>;

struct path_cfg {
    std::string interface;
    std::string server;
    latency_distribution latency;  // round-trip network model
};

struct scenario_config {
    std::uint64_t seed = 1;
    double duration_ms = 10'000;
    std::optional<std::uint64_t> max_requests;
    request_schedule schedule = interval_schedule{};
    double deadline_ms = 1000;
    std::uint32_t payload_bytes = 64;
    matcher_mode_t matcher_mode = matcher_mode_t::all_pairs;
    topology_cfg topology = direct_topology{};
    double time_scale = 1.0;  // compresses recovery/uptime processes
    std::vector<std::string> interfaces;
    std::vector<fleet::replica_spec> servers;
    std::vector<path_cfg> paths;  // one per (interface, server) pair
    std::vector<fault_injector> faults;

    // Internal: single-server baseline restriction. Keeps the full server
    // list so RNG stream coordinates stay aligned across compared variants.
    std::optional<std::size_t> only_server;

    void validate() const;
    std::size_t interface_index(const std::string& name) const;
    std::size_t server_index(const std::string& name) const;
    const latency_distribution& path(std::size_t interface_idx, std::size_t server_idx) const;
};

// One compared deployment: the replicated fleet or a pinned single server.
struct variant_spec {
    std::string name;
    std::optional<std::size_t> single_server;  // nullopt = replicated
};

enum class path_status { responded, lost_interface_down, lost_server_down };

struct path_outcome {
    std::size_t interface_idx = 0;
    std::size_t server_idx = 0;
    path_status status = path_status::responded;
    double response_ms = 0;  // absolute time; meaningful when responded
};

struct trace_record {
    std::uint64_t request_index = 0;
    double send_ms = 0;
    std::vector<path_outcome> outcomes;
    std::optional<std::size_t> winner;   // index into outcomes
    std::optional<double> latency_ms;    // end-to-end; unset on timeout
    bool timed_out = false;
    std::uint64_t egress_bytes = 0;      // robot uplink bytes for this request
};

struct sim_event_log_entry {
    double t_ms = 0;
    std::string kind;
    std::string detail;
};

struct sim_result {
    std::vector<trace_record> trace;
    std::vector<sim_event_log_entry> events;
    std::uint64_t delivered = 0;
    std::uint64_t timeouts = 0;
    std::uint64_t duplicate_drops = 0;
    std::uint64_t late_drops = 0;
    std::vector<int> assignment_server_of;  // matched mode: server per interface
};

}  // namespace fogfleet::sim
