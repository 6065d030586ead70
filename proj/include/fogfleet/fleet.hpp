#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fogfleet/bytes.hpp"
#include "fogfleet/endpoint.hpp"
#include "fogfleet/latency_distribution.hpp"
#include "fogfleet/reliability.hpp"

namespace fogfleet::fleet {

enum class replica_kind { spot, on_demand };

// Catalog template for one launchable server flavor.
struct replica_spec {
    std::string name;
    replica_kind kind = replica_kind::spot;
    std::string region;
    std::string hardware;  // free-form resource description
    double price_per_hour = 0;
    std::optional<reliability::failure_model> failure;  // required for spot
    latency_distribution compute;

    void validate() const;
    // Relaunch/provision latency; on-demand replicas come up instantly in
    // simulation and never preempt.
    double recovery_s() const { return failure ? failure->recovery_time_s : 0.0; }
};

enum class replica_state { provisioning, initializing, active, preempted, relaunching, retired };

struct replica_record {
    replica_spec spec;
    peer_guid peer{};
    replica_state state = replica_state::provisioning;
    std::optional<endpoint> address;
    double state_since_ms = 0;
};

struct fleet_policy {
    int min_replicas = 1;
    std::optional<double> target_system_failure;
    std::vector<std::string> regions;  // allowed regions; empty = whole catalog
    int default_replicas = 2;          // used when a service names no level
    bool strict_regions = false;       // error out instead of reusing regions
};

// Replica count and spec selection: max(min_replicas, sizing from the
// failure target), spread across distinct regions first, cheapest spec
// within a region. Deterministic given catalog order and policy.
std::vector<replica_spec> plan(const fleet_policy& policy, std::span<const replica_spec> catalog);

enum class fleet_event_kind { preempt };

struct fleet_event {
    fleet_event_kind kind = fleet_event_kind::preempt;
    peer_guid peer{};
};

enum class action_kind { provision, relaunch, advertise, retire };

struct fleet_action {
    action_kind kind;
    peer_guid peer{};
    double at_ms = 0;
    std::string detail;
};

// Owns the replica pool state machine. Single control loop by contract:
// callers deliver commands and events onto one thread (the simulator's event
// loop or the demo's fleet thread).
class fleet_manager {
public:
    fleet_manager(fleet_policy policy, std::vector<replica_spec> catalog, double time_scale = 1.0);

    // Seeds the pool per plan(); replicas start active at t0 with advertise
    // actions (launch lead time is not part of the modeled timeline).
    std::vector<fleet_action> start(double now_ms);

    // Seeds exactly one active replica per catalog entry, in catalog order.
    // Used when the caller (scenario config) has already pinned the pool.
    std::vector<fleet_action> start_exact(double now_ms);

    // Applies preemption events, then completes any relaunch/provision whose
    // recovery window has elapsed. Relaunched replicas keep their peer guid.
    std::vector<fleet_action> tick(double now_ms, std::span<const fleet_event> events = {});

    // up: launches `count` more planned specs. down: retires the `count`
    // most expensive non-retired replicas, never below min_replicas.
    std::vector<fleet_action> scale(bool up, int count, double now_ms);

    double hourly_cost() const;  // sum over non-retired replicas

    const std::vector<replica_record>& records() const { return records_; }
    replica_record* find(const peer_guid& peer);
    int non_retired_count() const;
    int active_count() const;
    const fleet_policy& policy() const { return policy_; }

private:
    std::vector<fleet_action> launch_all(const std::vector<replica_spec>& specs, double now_ms);
    replica_record make_record(const replica_spec& spec, double now_ms);
    void transition(replica_record& r, replica_state next, double now_ms);
    double recovery_ms(const replica_record& r) const;

    fleet_policy policy_;
    std::vector<replica_spec> catalog_;
    double time_scale_;
    std::vector<replica_record> records_;
    std::uint64_t launch_counter_ = 0;
};

std::string to_string(replica_state s);
std::string to_string(action_kind k);

}  // namespace fogfleet::fleet
