#include "fogfleet/fleet.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "fogfleet/hash.hpp"

namespace fogfleet::fleet {

void replica_spec::validate() const {
    if (name.empty()) throw std::invalid_argument("replica_spec: name required");
    if (region.empty()) throw std::invalid_argument("replica_spec: region required");
    if (price_per_hour < 0) throw std::invalid_argument("replica_spec: price must be >= 0");
    if (kind == replica_kind::spot && !failure)
        throw std::invalid_argument("replica_spec: spot replicas need a failure model");
}

std::vector<replica_spec> plan(const fleet_policy& policy, std::span<const replica_spec> catalog) {
    if (catalog.empty()) throw std::invalid_argument("plan: empty catalog");
    if (policy.min_replicas < 1) throw std::invalid_argument("plan: min_replicas must be >= 1");
    for (const auto& s : catalog) s.validate();

    std::vector<const replica_spec*> usable;
    for (const auto& s : catalog) {
        if (!policy.regions.empty() &&
            std::find(policy.regions.begin(), policy.regions.end(), s.region) == policy.regions.end())
            continue;
        usable.push_back(&s);
    }
    if (usable.empty()) throw std::runtime_error("plan: no catalog spec matches the allowed regions");

    int count = policy.min_replicas;
    if (policy.target_system_failure) {
        // Size against the worst per-VM failure probability on offer.
        double worst = 0;
        for (const auto* s : usable)
            if (s->failure) worst = std::max(worst, reliability::vm_failure_probability(*s->failure));
        if (worst > 0)
            count = std::max(count, reliability::required_replicas(worst, *policy.target_system_failure));
    }

    // Group by region, cheapest first within a region (catalog order stable);
    // regions ordered by their cheapest offer.
    std::map<std::string, std::vector<const replica_spec*>> by_region;
    for (const auto* s : usable) by_region[s->region].push_back(s);
    std::vector<std::pair<std::string, std::vector<const replica_spec*>>> regions(by_region.begin(),
                                                                                  by_region.end());
    for (auto& [name, specs] : regions)
        std::stable_sort(specs.begin(), specs.end(),
                         [](const replica_spec* a, const replica_spec* b) {
                             return a->price_per_hour < b->price_per_hour;
                         });
    std::stable_sort(regions.begin(), regions.end(), [](const auto& a, const auto& b) {
        return a.second.front()->price_per_hour < b.second.front()->price_per_hour;
    });

    if (policy.strict_regions && count > static_cast<int>(regions.size()))
        throw std::runtime_error("plan: insufficient catalog, " + std::to_string(count) +
                                 " replicas need distinct regions but only " +
                                 std::to_string(regions.size()) + " available");

    std::vector<replica_spec> chosen;
    chosen.reserve(count);
    for (int i = 0; i < count; ++i) {
        const auto& region = regions[i % regions.size()];
        const auto& specs = region.second;
        // Repeat visits to a region walk down its price-sorted list, then
        // reuse the cheapest template.
        std::size_t pass = i / regions.size();
        chosen.push_back(*specs[std::min(pass, specs.size() - 1)]);
    }
    return chosen;
}

fleet_manager::fleet_manager(fleet_policy policy, std::vector<replica_spec> catalog, double time_scale)
    : policy_(std::move(policy)), catalog_(std::move(catalog)), time_scale_(time_scale) {
    if (!(time_scale_ > 0)) throw std::invalid_argument("fleet_manager: time_scale must be > 0");
}

replica_record fleet_manager::make_record(const replica_spec& spec, double now_ms) {
    replica_record r;
    r.spec = spec;
    r.peer = peer_guid::from_label("replica/" + spec.name + "/" + std::to_string(launch_counter_++));
    r.state = replica_state::provisioning;
    r.state_since_ms = now_ms;
    return r;
}

void fleet_manager::transition(replica_record& r, replica_state next, double now_ms) {
    using s = replica_state;
    bool legal = false;
    switch (r.state) {
        case s::provisioning: legal = next == s::initializing || next == s::retired; break;
        case s::initializing: legal = next == s::active || next == s::retired; break;
        case s::active:
            legal = next == s::retired ||
                    (next == s::preempted && r.spec.kind == replica_kind::spot);
            break;
        case s::preempted: legal = next == s::relaunching || next == s::retired; break;
        case s::relaunching: legal = next == s::initializing || next == s::retired; break;
        case s::retired: legal = false; break;
    }
    if (!legal)
        throw std::logic_error("fleet: illegal transition " + to_string(r.state) + " -> " +
                               to_string(next) + " for " + r.peer.hex().substr(0, 8));
    r.state = next;
    r.state_since_ms = now_ms;
}

double fleet_manager::recovery_ms(const replica_record& r) const {
    return r.spec.recovery_s() * 1000.0 * time_scale_;
}

std::vector<fleet_action> fleet_manager::start(double now_ms) {
    return launch_all(plan(policy_, catalog_), now_ms);
}

std::vector<fleet_action> fleet_manager::start_exact(double now_ms) {
    return launch_all(catalog_, now_ms);
}

std::vector<fleet_action> fleet_manager::launch_all(const std::vector<replica_spec>& specs,
                                                    double now_ms) {
    std::vector<fleet_action> actions;
    for (const auto& spec : specs) {
        spec.validate();
        replica_record r = make_record(spec, now_ms);
        transition(r, replica_state::initializing, now_ms);
        transition(r, replica_state::active, now_ms);
        actions.push_back({action_kind::provision, r.peer, now_ms, spec.name + "@" + spec.region});
        actions.push_back({action_kind::advertise, r.peer, now_ms, spec.name});
        records_.push_back(std::move(r));
    }
    return actions;
}

std::vector<fleet_action> fleet_manager::tick(double now_ms, std::span<const fleet_event> events) {
    std::vector<fleet_action> actions;
    for (const auto& ev : events) {
        if (ev.kind != fleet_event_kind::preempt) continue;
        replica_record* r = find(ev.peer);
        if (!r || r->state != replica_state::active) continue;  // stale notice
        if (r->spec.kind != replica_kind::spot) continue;       // on-demand never preempts
        transition(*r, replica_state::preempted, now_ms);
        transition(*r, replica_state::relaunching, now_ms);
        actions.push_back({action_kind::relaunch, r->peer, now_ms,
                           "recovery " + std::to_string(recovery_ms(*r)) + "ms"});
    }
    for (auto& r : records_) {
        bool launching =
            r.state == replica_state::relaunching || r.state == replica_state::provisioning;
        if (launching && now_ms - r.state_since_ms >= recovery_ms(r)) {
            transition(r, replica_state::initializing, now_ms);
            transition(r, replica_state::active, now_ms);
            // Same peer guid: the relaunched replica reclaims its connection
            // identity when it re-advertises.
            actions.push_back({action_kind::advertise, r.peer, now_ms, r.spec.name});
        }
    }
    return actions;
}

std::vector<fleet_action> fleet_manager::scale(bool up, int count, double now_ms) {
    if (count < 1) throw std::invalid_argument("scale: count must be >= 1");
    std::vector<fleet_action> actions;
    if (up) {
        auto specs = plan(policy_, catalog_);
        for (int i = 0; i < count; ++i) {
            // Cycle the planned mix for additional capacity.
            const auto& spec = specs[(non_retired_count() + i) % specs.size()];
            replica_record r = make_record(spec, now_ms);
            actions.push_back({action_kind::provision, r.peer, now_ms, spec.name + "@" + spec.region});
            records_.push_back(std::move(r));
        }
        return actions;
    }
    if (non_retired_count() - count < policy_.min_replicas)
        throw std::runtime_error("scale: refusing to drop below min_replicas=" +
                                 std::to_string(policy_.min_replicas));
    // Most expensive first.
    std::vector<replica_record*> live;
    for (auto& r : records_)
        if (r.state != replica_state::retired) live.push_back(&r);
    std::stable_sort(live.begin(), live.end(), [](const replica_record* a, const replica_record* b) {
        return a->spec.price_per_hour > b->spec.price_per_hour;
    });
    for (int i = 0; i < count; ++i) {
        transition(*live[i], replica_state::retired, now_ms);
        actions.push_back({action_kind::retire, live[i]->peer, now_ms, live[i]->spec.name});
    }
    return actions;
}

double fleet_manager::hourly_cost() const {
    double total = 0;
    for (const auto& r : records_)
        if (r.state != replica_state::retired) total += r.spec.price_per_hour;
    return total;
}

replica_record* fleet_manager::find(const peer_guid& peer) {
    for (auto& r : records_)
        if (r.peer == peer) return &r;
    return nullptr;
}

int fleet_manager::non_retired_count() const {
    int n = 0;
    for (const auto& r : records_) n += (r.state != replica_state::retired);
    return n;
}

int fleet_manager::active_count() const {
    int n = 0;
    for (const auto& r : records_) n += (r.state == replica_state::active);
    return n;
}

std::string to_string(replica_state s) {
    switch (s) {
        case replica_state::provisioning: return "provisioning";
        case replica_state::initializing: return "initializing";
        case replica_state::active: return "active";
        case replica_state::preempted: return "preempted";
        case replica_state::relaunching: return "relaunching";
        case replica_state::retired: return "retired";
    }
    return "?";
}

std::string to_string(action_kind k) {
    switch (k) {
        case action_kind::provision: return "provision";
        case action_kind::relaunch: return "relaunch";
        case action_kind::advertise: return "advertise";
        case action_kind::retire: return "retire";
    }
    return "?";
}

}  // namespace fogfleet::fleet
