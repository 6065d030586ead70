#include "fogfleet/sim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fogfleet/hash.hpp"
#include "fogfleet/matcher.hpp"
#include "fogfleet/registry.hpp"
#include "fogfleet/sim/event_queue.hpp"
#include "fogfleet/sim/rng.hpp"
#include "fogfleet/wire.hpp"

namespace fogfleet::sim {

namespace {

constexpr std::size_t profile_draws = 200;

// Server unavailability windows [start, end). Scripted windows are fixed;
// stochastic ones extend lazily from the counter RNG, so the sequence never
// depends on query order.
class outage_timeline {
public:
    outage_timeline(const counter_rng& rng, std::size_t server_idx, double recovery_ms)
        : rng_(&rng), server_idx_(server_idx), recovery_ms_(recovery_ms) {}

    void add_scripted(double kill_ms) {
        if (!windows_.empty() && kill_ms < windows_.back().second) return;  // already down
        windows_.emplace_back(kill_ms, kill_ms + recovery_ms_);
    }

    void set_stochastic(double mean_uptime_ms) { mean_uptime_ms_ = mean_uptime_ms; }

    bool available_during(double t0, double t1) {
        extend(t1);
        for (const auto& [s, e] : windows_) {
            if (s > t1) break;
            if (e > t0) return false;  // window [s,e) overlaps [t0,t1]
        }
        return true;
    }

    const std::vector<std::pair<double, double>>& windows_up_to(double t) {
        extend(t);
        return windows_;
    }

private:
    void extend(double t) {
        if (mean_uptime_ms_ <= 0) return;
        while (generated_until_ <= t) {
            double u = rng_->uniform(static_cast<std::uint64_t>(draw::preemption), server_idx_, cycle_);
            double uptime = -std::log1p(-std::min(u, 1.0 - 1e-15)) * mean_uptime_ms_;
            double kill = generated_until_ + uptime;
            windows_.emplace_back(kill, kill + recovery_ms_);
            generated_until_ = kill + recovery_ms_;
            ++cycle_;
        }
    }

    const counter_rng* rng_;
    std::size_t server_idx_;
    double recovery_ms_;
    double mean_uptime_ms_ = 0;
    double generated_until_ = 0;
    std::uint64_t cycle_ = 0;
    std::vector<std::pair<double, double>> windows_;
};

struct request_ctx {
    trace_record rec;
};

}  // namespace

void scenario_config::validate() const {
    if (interfaces.empty()) throw std::invalid_argument("scenario: at least one interface required");
    if (servers.empty()) throw std::invalid_argument("scenario: at least one server required");
    if (!(duration_ms > 0)) throw std::invalid_argument("scenario: duration_ms must be > 0");
    if (!(deadline_ms > 0)) throw std::invalid_argument("scenario: deadline_ms must be > 0");
    if (!(time_scale > 0)) throw std::invalid_argument("scenario: time_scale must be > 0");
    for (const auto& s : servers) s.validate();
    // every (interface, server) pair needs exactly one path model
    std::vector<bool> seen(interfaces.size() * servers.size(), false);
    for (const auto& p : paths) {
        std::size_t i = interface_index(p.interface);
        std::size_t j = server_index(p.server);
        if (seen[i * servers.size() + j])
            throw std::invalid_argument("scenario: duplicate path for (" + p.interface + ", " +
                                        p.server + ")");
        seen[i * servers.size() + j] = true;
    }
    for (std::size_t i = 0; i < interfaces.size(); ++i)
        for (std::size_t j = 0; j < servers.size(); ++j)
            if (!seen[i * servers.size() + j])
                throw std::invalid_argument("scenario: missing path for (" + interfaces[i] + ", " +
                                            servers[j].name + ")");
    for (const auto& f : faults) {
        if (const auto* rs = std::get_if<region_slowdown_fault>(&f)) {
            if (rs->end_ms < rs->start_ms)
                throw std::invalid_argument("scenario: region_slowdown window inverted");
        } else if (const auto* ov = std::get_if<oversubscription_fault>(&f)) {
            server_index(ov->server);
            if (!(ov->period_ms > 0))
                throw std::invalid_argument("scenario: oversubscription period must be > 0");
        } else if (const auto* pr = std::get_if<preemption_fault>(&f)) {
            std::size_t j = server_index(pr->server);
            if (servers[j].kind != fleet::replica_kind::spot)
                throw std::invalid_argument("scenario: preemption fault targets non-spot server " +
                                            pr->server);
        } else if (const auto* io = std::get_if<interface_outage_fault>(&f)) {
            interface_index(io->interface);
            if (io->end_ms < io->start_ms)
                throw std::invalid_argument("scenario: interface_outage window inverted");
        }
    }
}

std::size_t scenario_config::interface_index(const std::string& name) const {
    for (std::size_t i = 0; i < interfaces.size(); ++i)
        if (interfaces[i] == name) return i;
    throw std::invalid_argument("scenario: unknown interface '" + name + "'");
}

std::size_t scenario_config::server_index(const std::string& name) const {
    for (std::size_t j = 0; j < servers.size(); ++j)
        if (servers[j].name == name) return j;
    throw std::invalid_argument("scenario: unknown server '" + name + "'");
}

const latency_distribution& scenario_config::path(std::size_t interface_idx,
                                                  std::size_t server_idx) const {
    for (const auto& p : paths)
        if (interface_index(p.interface) == interface_idx && server_index(p.server) == server_idx)
            return p.latency;
    throw std::invalid_argument("scenario: missing path");
}

scenario_config restrict_to_server(const scenario_config& config, std::size_t server_idx) {
    if (server_idx >= config.servers.size())
        throw std::invalid_argument("restrict_to_server: index out of range");
    scenario_config out = config;
    out.only_server = server_idx;
    return out;
}

sim_result run(const scenario_config& config) {
    config.validate();

    const std::size_t m = config.interfaces.size();
    const std::size_t n = config.servers.size();
    const counter_rng rng(config.seed);

    sim_result result;
    event_queue queue;
    proxy::pending_registry registry(1 << 20);
    const peer_guid robot = peer_guid::from_label("sim/robot");

    // Per-server unavailability from preemption faults.
    std::vector<outage_timeline> outages;
    outages.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
        double recovery_ms = config.servers[j].recovery_s() * 1000.0 * config.time_scale;
        outages.emplace_back(rng, j, recovery_ms);
    }
    for (const auto& f : config.faults) {
        if (const auto* pr = std::get_if<preemption_fault>(&f)) {
            std::size_t j = config.server_index(pr->server);
            std::vector<double> kills = pr->at_ms;
            std::sort(kills.begin(), kills.end());
            for (double t : kills) outages[j].add_scripted(t);
            if (pr->stochastic)
                outages[j].set_stochastic(pr->stochastic->mean_uptime_s * 1000.0 * config.time_scale);
        }
    }

    // The fleet state machine runs alongside and must agree with the
    // outage windows; its records carry the peer guids and the event log.
    fleet::fleet_policy pool_policy;
    pool_policy.min_replicas = static_cast<int>(n);
    fleet::fleet_manager pool(pool_policy, config.servers, config.time_scale);
    for (const auto& action : pool.start_exact(0.0))
        result.events.push_back({0.0, to_string(action.kind), action.detail});
    std::vector<peer_guid> server_peer(n);
    for (std::size_t j = 0; j < n; ++j) server_peer[j] = pool.records()[j].peer;

    double horizon = config.duration_ms + 2 * config.deadline_ms;
    for (std::size_t j = 0; j < n; ++j) {
        for (const auto& [kill, recover] : outages[j].windows_up_to(horizon)) {
            queue.at(kill, [&pool, &result, &queue, &server_peer, j, recover] {
                fleet::fleet_event ev{fleet::fleet_event_kind::preempt, server_peer[j]};
                for (auto action : pool.tick(queue.now_ms(), std::span(&ev, 1)))
                    result.events.push_back({queue.now_ms(), to_string(action.kind), action.detail});
            });
            queue.at(recover, [&pool, &result, &queue] {
                for (auto action : pool.tick(queue.now_ms()))
                    result.events.push_back({queue.now_ms(), to_string(action.kind), action.detail});
            });
        }
    }

    // Active (interface, server) pairs.
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    if (config.only_server) {
        for (std::size_t i = 0; i < m; ++i) pairs.emplace_back(i, *config.only_server);
    } else if (config.matcher_mode == matcher_mode_t::matched) {
        matcher::path_sample_set profile;
        profile.interfaces = m;
        profile.servers = n;
        profile.deadline_ms = config.deadline_ms;
        profile.network_ms.resize(m * n);
        profile.compute_ms.resize(n);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t d = 0; d < profile_draws; ++d)
                    profile.network_ms[i * n + j].push_back(config.path(i, j).sample(rng.uniform(
                        static_cast<std::uint64_t>(draw::profile_network), i * n + j, d)));
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t d = 0; d < profile_draws; ++d)
                profile.compute_ms[j].push_back(config.servers[j].compute.sample(
                    rng.uniform(static_cast<std::uint64_t>(draw::profile_compute), j, d)));
        auto assignment = matcher::solve(matcher::estimate_costs(profile));
        result.assignment_server_of = assignment.server_of;
        for (std::size_t i = 0; i < m; ++i)
            pairs.emplace_back(i, static_cast<std::size_t>(assignment.server_of[i]));
    } else {
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) pairs.emplace_back(i, j);
    }

    // Request send times.
    std::vector<double> send_times;
    {
        double t = 0;
        std::uint64_t i = 0;
        while (t <= config.duration_ms &&
               (!config.max_requests || i < *config.max_requests)) {
            send_times.push_back(t);
            if (const auto* iv = std::get_if<interval_schedule>(&config.schedule)) {
                t += iv->interval_ms;
            } else {
                const auto& po = std::get<poisson_schedule>(config.schedule);
                double u = rng.uniform(static_cast<std::uint64_t>(draw::schedule), i, 0);
                t += -std::log1p(-std::min(u, 1.0 - 1e-15)) / po.rate_per_s * 1000.0;
            }
            ++i;
        }
    }

    const std::uint64_t frame_bytes =
        wire::header_bytes + static_cast<std::uint64_t>(config.payload_bytes);
    const auto* gw = std::get_if<gateway_topology>(&config.topology);
    const double uplink_ms =
        gw ? static_cast<double>(frame_bytes) / gw->bandwidth_bytes_per_s * 1000.0 : 0.0;

    auto interface_down = [&](std::size_t i, double t) {
        for (const auto& f : config.faults) {
            const auto* io = std::get_if<interface_outage_fault>(&f);
            if (io && config.interface_index(io->interface) == i && t >= io->start_ms &&
                t < io->end_ms)
                return true;
        }
        return false;
    };
    auto slowdown_ms = [&](std::size_t j, double t) {
        double added = 0;
        for (const auto& f : config.faults) {
            const auto* rs = std::get_if<region_slowdown_fault>(&f);
            if (rs && config.servers[j].region == rs->region && t >= rs->start_ms && t < rs->end_ms)
                added += rs->added_ms;
        }
        return added;
    };
    auto oversub_factor = [&](std::size_t j, double service_start) {
        double factor = 0;
        for (const auto& f : config.faults) {
            const auto* ov = std::get_if<oversubscription_fault>(&f);
            if (!ov || config.server_index(ov->server) != j) continue;
            double phase = std::fmod(service_start, ov->period_ms);
            if (phase < ov->period_ms / 2) factor += ov->load_factor;  // burst half of each period
        }
        return factor;
    };

    std::vector<request_ctx> ctxs(send_times.size());

    for (std::size_t i = 0; i < send_times.size(); ++i) {
        queue.at(send_times[i], [&, i] {
            const double t = send_times[i];
            request_ctx& ctx = ctxs[i];
            ctx.rec.request_index = i;
            ctx.rec.send_ms = t;

            const request_id rid = new_request_id(robot, i);
            registry.register_request(rid, t + config.deadline_ms, {}, nullptr, nullptr);

            // Gateway topology: one upstream frame per transmitting interface.
            if (gw) {
                std::vector<bool> iface_sent(m, false);
                for (const auto& [fi, sj] : pairs) {
                    (void)sj;
                    if (!interface_down(fi, t)) iface_sent[fi] = true;
                }
                for (std::size_t fi = 0; fi < m; ++fi)
                    if (iface_sent[fi]) ctx.rec.egress_bytes += frame_bytes;
            }

            for (const auto& [fi, sj] : pairs) {
                path_outcome out;
                out.interface_idx = fi;
                out.server_idx = sj;
                if (interface_down(fi, t)) {
                    out.status = path_status::lost_interface_down;
                    ctx.rec.outcomes.push_back(out);
                    continue;
                }
                if (!gw) ctx.rec.egress_bytes += frame_bytes;

                double net = config.path(fi, sj).sample(rng.uniform(
                                 static_cast<std::uint64_t>(draw::network), i, fi * n + sj)) +
                             slowdown_ms(sj, t) + uplink_ms;
                double comp = config.servers[sj].compute.sample(
                    rng.uniform(static_cast<std::uint64_t>(draw::compute), i, sj));
                comp *= 1.0 + oversub_factor(sj, t + net / 2);
                double completion = t + net / 2 + comp;  // service done, response departs
                double response_at = t + net + comp;

                if (!outages[sj].available_during(t, completion)) {
                    out.status = path_status::lost_server_down;
                    ctx.rec.outcomes.push_back(out);
                    continue;
                }

                out.status = path_status::responded;
                out.response_ms = response_at;
                std::size_t slot = ctx.rec.outcomes.size();
                ctx.rec.outcomes.push_back(out);

                queue.at(response_at, [&registry, &ctx, rid, slot, response_at] {
                    wire::envelope resp;
                    resp.type = wire::msg_type::response;
                    resp.request = rid;
                    auto outcome = registry.on_response(resp);
                    if (outcome == proxy::response_outcome::delivered) {
                        ctx.rec.winner = slot;
                        ctx.rec.latency_ms = response_at - ctx.rec.send_ms;
                    }
                });
            }

            queue.at(t + config.deadline_ms, [&registry, &ctx, rid] {
                if (registry.on_timeout(rid) == proxy::timeout_outcome::timed_out)
                    ctx.rec.timed_out = true;
            });
        });
    }

    queue.run();

    result.trace.reserve(ctxs.size());
    for (auto& ctx : ctxs) result.trace.push_back(std::move(ctx.rec));
    auto metrics = registry.metrics();
    result.delivered = metrics.delivered;
    result.timeouts = metrics.timeouts;
    result.duplicate_drops = metrics.duplicate_drops;
    result.late_drops = metrics.late_drops;
    return result;
}

variant_summary summarize_trace(const std::string& name, const std::vector<trace_record>& trace) {
    variant_summary s;
    s.name = name;
    s.requests = trace.size();
    std::vector<double> latencies;
    for (const auto& r : trace) {
        s.egress_bytes += r.egress_bytes;
        if (r.latency_ms)
            latencies.push_back(*r.latency_ms);
        else
            s.timeout_fraction += 1;
    }
    if (!trace.empty()) s.timeout_fraction /= static_cast<double>(trace.size());
    if (!latencies.empty()) s.latency = reliability::summarize(latencies);
    return s;
}

comparison compare(const scenario_config& config, const std::vector<variant_spec>& variants) {
    comparison cmp;
    std::string replicated_name;
    for (const auto& v : variants) {
        scenario_config run_config =
            v.single_server ? restrict_to_server(config, *v.single_server) : config;
        auto result = run(run_config);
        cmp.variants.push_back(summarize_trace(v.name, result.trace));
        if (!v.single_server && replicated_name.empty()) replicated_name = v.name;
    }
    if (!replicated_name.empty()) {
        const variant_summary* replicated = nullptr;
        for (const auto& v : cmp.variants)
            if (v.name == replicated_name) replicated = &v;
        for (const auto& v : cmp.variants) {
            if (v.name == replicated_name) continue;
            if (replicated->latency.mean_ms > 0)
                cmp.mean_improvement[v.name] = v.latency.mean_ms / replicated->latency.mean_ms;
            if (replicated->latency.p99_ms > 0)
                cmp.p99_improvement[v.name] = v.latency.p99_ms / replicated->latency.p99_ms;
        }
    }
    return cmp;
}

}  // namespace fogfleet::sim
