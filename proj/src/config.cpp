#include "fogfleet/config.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace fogfleet::config {

using nlohmann::json;

namespace {

const json& field(const json& j, const std::string& path, const char* name) {
    if (!j.is_object()) throw config_error(path, "expected an object");
    auto it = j.find(name);
    if (it == j.end()) throw config_error(path.empty() ? name : path + "." + name, "missing field");
    return *it;
}

double number(const json& j, const std::string& path, const char* name) {
    const json& v = field(j, path, name);
    if (!v.is_number()) throw config_error(path + "." + name, "expected a number");
    return v.get<double>();
}

double number_or(const json& j, const std::string& path, const char* name, double fallback) {
    if (!j.contains(name)) return fallback;
    return number(j, path, name);
}

std::string text(const json& j, const std::string& path, const char* name) {
    const json& v = field(j, path, name);
    if (!v.is_string()) throw config_error(path + "." + name, "expected a string");
    return v.get<std::string>();
}

std::string text_or(const json& j, const std::string& path, const char* name,
                    const std::string& fallback) {
    if (!j.contains(name)) return fallback;
    return text(j, path, name);
}

latency_distribution latency_from(const json& j, const std::string& path) {
    std::string kind = text(j, path, "kind");
    try {
        if (kind == "constant") return latency_distribution::constant(number(j, path, "value_ms"));
        if (kind == "lognormal")
            return latency_distribution::lognormal(number(j, path, "mu_log_ms"),
                                                   number(j, path, "sigma_log_ms"));
        if (kind == "shifted_exponential")
            return latency_distribution::shifted_exponential(number(j, path, "offset_ms"),
                                                             number(j, path, "mean_ms"));
        if (kind == "empirical") {
            const json& s = field(j, path, "samples_ms");
            if (!s.is_array()) throw config_error(path + ".samples_ms", "expected an array");
            std::vector<double> samples;
            for (const auto& v : s) samples.push_back(v.get<double>());
            return latency_distribution::empirical(std::move(samples));
        }
    } catch (const std::invalid_argument& e) {
        throw config_error(path, e.what());
    }
    throw config_error(path + ".kind", "unknown distribution kind '" + kind + "'");
}

fleet::replica_spec server_from(const json& j, const std::string& path) {
    fleet::replica_spec spec;
    spec.name = text(j, path, "name");
    spec.region = text_or(j, path, "region", "default");
    spec.hardware = text_or(j, path, "hardware", "");
    std::string kind = text_or(j, path, "kind", "spot");
    if (kind == "spot")
        spec.kind = fleet::replica_kind::spot;
    else if (kind == "on_demand")
        spec.kind = fleet::replica_kind::on_demand;
    else
        throw config_error(path + ".kind", "expected 'spot' or 'on_demand'");
    spec.price_per_hour = number_or(j, path, "price_per_hour", 0.0);
    if (j.contains("failure")) {
        const json& f = j.at("failure");
        spec.failure = reliability::failure_model{number(f, path + ".failure", "mean_uptime_s"),
                                                  number(f, path + ".failure", "recovery_s")};
    } else if (spec.kind == fleet::replica_kind::spot) {
        throw config_error(path + ".failure", "spot servers need a failure model");
    }
    if (j.contains("compute"))
        spec.compute = latency_from(j.at("compute"), path + ".compute");
    else
        spec.compute = latency_distribution::constant(0);
    return spec;
}

}  // namespace

sim::scenario_config parse_scenario(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw config_error("<root>", std::string("invalid JSON: ") + e.what());
    }

    sim::scenario_config cfg;
    cfg.seed = static_cast<std::uint64_t>(number_or(j, "", "seed", 1));
    cfg.duration_ms = number(j, "", "duration_ms");
    cfg.deadline_ms = number(j, "", "deadline_ms");
    cfg.payload_bytes = static_cast<std::uint32_t>(number_or(j, "", "payload_bytes", 64));
    cfg.time_scale = number_or(j, "", "time_scale", 1.0);
    if (j.contains("max_requests"))
        cfg.max_requests = static_cast<std::uint64_t>(number(j, "", "max_requests"));

    if (j.contains("schedule")) {
        const json& s = j.at("schedule");
        std::string kind = text(s, "schedule", "kind");
        if (kind == "interval")
            cfg.schedule = sim::interval_schedule{number(s, "schedule", "interval_ms")};
        else if (kind == "poisson")
            cfg.schedule = sim::poisson_schedule{number(s, "schedule", "rate_per_s")};
        else
            throw config_error("schedule.kind", "expected 'interval' or 'poisson'");
    }

    std::string mode = text_or(j, "", "matcher_mode", "all-pairs");
    if (mode == "all-pairs")
        cfg.matcher_mode = sim::matcher_mode_t::all_pairs;
    else if (mode == "matched")
        cfg.matcher_mode = sim::matcher_mode_t::matched;
    else
        throw config_error("matcher_mode", "expected 'all-pairs' or 'matched'");

    if (j.contains("topology")) {
        const json& t = j.at("topology");
        std::string kind = text(t, "topology", "kind");
        if (kind == "direct")
            cfg.topology = sim::direct_topology{};
        else if (kind == "gateway")
            cfg.topology = sim::gateway_topology{number(t, "topology", "bandwidth_bytes_per_s")};
        else
            throw config_error("topology.kind", "expected 'direct' or 'gateway'");
    }

    const json& ifs = field(j, "", "interfaces");
    if (!ifs.is_array() || ifs.empty()) throw config_error("interfaces", "expected a non-empty array");
    for (std::size_t k = 0; k < ifs.size(); ++k) {
        const json& e = ifs[k];
        std::string path = "interfaces[" + std::to_string(k) + "]";
        if (e.is_string())
            cfg.interfaces.push_back(e.get<std::string>());
        else
            cfg.interfaces.push_back(text(e, path, "name"));
    }

    const json& servers = field(j, "", "servers");
    if (!servers.is_array() || servers.empty())
        throw config_error("servers", "expected a non-empty array");
    for (std::size_t k = 0; k < servers.size(); ++k)
        cfg.servers.push_back(server_from(servers[k], "servers[" + std::to_string(k) + "]"));

    const json& paths = field(j, "", "paths");
    if (!paths.is_array()) throw config_error("paths", "expected an array");
    for (std::size_t k = 0; k < paths.size(); ++k) {
        const json& p = paths[k];
        std::string path = "paths[" + std::to_string(k) + "]";
        sim::path_cfg pc;
        pc.interface = text(p, path, "interface");
        pc.server = text(p, path, "server");
        pc.latency = latency_from(field(p, path, "latency"), path + ".latency");
        cfg.paths.push_back(std::move(pc));
    }

    if (j.contains("faults")) {
        const json& faults = j.at("faults");
        if (!faults.is_array()) throw config_error("faults", "expected an array");
        for (std::size_t k = 0; k < faults.size(); ++k) {
            const json& f = faults[k];
            std::string path = "faults[" + std::to_string(k) + "]";
            std::string kind = text(f, path, "kind");
            if (kind == "region_slowdown") {
                cfg.faults.push_back(sim::region_slowdown_fault{
                    text(f, path, "region"), number(f, path, "added_ms"),
                    number(f, path, "start_ms"), number(f, path, "end_ms")});
            } else if (kind == "oversubscription") {
                cfg.faults.push_back(sim::oversubscription_fault{text(f, path, "server"),
                                                                 number(f, path, "load_factor"),
                                                                 number(f, path, "period_ms")});
            } else if (kind == "preemption") {
                sim::preemption_fault pf;
                pf.server = text(f, path, "server");
                if (f.contains("at_ms")) {
                    for (const auto& t : f.at("at_ms")) pf.at_ms.push_back(t.get<double>());
                }
                if (f.contains("mean_uptime_s"))
                    pf.stochastic = reliability::failure_model{number(f, path, "mean_uptime_s"),
                                                               number(f, path, "recovery_s")};
                if (pf.at_ms.empty() && !pf.stochastic)
                    throw config_error(path, "preemption needs at_ms or mean_uptime_s/recovery_s");
                cfg.faults.push_back(std::move(pf));
            } else if (kind == "interface_outage") {
                cfg.faults.push_back(sim::interface_outage_fault{text(f, path, "interface"),
                                                                 number(f, path, "start_ms"),
                                                                 number(f, path, "end_ms")});
            } else {
                throw config_error(path + ".kind", "unknown fault kind '" + kind + "'");
            }
        }
    }

    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw config_error("<scenario>", e.what());
    }
    return cfg;
}

sim::scenario_config load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("<file>", "cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

demo_config parse_demo(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw config_error("<root>", std::string("invalid JSON: ") + e.what());
    }
    demo_config cfg;
    cfg.service_name = text_or(j, "", "service", "echo");
    cfg.replicas = static_cast<int>(number_or(j, "", "replicas", 2));
    cfg.deadline_ms = number_or(j, "", "deadline_ms", 1000);
    cfg.request_interval_ms = number_or(j, "", "request_interval_ms", 50);
    cfg.payload_bytes = static_cast<std::uint32_t>(number_or(j, "", "payload_bytes", 32));
    cfg.interfaces = static_cast<int>(number_or(j, "", "interfaces", 1));
    cfg.compute_delay_ms = number_or(j, "", "compute_delay_ms", 0);
    if (cfg.replicas < 1) throw config_error("replicas", "must be >= 1");
    if (cfg.interfaces < 1) throw config_error("interfaces", "must be >= 1");
    if (j.contains("script")) {
        const json& steps = j.at("script");
        if (!steps.is_array()) throw config_error("script", "expected an array");
        for (std::size_t k = 0; k < steps.size(); ++k) {
            const json& s = steps[k];
            std::string path = "script[" + std::to_string(k) + "]";
            demo_script_step step;
            step.at_request = static_cast<std::uint64_t>(number(s, path, "at_request"));
            step.action = text(s, path, "action");
            if (step.action != "kill_server" && step.action != "relaunch_server" &&
                step.action != "kill_directory")
                throw config_error(path + ".action",
                                   "expected kill_server | relaunch_server | kill_directory");
            if (step.action != "kill_directory")
                step.server = static_cast<std::size_t>(number(s, path, "server"));
            cfg.script.push_back(step);
        }
    }
    return cfg;
}

demo_config load_demo(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("<file>", "cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_demo(buf.str());
}

latency_distribution parse_latency(const std::string& json_text) {
    return latency_from(json::parse(json_text), "latency");
}

}  // namespace fogfleet::config
