#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include <nlohmann/json.hpp>

#include "cli_util.hpp"
#include "fogfleet/config.hpp"
#include "fogfleet/matcher.hpp"
#include "fogfleet/reliability.hpp"
#include "fogfleet/report.hpp"
#include "fogfleet/sim/engine.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fogfleet;
using fogfleet::cli::user_error;

// demo.cpp
int cmd_demo(const std::string& config_path, std::uint64_t requests, const std::string& out_dir);
int cmd_serve(std::uint16_t port, const std::string& port_file, const std::string& peer_hex,
              const std::string& service_name, double compute_delay_ms,
              const std::string& directory_addr, double advertise_interval_ms);
int cmd_directory(std::uint16_t port, const std::string& port_file);
int cmd_scale(const std::string& direction, int count, const std::string& fleet_addr);

namespace {

int cmd_simulate(const std::string& config_path, std::optional<std::uint64_t> seed,
                 const std::string& out_dir) {
    auto cfg = config::load_scenario(config_path);
    if (seed) cfg.seed = *seed;
    auto result = sim::run(cfg);

    fs::create_directories(out_dir);
    {
        std::ofstream trace(out_dir + "/trace.csv");
        report::write_trace_csv(trace, result.trace, cfg);
    }
    {
        std::ofstream events(out_dir + "/events.jsonl");
        report::write_events_jsonl(events, result.events);
    }
    std::string summary = report::summary_json(result, cfg);
    cli::write_file(out_dir + "/summary.json", summary);
    std::cout << summary << "\n";
    return cli::exit_ok;
}

int cmd_compare(const std::string& config_path, const std::string& variant_list,
                std::optional<std::uint64_t> seed, const std::string& out_dir) {
    auto cfg = config::load_scenario(config_path);
    if (seed) cfg.seed = *seed;

    std::vector<sim::variant_spec> variants;
    std::stringstream ss(variant_list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        if (item == "replicated") {
            variants.push_back({"replicated", std::nullopt});
        } else {
            std::string name = item;
            if (name.rfind("single:", 0) == 0) name = name.substr(7);
            std::size_t idx;
            try {
                idx = cfg.server_index(name);
            } catch (const std::invalid_argument&) {
                throw user_error("unknown variant '" + item + "' (use 'replicated' or a server name)");
            }
            variants.push_back({"single:" + name, idx});
        }
    }
    if (variants.empty()) throw user_error("no variants given");

    auto cmp = sim::compare(cfg, variants);
    std::string table = report::comparison_table(cmp);
    std::string as_json = report::comparison_json(cmp);
    std::cout << table;
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        cli::write_file(out_dir + "/comparison.json", as_json);
        cli::write_file(out_dir + "/comparison.txt", table);
    } else {
        std::cout << as_json << "\n";
    }
    return cli::exit_ok;
}

matcher::cost_matrix load_costs_csv(const std::string& path, const std::string& capacities) {
    std::ifstream in(path);
    if (!in) throw user_error("cannot open " + path);
    matcher::cost_matrix costs;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::stringstream row(line);
        std::string cell;
        std::size_t n = 0;
        while (std::getline(row, cell, ',')) {
            try {
                costs.eps.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw user_error("costs csv: not a number: '" + cell + "'");
            }
            ++n;
        }
        if (costs.n == 0)
            costs.n = n;
        else if (n != costs.n)
            throw user_error("costs csv: ragged rows");
        ++costs.m;
    }
    if (costs.m == 0) throw user_error("costs csv: empty matrix");
    if (!capacities.empty()) {
        std::stringstream caps(capacities);
        std::string cell;
        while (std::getline(caps, cell, ',')) costs.capacities.push_back(std::stoi(cell));
        if (costs.capacities.size() != costs.n)
            throw user_error("--capacities length must equal the server count");
    }
    return costs;
}

matcher::path_sample_set load_samples_json(const std::string& path, double deadline_ms) {
    json j;
    try {
        j = json::parse(cli::read_file(path));
    } catch (const json::parse_error& e) {
        throw user_error(std::string("samples json: ") + e.what());
    }
    matcher::path_sample_set s;
    try {
        s.interfaces = j.at("interfaces").get<std::size_t>();
        s.servers = j.at("servers").get<std::size_t>();
        for (const auto& l : j.at("network_ms")) s.network_ms.push_back(l.get<std::vector<double>>());
        for (const auto& l : j.at("compute_ms")) s.compute_ms.push_back(l.get<std::vector<double>>());
    } catch (const json::exception& e) {
        throw user_error(std::string("samples json: ") + e.what());
    }
    s.deadline_ms = deadline_ms > 0 ? deadline_ms : j.value("deadline_ms", 0.0);
    if (!(s.deadline_ms > 0)) throw user_error("samples json: give --deadline or a deadline_ms field");
    return s;
}

std::string assignment_json(const matcher::cost_matrix& costs, const matcher::assignment& a,
                            matcher::objective_mode mode) {
    json j;
    j["mode"] = mode == matcher::objective_mode::sum ? "sum" : "log-product";
    j["objective"] = matcher::objective(costs, a, mode);
    json pairs = json::array();
    for (std::size_t i = 0; i < a.server_of.size(); ++i)
        pairs.push_back({{"interface", i}, {"server", a.server_of[i]}});
    j["assignment"] = pairs;
    json x = json::array();
    for (std::size_t i = 0; i < costs.m; ++i) {
        json row = json::array();
        for (std::size_t jcol = 0; jcol < costs.n; ++jcol)
            row.push_back(a.server_of[i] == static_cast<int>(jcol) ? 1 : 0);
        x.push_back(row);
    }
    j["x"] = x;
    return j.dump(2);
}

int cmd_match(const std::string& costs_path, const std::string& samples_path, double deadline_ms,
              const std::string& mode_name, const std::string& capacities,
              const std::string& out_path) {
    if (costs_path.empty() == samples_path.empty())
        throw user_error("give exactly one of --costs or --samples");
    matcher::objective_mode mode;
    if (mode_name == "sum")
        mode = matcher::objective_mode::sum;
    else if (mode_name == "log-product")
        mode = matcher::objective_mode::log_product;
    else
        throw user_error("--mode must be sum or log-product");

    matcher::cost_matrix costs;
    if (!costs_path.empty()) {
        costs = load_costs_csv(costs_path, capacities);
    } else {
        auto samples = load_samples_json(samples_path, deadline_ms);
        try {
            costs = matcher::estimate_costs(samples);
        } catch (const std::invalid_argument& e) {
            throw user_error(e.what());
        }
    }

    matcher::assignment a;
    try {
        a = matcher::solve(costs, mode);
    } catch (const std::exception& e) {
        throw user_error(e.what());
    }
    std::string out = assignment_json(costs, a, mode);
    if (!out_path.empty())
        cli::write_file(out_path, out);
    else
        std::cout << out << "\n";
    return cli::exit_ok;
}

int cmd_replicas(const std::string& uptime, const std::string& recovery, double target) {
    double uptime_s = cli::parse_duration_s(uptime);
    double recovery_s = cli::parse_duration_s(recovery);
    if (!(target > 0.0 && target < 1.0)) throw user_error("--target must be in (0,1)");

    double p_vm;
    try {
        p_vm = reliability::vm_failure_probability({uptime_s, recovery_s});
    } catch (const std::invalid_argument& e) {
        throw user_error(e.what());
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", p_vm);
    std::cout << "p_vm = " << buf << "\n";
    std::cout << "p_target = " << target << "\n";
    // a replica that never fails satisfies any target alone
    int n = p_vm == 0.0 ? 1 : reliability::required_replicas(p_vm, target);
    std::cout << "N = " << n << "\n";
    std::snprintf(buf, sizeof buf, "%.6e", p_vm == 0.0 ? 0.0 : std::pow(p_vm, n));
    std::cout << "p_system = " << buf << "\n";
    return cli::exit_ok;
}

int cmd_report(const std::string& trace_path, const std::string& out_dir, std::size_t buckets) {
    std::ifstream in(trace_path);
    if (!in) throw user_error("cannot open " + trace_path);
    auto rows = report::read_trace_csv(in);
    if (rows.empty()) throw user_error("trace is empty: " + trace_path);

    std::vector<double> latencies;
    std::size_t timeouts = 0;
    for (const auto& r : rows) {
        if (r.timed_out)
            ++timeouts;
        else
            latencies.push_back(r.latency_ms);
    }
    if (latencies.empty()) throw user_error("trace has no delivered requests");

    fs::create_directories(out_dir);
    {
        std::ofstream hist(out_dir + "/histogram.csv");
        report::write_histogram_csv(hist, report::histogram(latencies, buckets));
    }
    {
        std::ofstream cdf(out_dir + "/cdf.csv");
        report::write_cdf_csv(cdf, latencies, buckets);
    }
    auto s = reliability::summarize(latencies);
    json j;
    j["count"] = s.count;
    j["mean_ms"] = s.mean_ms;
    j["p50_ms"] = s.p50_ms;
    j["p99_ms"] = s.p99_ms;
    j["max_ms"] = s.max_ms;
    j["timeouts"] = timeouts;
    j["timeout_fraction"] = static_cast<double>(timeouts) / static_cast<double>(rows.size());
    cli::write_file(out_dir + "/summary.json", j.dump(2));
    std::cout << j.dump(2) << "\n";
    return cli::exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fogfleet: replicated-request fault tolerance over unreliable paths"};
    app.require_subcommand(1);

    std::string config_path, out_dir, variant_list, costs_path, samples_path, capacities;
    std::string uptime, recovery, trace_path, mode_name = "sum", fleet_addr, direction;
    std::string port_file, peer_hex, service_name = "echo", directory_addr;
    std::optional<std::uint64_t> seed;
    double deadline_ms = 0, target = 0, compute_delay_ms = 0, advertise_interval_ms = 1000;
    std::uint64_t requests = 100;
    std::size_t buckets = 50;
    int count = 1;
    std::uint16_t port = 0;

    auto* simulate = app.add_subcommand("simulate", "run a scenario and write trace/summary");
    simulate->add_option("--config", config_path, "scenario JSON")->required();
    simulate->add_option("--seed", seed, "override the scenario seed");
    simulate->add_option("--out", out_dir, "output directory")->required();

    auto* compare = app.add_subcommand("compare", "run variants under common random numbers");
    compare->add_option("--config", config_path, "scenario JSON")->required();
    compare->add_option("--variants", variant_list, "comma list: replicated,<server>,...")->required();
    compare->add_option("--seed", seed, "override the scenario seed");
    compare->add_option("--out", out_dir, "output directory (optional)");

    auto* match = app.add_subcommand("match", "solve an interface-server assignment");
    match->add_option("--costs", costs_path, "eps matrix CSV, one row per interface");
    match->add_option("--samples", samples_path, "profiling samples JSON");
    match->add_option("--deadline", deadline_ms, "deadline in ms (for --samples)");
    match->add_option("--mode", mode_name, "sum | log-product");
    match->add_option("--capacities", capacities, "per-server capacities, comma list");
    match->add_option("--out", out_dir, "write assignment JSON here instead of stdout");

    auto* replicas = app.add_subcommand("replicas", "size a replica pool for a failure target");
    replicas->add_option("--uptime", uptime, "mean uptime (e.g. 15h)")->required();
    replicas->add_option("--recovery", recovery, "recovery time (e.g. 20m)")->required();
    replicas->add_option("--target", target, "target system failure probability")->required();

    auto* scale = app.add_subcommand("scale", "scale a running demo fleet");
    scale->add_option("direction", direction, "up | down")->required();
    scale->add_option("--count", count, "replicas to add or retire")->default_val(1);
    scale->add_option("--fleet", fleet_addr, "control address host:port")->required();

    auto* demo = app.add_subcommand("demo", "loopback UDP demo: robot + replicas + directory");
    demo->add_option("--config", config_path, "demo JSON")->required();
    demo->add_option("--requests", requests, "requests to send")->default_val(100);
    demo->add_option("--out", out_dir, "run directory");

    auto* rep = app.add_subcommand("report", "bucket a trace CSV into histogram/CDF data");
    rep->add_option("--trace", trace_path, "trace.csv from simulate")->required();
    rep->add_option("--out", out_dir, "output directory")->required();
    rep->add_option("--buckets", buckets, "bucket count")->default_val(50);

    auto* serve = app.add_subcommand("serve", "run one replica server (demo internal)");
    serve->add_option("--port", port, "UDP port (0 = auto)");
    serve->add_option("--port-file", port_file, "write the bound port here");
    serve->add_option("--peer-guid", peer_hex, "stable peer identity (hex)")->required();
    serve->add_option("--service", service_name, "service name");
    serve->add_option("--compute-delay-ms", compute_delay_ms, "synthetic compute delay");
    serve->add_option("--directory", directory_addr, "directory host:port");
    serve->add_option("--advertise-interval-ms", advertise_interval_ms, "heartbeat cadence");

    auto* dir = app.add_subcommand("directory", "run the metadata/reflector service (demo internal)");
    dir->add_option("--port", port, "UDP port (0 = auto)");
    dir->add_option("--port-file", port_file, "write the bound port here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? cli::exit_ok : cli::exit_user_error;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(config_path, seed, out_dir);
        if (compare->parsed()) return cmd_compare(config_path, variant_list, seed, out_dir);
        if (match->parsed())
            return cmd_match(costs_path, samples_path, deadline_ms, mode_name, capacities, out_dir);
        if (replicas->parsed()) return cmd_replicas(uptime, recovery, target);
        if (scale->parsed()) return cmd_scale(direction, count, fleet_addr);
        if (demo->parsed()) return cmd_demo(config_path, requests, out_dir);
        if (rep->parsed()) return cmd_report(trace_path, out_dir, buckets);
        if (serve->parsed())
            return cmd_serve(port, port_file, peer_hex, service_name, compute_delay_ms,
                             directory_addr, advertise_interval_ms);
        if (dir->parsed()) return cmd_directory(port, port_file);
    } catch (const user_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cli::exit_user_error;
    } catch (const config::config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cli::exit_user_error;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cli::exit_user_error;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return cli::exit_internal_error;
    }
    return cli::exit_internal_error;
}
