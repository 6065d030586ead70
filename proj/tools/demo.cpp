#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

#include "cli_util.hpp"
#include "fogfleet/config.hpp"
#include "fogfleet/discovery.hpp"
#include "fogfleet/hash.hpp"
#include "fogfleet/proxy.hpp"
#include "fogfleet/udp.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fogfleet;
using fogfleet::cli::user_error;

namespace {

using steady = std::chrono::steady_clock;

double ms_since(steady::time_point t0) {
    return std::chrono::duration<double, std::milli>(steady::now() - t0).count();
}

std::string self_exe() {
    char buf[4096];
    ssize_t n = ::readlink("/proc/self/exe", buf, sizeof buf - 1);
    if (n <= 0) throw std::runtime_error("cannot resolve /proc/self/exe");
    buf[n] = 0;
    return buf;
}

pid_t spawn(const std::vector<std::string>& args) {
    std::vector<char*> argv;
    for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);
    pid_t pid = ::fork();
    if (pid < 0) throw std::runtime_error("fork failed");
    if (pid == 0) {
        ::execv(argv[0], argv.data());
        _exit(127);
    }
    return pid;
}

void kill_and_reap(pid_t pid) {
    if (pid <= 0) return;
    ::kill(pid, SIGKILL);
    int status = 0;
    ::waitpid(pid, &status, 0);
}

std::uint16_t wait_port_file(const std::string& path, double timeout_ms = 5000) {
    auto t0 = steady::now();
    while (ms_since(t0) < timeout_ms) {
        std::ifstream in(path);
        int port = 0;
        if (in >> port && port > 0) return static_cast<std::uint16_t>(port);
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    throw std::runtime_error("timed out waiting for port file " + path);
}

struct server_proc {
    pid_t pid = -1;
    std::string guid_label;
    peer_guid guid;
    std::uint16_t port = 0;
    bool alive = false;
};

// The local-process provisioner: "launching a replica" spawns this binary's
// serve subcommand on a loopback port. Relaunch reuses the guid label, so the
// replica reclaims its connection identity.
class local_process_provisioner {
public:
    local_process_provisioner(std::string run_dir, endpoint directory, std::string service,
                              double compute_delay_ms)
        : exe_(self_exe()), run_dir_(std::move(run_dir)), directory_(directory),
          service_(std::move(service)), compute_delay_ms_(compute_delay_ms) {}

    ~local_process_provisioner() { shutdown(); }

    std::size_t launch() {
        server_proc s;
        s.guid_label = "demo/replica-" + std::to_string(next_index_++);
        s.guid = peer_guid::from_label(s.guid_label);
        start(s);
        servers_.push_back(s);
        return servers_.size() - 1;
    }

    void kill_server(std::size_t idx) {
        auto& s = at(idx);
        if (!s.alive) return;
        kill_and_reap(s.pid);
        s.alive = false;
        s.pid = -1;
    }

    void relaunch(std::size_t idx) {
        auto& s = at(idx);
        if (s.alive) kill_server(idx);
        start(s);
    }

    std::size_t alive_count() const {
        std::size_t n = 0;
        for (const auto& s : servers_) n += s.alive;
        return n;
    }

    const std::vector<server_proc>& servers() const { return servers_; }

    void shutdown() {
        for (auto& s : servers_)
            if (s.alive) {
                kill_and_reap(s.pid);
                s.alive = false;
            }
    }

private:
    server_proc& at(std::size_t idx) {
        if (idx >= servers_.size()) throw user_error("no server with index " + std::to_string(idx));
        return servers_[idx];
    }

    void start(server_proc& s) {
        std::string port_file = run_dir_ + "/" + s.guid_label.substr(5) + ".port";
        std::error_code ec;
        fs::remove(port_file, ec);
        s.pid = spawn({exe_, "serve", "--port", "0", "--port-file", port_file, "--peer-guid",
                       s.guid.hex(), "--service", service_, "--compute-delay-ms",
                       std::to_string(compute_delay_ms_), "--directory", directory_.str()});
        s.port = wait_port_file(port_file);
        s.alive = true;
    }

    std::string exe_;
    std::string run_dir_;
    endpoint directory_;
    std::string service_;
    double compute_delay_ms_;
    std::vector<server_proc> servers_;
    std::size_t next_index_ = 0;
};

const service_id control_service = service_id::from_label("fogfleet/control");

// Source address of the datagram currently being dispatched on this worker
// thread; the registry's response sink runs synchronously inside on_response
// and reads it to identify the winning replica. Trivially initialized on
// purpose: worker threads never pass through a dynamic initializer.
thread_local const endpoint* current_response_source = nullptr;

}  // namespace

int cmd_directory(std::uint16_t port, const std::string& port_file) {
    net::udp_socket sock(endpoint{"127.0.0.1", port});
    if (!port_file.empty())
        cli::write_file(port_file, std::to_string(sock.local_endpoint().port));

    discovery::directory dir(1000.0, 3.0);
    discovery::directory_service handler(dir);
    auto t0 = steady::now();
    for (;;) {
        auto dg = sock.recv(200);
        double now_ms = ms_since(t0);
        dir.evict_stale(now_ms);
        if (!dg) continue;
        try {
            auto frame = wire::decode(dg->bytes);
            auto reply = handler.handle(frame, dg->from, now_ms);
            if (reply) sock.send_to(dg->from, wire::encode(*reply));
        } catch (const std::exception&) {
            continue;  // malformed control traffic is dropped
        }
    }
}

int cmd_serve(std::uint16_t port, const std::string& port_file, const std::string& peer_hex,
              const std::string& service_name, double compute_delay_ms,
              const std::string& directory_addr, double advertise_interval_ms) {
    peer_guid self = peer_guid::from_hex(peer_hex);
    service_id svc = service_id::from_label(service_name);
    net::udp_socket sock(endpoint{"127.0.0.1", port});
    endpoint local = sock.local_endpoint();
    if (!port_file.empty()) cli::write_file(port_file, std::to_string(local.port));

    std::optional<endpoint> directory;
    if (!directory_addr.empty()) directory = endpoint::parse(directory_addr);

    auto echo = [](std::span<const std::uint8_t> in) {
        return std::vector<std::uint8_t>(in.begin(), in.end());
    };
    std::optional<latency_distribution> compute;
    if (compute_delay_ms > 0) compute = latency_distribution::constant(compute_delay_ms);

    auto last_advertise = steady::now() - std::chrono::hours(1);
    for (;;) {
        if (directory && ms_since(last_advertise) >= advertise_interval_ms) {
            discovery::directory_entry entry{svc, self, {local}, 0.0};
            sock.send_to(*directory, wire::encode(discovery::make_advertise(entry)));
            last_advertise = steady::now();
        }
        auto dg = sock.recv(50);
        if (!dg) continue;
        wire::envelope frame;
        try {
            frame = wire::decode(dg->bytes);
        } catch (const std::exception&) {
            continue;
        }
        if (frame.type != wire::msg_type::request) continue;
        auto result = proxy::serve(frame, echo, compute, 0.0);
        if (result.compute_delay_ms > 0)
            std::this_thread::sleep_for(
                std::chrono::microseconds(static_cast<long>(result.compute_delay_ms * 1000)));
        if (result.response) sock.send_to(dg->from, wire::encode(*result.response));
    }
}

int cmd_scale(const std::string& direction, int count, const std::string& fleet_addr) {
    if (direction != "up" && direction != "down") throw user_error("direction must be up or down");
    if (count < 1) throw user_error("--count must be >= 1");
    endpoint ctrl = endpoint::parse(fleet_addr);

    wire::envelope req;
    req.type = wire::msg_type::request;
    req.service = control_service;
    req.request = new_request_id(peer_guid::from_label("scale-cli"),
                                 static_cast<std::uint64_t>(
                                     std::chrono::steady_clock::now().time_since_epoch().count()));
    json body;
    body["direction"] = direction;
    body["count"] = count;
    auto text = body.dump();
    req.payload.assign(text.begin(), text.end());

    net::udp_socket sock(endpoint{"127.0.0.1", 0});
    sock.send_to(ctrl, wire::encode(req));
    auto dg = sock.recv(2000);
    if (!dg) throw user_error("no fleet responded at " + fleet_addr);
    auto resp = wire::decode(dg->bytes);
    std::string payload(resp.payload.begin(), resp.payload.end());
    std::cout << payload << "\n";
    auto ack = json::parse(payload);
    return ack.contains("error") ? cli::exit_user_error : cli::exit_ok;
}

int cmd_demo(const std::string& config_path, std::uint64_t requests, const std::string& out_dir) {
    auto cfg = config::load_demo(config_path);
    std::string run_dir = out_dir.empty() ? "fogfleet-demo-run" : out_dir;
    fs::create_directories(run_dir);

    // metadata/reflector service
    std::string dir_port_file = run_dir + "/directory.port";
    {
        std::error_code ec;
        fs::remove(dir_port_file, ec);
    }
    pid_t directory_pid =
        spawn({self_exe(), "directory", "--port", "0", "--port-file", dir_port_file});
    endpoint directory_ep{"127.0.0.1", wait_port_file(dir_port_file)};

    local_process_provisioner provisioner(run_dir, directory_ep, cfg.service_name,
                                          cfg.compute_delay_ms);
    for (int i = 0; i < cfg.replicas; ++i) provisioner.launch();

    const peer_guid robot = peer_guid::from_label("demo/robot");
    const service_id svc = service_id::from_label(cfg.service_name);

    proxy::pending_registry registry;

    // per-request bookkeeping, filled in from worker threads
    struct req_result {
        bool delivered = false;
        bool timed_out = false;
        double latency_ms = 0;
        std::string winner;
    };
    std::vector<req_result> results(requests);

    // discovery state learned from LOOKUP_REPLY frames
    struct peer_info {
        std::vector<std::string> addresses;  // in first-seen order
        std::map<std::string, int> wins_by_address;
    };
    std::mutex peers_mu;
    std::map<std::string, peer_info> peers;          // peer hex -> info
    std::map<std::string, std::string> addr_to_peer; // endpoint -> peer hex
    std::vector<endpoint> endpoints;

    // Source address of the datagram currently being dispatched on this
    // worker thread; the registry's response sink runs synchronously inside
    // on_response and reads it to identify the winning replica.
    thread_local static std::string response_source;

    auto sink = [&](const wire::envelope& frame, const endpoint& from, std::size_t) {
        if (frame.type == wire::msg_type::response) {
            response_source = from.str();
            registry.on_response(frame);
        } else if (frame.type == wire::msg_type::lookup_reply) {
            auto entries = discovery::parse_lookup_reply(frame);
            std::lock_guard lock(peers_mu);
            endpoints.clear();
            for (const auto& e : entries) {
                auto& info = peers[e.peer.hex()];
                for (const auto& a : e.addresses) {
                    endpoints.push_back(a);
                    addr_to_peer[a.str()] = e.peer.hex();
                    if (std::find(info.addresses.begin(), info.addresses.end(), a.str()) ==
                        info.addresses.end())
                        info.addresses.push_back(a.str());
                }
            }
        }
    };

    std::vector<std::pair<std::string, endpoint>> ifaces;
    for (int i = 0; i < cfg.interfaces; ++i)
        ifaces.emplace_back("lo" + std::to_string(i), endpoint{"127.0.0.1", 0});
    net::interface_pool pool(std::move(ifaces), directory_ep, robot, sink);
    pool.wait_ready();

    proxy::replicator replicator(robot, pool, registry);
    net::timer_queue timers;

    // control endpoint for `fogfleet scale`
    net::udp_socket control(endpoint{"127.0.0.1", 0});
    {
        json ports;
        ports["directory"] = directory_ep.port;
        ports["control"] = control.local_endpoint().port;
        ports["robot_interfaces"] = json::array();
        for (const auto& b : pool.bindings()) ports["robot_interfaces"].push_back(b.local_address.str());
        cli::write_file(run_dir + "/ports.json", ports.dump(2));
    }

    auto send_lookup = [&] {
        auto frame = wire::frame_buffer::encode_envelope(discovery::make_lookup(svc));
        pool.send_from(0, directory_ep, frame);
    };

    auto handle_control = [&] {
        auto dg = control.recv(1);
        if (!dg) return;
        try {
            auto frame = wire::decode(dg->bytes);
            if (frame.type != wire::msg_type::request || frame.service != control_service) return;
            auto body = json::parse(std::string(frame.payload.begin(), frame.payload.end()));
            std::string dir_cmd = body.at("direction").get<std::string>();
            int n = body.at("count").get<int>();
            json ack;
            if (dir_cmd == "up") {
                for (int k = 0; k < n; ++k) provisioner.launch();
                ack["replicas"] = provisioner.alive_count();
            } else if (provisioner.alive_count() <= static_cast<std::size_t>(n) ||
                       provisioner.alive_count() - n < 1) {
                ack["error"] = "below-minimum";
                ack["replicas"] = provisioner.alive_count();
            } else {
                // retire the most recently added replicas first
                std::size_t killed = 0;
                for (std::size_t i = provisioner.servers().size(); i-- > 0 && killed < static_cast<std::size_t>(n);) {
                    if (provisioner.servers()[i].alive) {
                        provisioner.kill_server(i);
                        ++killed;
                    }
                }
                ack["replicas"] = provisioner.alive_count();
            }
            wire::envelope resp;
            resp.type = wire::msg_type::response;
            resp.connection = frame.connection;
            resp.request = frame.request;
            resp.service = frame.service;
            auto text = ack.dump();
            resp.payload.assign(text.begin(), text.end());
            control.send_to(dg->from, wire::encode(resp));
        } catch (const std::exception&) {
        }
    };

    // initial discovery
    for (int attempt = 0; attempt < 100; ++attempt) {
        send_lookup();
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
        std::lock_guard lock(peers_mu);
        if (!endpoints.empty()) break;
    }

    bool directory_alive = true;
    auto last_lookup = steady::now();
    std::vector<std::uint8_t> payload(cfg.payload_bytes, 0x42);

    for (std::uint64_t i = 0; i < requests; ++i) {
        for (const auto& step : cfg.script) {
            if (step.at_request != i) continue;
            if (step.action == "kill_server") {
                std::cout << "# script: kill server " << step.server << "\n";
                provisioner.kill_server(step.server);
            } else if (step.action == "relaunch_server") {
                std::cout << "# script: relaunch server " << step.server << "\n";
                provisioner.relaunch(step.server);
            } else if (step.action == "kill_directory") {
                std::cout << "# script: kill directory\n";
                kill_and_reap(directory_pid);
                directory_pid = -1;
                directory_alive = false;
            }
        }

        handle_control();
        if (directory_alive && ms_since(last_lookup) > 500) {
            send_lookup();
            last_lookup = steady::now();
        }

        std::vector<endpoint> targets;
        {
            std::lock_guard lock(peers_mu);
            targets = endpoints;
        }
        if (targets.empty()) {
            results[i].timed_out = true;
            std::cout << "req " << i << " NO_ENDPOINTS\n";
            std::this_thread::sleep_for(
                std::chrono::microseconds(static_cast<long>(cfg.request_interval_ms * 1000)));
            continue;
        }

        auto sent_at = steady::now();
        auto on_delivered = [&, i, sent_at](const wire::envelope&) {
            auto& r = results[i];
            r.delivered = true;
            r.latency_ms = ms_since(sent_at);
            r.winner = response_source;
            {
                std::lock_guard lock(peers_mu);
                auto peer_it = addr_to_peer.find(r.winner);
                if (peer_it != addr_to_peer.end())
                    ++peers[peer_it->second].wins_by_address[r.winner];
            }
            std::ostringstream line;
            line << "req " << i << " winner=" << r.winner << " latency_ms=" << r.latency_ms << "\n";
            std::cout << line.str() << std::flush;
        };
        auto on_timeout = [&results, i](const request_id&) {
            results[i].timed_out = true;
            std::cout << "req " << i << " TIMEOUT\n";
        };
        auto res = replicator.submit(svc, payload, targets, cfg.deadline_ms, on_delivered, on_timeout);
        timers.schedule_after(cfg.deadline_ms, [&registry, id = res.id] { registry.on_timeout(id); });

        std::this_thread::sleep_for(
            std::chrono::microseconds(static_cast<long>(cfg.request_interval_ms * 1000)));
    }

    // let stragglers and the final deadline settle
    std::this_thread::sleep_for(
        std::chrono::microseconds(static_cast<long>((cfg.deadline_ms + 200) * 1000)));

    auto metrics = registry.metrics();
    std::uint64_t delivered = 0, timeouts = 0;
    for (const auto& r : results) {
        delivered += r.delivered;
        timeouts += !r.delivered;
    }

    json summary;
    summary["requests"] = requests;
    summary["delivered"] = delivered;
    summary["timeouts"] = timeouts;
    summary["duplicate_drops"] = metrics.duplicate_drops;
    summary["late_drops"] = metrics.late_drops;
    summary["replicas_alive"] = provisioner.alive_count();
    {
        std::lock_guard lock(peers_mu);
        json per_peer = json::array();
        for (const auto& [hex, info] : peers) {
            json p;
            p["peer"] = hex;
            p["connection_id"] =
                make_connection_id(robot, peer_guid::from_hex(hex), svc).hex();
            p["addresses"] = info.addresses;
            p["wins_by_address"] = info.wins_by_address;
            per_peer.push_back(p);
        }
        summary["per_peer"] = per_peer;
    }
    std::string summary_text = summary.dump(2);
    cli::write_file(run_dir + "/summary.json", summary_text);
    std::cout << summary_text << "\n";

    timers.stop();
    pool.stop();
    provisioner.shutdown();
    if (directory_pid > 0) kill_and_reap(directory_pid);
    return cli::exit_ok;  // timeouts are experiment data, not command failures
}
