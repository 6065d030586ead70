#pragma once

#include <atomic>
#include <condition_variable>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <queue>
#include <thread>
#include <vector>

#include "fogfleet/endpoint.hpp"
#include "fogfleet/proxy.hpp"
#include "fogfleet/wire.hpp"

namespace fogfleet::net {

// Thin RAII wrapper over an IPv4 UDP socket. One frame per datagram.
class udp_socket {
public:
    udp_socket();
    explicit udp_socket(const endpoint& bind_addr);
    ~udp_socket();

    udp_socket(udp_socket&&) noexcept;
    udp_socket& operator=(udp_socket&&) noexcept;
    udp_socket(const udp_socket&) = delete;
    udp_socket& operator=(const udp_socket&) = delete;

    endpoint local_endpoint() const;
    void send_to(const endpoint& dest, std::span<const std::uint8_t> bytes);

    struct datagram {
        std::vector<std::uint8_t> bytes;
        endpoint from;
    };
    // Blocks up to timeout_ms; nullopt on timeout.
    std::optional<datagram> recv(int timeout_ms);

    void close();
    bool valid() const { return fd_ >= 0; }

private:
    int fd_ = -1;
};

enum class binding_status { probing, active, failed };

struct interface_binding {
    std::string name;
    endpoint local_address;
    std::optional<endpoint> reflected_address;
    binding_status status = binding_status::probing;
};

struct interface_pool_options {
    double probe_window_ms = 2000;   // give up on the reflector after this
    double probe_interval_ms = 100;  // ADDR_REFLECT retry cadence
};

// One socket and one worker thread per robot interface. Each worker probes
// the reflector for its cloud-visible address, then receives frames
// independently of its siblings: a stalled or failed worker never blocks the
// others.
class interface_pool : public proxy::transport {
public:
    // frame sink runs on the owning worker's thread
    using frame_sink =
        std::function<void(const wire::envelope&, const endpoint& from, std::size_t iface_idx)>;

    interface_pool(std::vector<std::pair<std::string, endpoint>> interfaces,
                   const endpoint& reflector, const peer_guid& self, frame_sink sink,
                   interface_pool_options options = {});
    ~interface_pool() override;

    // Waits until every binding leaves the probing state.
    // Throws when no binding survives.
    void wait_ready();

    std::vector<interface_binding> bindings() const;
    std::size_t active_count() const;

    // proxy::transport: round-robins sends across active bindings.
    void send(const endpoint& dest, const wire::frame_buffer& frame) override;

    // Pin a transmission to a specific interface.
    void send_from(std::size_t iface_idx, const endpoint& dest, const wire::frame_buffer& frame);

    void stop();

private:
    struct worker;
    void run_worker(worker& w);

    std::vector<std::unique_ptr<worker>> workers_;
    interface_pool_options options_;
    endpoint reflector_;
    peer_guid self_;
    frame_sink sink_;
    std::atomic<bool> stopping_{false};
    std::atomic<std::size_t> rr_counter_{0};
};

// Wall-clock timer source for request deadlines in real-socket mode.
class timer_queue {
public:
    timer_queue();
    ~timer_queue();

    void schedule_after(double delay_ms, std::function<void()> fn);
    void stop();

private:
    void run();

    struct entry {
        std::chrono::steady_clock::time_point when;
        std::uint64_t seq;
        std::function<void()> fn;
        bool operator>(const entry& other) const {
            return when != other.when ? when > other.when : seq > other.seq;
        }
    };

    std::priority_queue<entry, std::vector<entry>, std::greater<>> heap_;
    std::mutex mu_;
    std::condition_variable cv_;
    std::uint64_t next_seq_ = 0;
    bool stopping_ = false;
    std::thread thread_;
};

}  // namespace fogfleet::net
