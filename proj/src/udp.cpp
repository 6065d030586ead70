#include "fogfleet/udp.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <sys/time.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <stdexcept>

#include "fogfleet/discovery.hpp"

namespace fogfleet::net {

namespace {

sockaddr_in to_sockaddr(const endpoint& ep) {
    sockaddr_in sa{};
    sa.sin_family = AF_INET;
    sa.sin_port = htons(ep.port);
    if (inet_pton(AF_INET, ep.host.c_str(), &sa.sin_addr) != 1)
        throw std::invalid_argument("udp: not an IPv4 address: " + ep.host);
    return sa;
}

endpoint from_sockaddr(const sockaddr_in& sa) {
    char buf[INET_ADDRSTRLEN] = {};
    inet_ntop(AF_INET, &sa.sin_addr, buf, sizeof buf);
    return endpoint{buf, ntohs(sa.sin_port)};
}

}  // namespace

udp_socket::udp_socket() {
    fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
    if (fd_ < 0) throw std::runtime_error(std::string("udp: socket(): ") + std::strerror(errno));
}

udp_socket::udp_socket(const endpoint& bind_addr) : udp_socket() {
    sockaddr_in sa = to_sockaddr(bind_addr);
    if (::bind(fd_, reinterpret_cast<sockaddr*>(&sa), sizeof sa) != 0) {
        int err = errno;
        close();
        throw std::runtime_error("udp: bind(" + bind_addr.str() + "): " + std::strerror(err));
    }
}

udp_socket::~udp_socket() { close(); }

udp_socket::udp_socket(udp_socket&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }

udp_socket& udp_socket::operator=(udp_socket&& other) noexcept {
    if (this != &other) {
        close();
        fd_ = other.fd_;
        other.fd_ = -1;
    }
    return *this;
}

void udp_socket::close() {
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
}

endpoint udp_socket::local_endpoint() const {
    sockaddr_in sa{};
    socklen_t len = sizeof sa;
    if (::getsockname(fd_, reinterpret_cast<sockaddr*>(&sa), &len) != 0)
        throw std::runtime_error(std::string("udp: getsockname(): ") + std::strerror(errno));
    return from_sockaddr(sa);
}

void udp_socket::send_to(const endpoint& dest, std::span<const std::uint8_t> bytes) {
    sockaddr_in sa = to_sockaddr(dest);
    ssize_t n = ::sendto(fd_, bytes.data(), bytes.size(), 0, reinterpret_cast<sockaddr*>(&sa),
                         sizeof sa);
    if (n < 0) throw std::runtime_error(std::string("udp: sendto(): ") + std::strerror(errno));
}

std::optional<udp_socket::datagram> udp_socket::recv(int timeout_ms) {
    timeval tv{};
    tv.tv_sec = timeout_ms / 1000;
    tv.tv_usec = (timeout_ms % 1000) * 1000;
    ::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);

    std::vector<std::uint8_t> buf(wire::header_bytes + wire::max_payload_bytes);
    sockaddr_in sa{};
    socklen_t len = sizeof sa;
    ssize_t n = ::recvfrom(fd_, buf.data(), buf.size(), 0, reinterpret_cast<sockaddr*>(&sa), &len);
    if (n < 0) {
        if (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR) return std::nullopt;
        if (errno == EBADF) return std::nullopt;  // closed under us during shutdown
        throw std::runtime_error(std::string("udp: recvfrom(): ") + std::strerror(errno));
    }
    buf.resize(static_cast<std::size_t>(n));
    return datagram{std::move(buf), from_sockaddr(sa)};
}

struct interface_pool::worker {
    std::string name;
    udp_socket socket;
    std::thread thread;
    mutable std::mutex mu;
    interface_binding binding;

    worker(std::string n, const endpoint& bind_addr) : name(std::move(n)), socket(bind_addr) {
        binding.name = name;
        binding.local_address = socket.local_endpoint();
        binding.status = binding_status::probing;
    }
};

interface_pool::interface_pool(std::vector<std::pair<std::string, endpoint>> interfaces,
                               const endpoint& reflector, const peer_guid& self, frame_sink sink,
                               interface_pool_options options)
    : options_(options), reflector_(reflector), self_(self), sink_(std::move(sink)) {
    if (interfaces.empty()) throw std::invalid_argument("interface_pool: no interfaces");
    for (auto& [name, addr] : interfaces)
        workers_.push_back(std::make_unique<worker>(name, addr));
    for (auto& w : workers_) {
        worker* raw = w.get();
        raw->thread = std::thread([this, raw] { run_worker(*raw); });
    }
}

interface_pool::~interface_pool() { stop(); }

void interface_pool::stop() {
    stopping_.store(true);
    for (auto& w : workers_) {
        if (w->thread.joinable()) w->thread.join();
        w->socket.close();
    }
}

void interface_pool::run_worker(worker& w) {
    using clock = std::chrono::steady_clock;
    auto probe_deadline =
        clock::now() + std::chrono::milliseconds(static_cast<int>(options_.probe_window_ms));
    auto next_probe = clock::now();

    // Probe phase: learn the reflected address or mark the binding failed.
    while (!stopping_.load()) {
        {
            std::lock_guard lock(w.mu);
            if (w.binding.status != binding_status::probing) break;
        }
        if (clock::now() >= probe_deadline) {
            std::lock_guard lock(w.mu);
            w.binding.status = binding_status::failed;
            break;
        }
        if (clock::now() >= next_probe) {
            try {
                auto probe = wire::encode(discovery::make_addr_reflect(self_));
                w.socket.send_to(reflector_, probe);
            } catch (const std::exception&) {
                // unreachable reflector address counts against the window
            }
            next_probe =
                clock::now() + std::chrono::milliseconds(static_cast<int>(options_.probe_interval_ms));
        }
        auto dg = w.socket.recv(20);
        if (!dg) continue;
        try {
            auto e = wire::decode(dg->bytes);
            if (e.type == wire::msg_type::addr_reply) {
                std::lock_guard lock(w.mu);
                w.binding.reflected_address = discovery::parse_addr_reply(e);
                w.binding.status = binding_status::active;
            }
        } catch (const std::exception&) {
            // not ours; keep probing
        }
    }

    // Receive phase.
    while (!stopping_.load()) {
        {
            std::lock_guard lock(w.mu);
            if (w.binding.status != binding_status::active) return;
        }
        auto dg = w.socket.recv(50);
        if (!dg) continue;
        wire::envelope e;
        try {
            e = wire::decode(dg->bytes);
        } catch (const std::exception&) {
            continue;  // malformed datagrams are dropped
        }
        if (sink_) {
            std::size_t idx = 0;
            for (; idx < workers_.size(); ++idx)
                if (workers_[idx].get() == &w) break;
            sink_(e, dg->from, idx);
        }
    }
}

void interface_pool::wait_ready() {
    using clock = std::chrono::steady_clock;
    auto hard_stop = clock::now() +
                     std::chrono::milliseconds(static_cast<int>(options_.probe_window_ms * 2 + 1000));
    while (clock::now() < hard_stop) {
        bool probing = false;
        for (const auto& w : workers_) {
            std::lock_guard lock(w->mu);
            if (w->binding.status == binding_status::probing) probing = true;
        }
        if (!probing) break;
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    if (active_count() == 0) throw std::runtime_error("interface_pool: all interfaces failed");
}

std::vector<interface_binding> interface_pool::bindings() const {
    std::vector<interface_binding> out;
    for (const auto& w : workers_) {
        std::lock_guard lock(w->mu);
        out.push_back(w->binding);
    }
    return out;
}

std::size_t interface_pool::active_count() const {
    std::size_t n = 0;
    for (const auto& w : workers_) {
        std::lock_guard lock(w->mu);
        n += (w->binding.status == binding_status::active);
    }
    return n;
}

void interface_pool::send(const endpoint& dest, const wire::frame_buffer& frame) {
    // Spread replica transmissions across the active interfaces.
    std::size_t n = workers_.size();
    std::size_t start = rr_counter_.fetch_add(1);
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t idx = (start + k) % n;
        {
            std::lock_guard lock(workers_[idx]->mu);
            if (workers_[idx]->binding.status != binding_status::active) continue;
        }
        workers_[idx]->socket.send_to(dest, frame.bytes());
        return;
    }
    throw std::runtime_error("interface_pool: no active interface to send from");
}

void interface_pool::send_from(std::size_t iface_idx, const endpoint& dest,
                               const wire::frame_buffer& frame) {
    if (iface_idx >= workers_.size()) throw std::out_of_range("interface_pool: bad interface index");
    workers_[iface_idx]->socket.send_to(dest, frame.bytes());
}

timer_queue::timer_queue() : thread_([this] { run(); }) {}

timer_queue::~timer_queue() { stop(); }

void timer_queue::stop() {
    {
        std::lock_guard lock(mu_);
        if (stopping_) return;
        stopping_ = true;
    }
    cv_.notify_all();
    if (thread_.joinable()) thread_.join();
}

void timer_queue::schedule_after(double delay_ms, std::function<void()> fn) {
    auto when = std::chrono::steady_clock::now() +
                std::chrono::microseconds(static_cast<std::int64_t>(delay_ms * 1000));
    {
        std::lock_guard lock(mu_);
        heap_.push(entry{when, next_seq_++, std::move(fn)});
    }
    cv_.notify_all();
}

void timer_queue::run() {
    std::unique_lock lock(mu_);
    while (!stopping_) {
        if (heap_.empty()) {
            cv_.wait(lock, [this] { return stopping_ || !heap_.empty(); });
            continue;
        }
        auto when = heap_.top().when;
        if (cv_.wait_until(lock, when, [this, when] {
                return stopping_ || (!heap_.empty() && heap_.top().when < when);
            }))
            continue;
        if (heap_.empty() || heap_.top().when > std::chrono::steady_clock::now()) continue;
        auto fn = heap_.top().fn;
        heap_.pop();
        lock.unlock();
        fn();
        lock.lock();
    }
}

}  // namespace fogfleet::net
