#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <stdexcept>
#include <vector>

namespace fogfleet::sim {

// Single-threaded discrete-event loop. Ties on time resolve by insertion
// order, which makes runs reproducible.
class event_queue {
public:
    using handler = std::function<void()>;

    void at(double t_ms, handler fn) {
        if (t_ms < now_ms_) throw std::logic_error("event_queue: scheduling into the past");
        heap_.push(item{t_ms, next_seq_++, std::move(fn)});
    }

    void after(double delay_ms, handler fn) { at(now_ms_ + delay_ms, std::move(fn)); }

    bool step() {
        if (heap_.empty()) return false;
        item it = heap_.top();
        heap_.pop();
        now_ms_ = it.t_ms;
        it.fn();
        return true;
    }

    void run() {
        while (step()) {
        }
    }

    void run_until(double t_ms) {
        while (!heap_.empty() && heap_.top().t_ms <= t_ms) step();
        now_ms_ = std::max(now_ms_, t_ms);
    }

    double now_ms() const { return now_ms_; }
    std::size_t size() const { return heap_.size(); }

private:
    struct item {
        double t_ms;
        std::uint64_t seq;
        handler fn;
    };
    struct later {
        bool operator()(const item& a, const item& b) const {
            if (a.t_ms != b.t_ms) return a.t_ms > b.t_ms;
            return a.seq > b.seq;
        }
    };

    std::priority_queue<item, std::vector<item>, later> heap_;
    std::uint64_t next_seq_ = 0;
    double now_ms_ = 0;
};

}  // namespace fogfleet::sim
