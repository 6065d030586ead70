#include "fogfleet/registry.hpp"

#include <stdexcept>

namespace fogfleet::proxy {

void pending_registry::register_request(const request_id& id, double deadline_ms,
                                        std::vector<std::string> sent_to, response_sink on_response,
                                        timeout_sink on_timeout) {
    auto e = std::make_shared<entry>();
    e->deadline_ms = deadline_ms;
    e->sent_to = std::move(sent_to);
    e->response = std::move(on_response);
    e->timeout = std::move(on_timeout);
    std::lock_guard lock(mu_);
    if (entries_.contains(id) || tombstones_.contains(id))
        throw std::logic_error("pending_registry: duplicate request id " + id.hex());
    entries_.emplace(id, std::move(e));
}

response_outcome pending_registry::on_response(const wire::envelope& response) {
    const request_id& id = response.request;
    std::shared_ptr<entry> e;
    {
        std::lock_guard lock(mu_);
        auto it = entries_.find(id);
        if (it == entries_.end()) {
            auto ts = tombstones_.find(id);
            if (ts == tombstones_.end()) {
                unknown_drops_.fetch_add(1, std::memory_order_relaxed);
                return response_outcome::dropped_unknown;
            }
            if (ts->second == entry_state::timed_out) {
                late_drops_.fetch_add(1, std::memory_order_relaxed);
                return response_outcome::dropped_late;
            }
            duplicate_drops_.fetch_add(1, std::memory_order_relaxed);
            return response_outcome::dropped_duplicate;
        }
        e = it->second;
    }

    entry_state expected = entry_state::pending;
    if (!e->state.compare_exchange_strong(expected, entry_state::completed)) {
        // Lost the race against another replica's response or the timer.
        if (expected == entry_state::timed_out) {
            late_drops_.fetch_add(1, std::memory_order_relaxed);
            return response_outcome::dropped_late;
        }
        duplicate_drops_.fetch_add(1, std::memory_order_relaxed);
        return response_outcome::dropped_duplicate;
    }

    if (e->response) e->response(response);
    retire(id, entry_state::completed);
    delivered_.fetch_add(1, std::memory_order_relaxed);
    return response_outcome::delivered;
}

timeout_outcome pending_registry::on_timeout(const request_id& id) {
    std::shared_ptr<entry> e;
    {
        std::lock_guard lock(mu_);
        auto it = entries_.find(id);
        if (it == entries_.end()) return timeout_outcome::already_completed;
        e = it->second;
    }

    entry_state expected = entry_state::pending;
    if (!e->state.compare_exchange_strong(expected, entry_state::timed_out))
        return timeout_outcome::already_completed;

    if (e->timeout) e->timeout(id);
    retire(id, entry_state::timed_out);
    timeouts_.fetch_add(1, std::memory_order_relaxed);
    return timeout_outcome::timed_out;
}

std::size_t pending_registry::pending_count() const {
    std::lock_guard lock(mu_);
    return entries_.size();
}

registry_metrics pending_registry::metrics() const {
    registry_metrics m;
    m.delivered = delivered_.load(std::memory_order_relaxed);
    m.duplicate_drops = duplicate_drops_.load(std::memory_order_relaxed);
    m.late_drops = late_drops_.load(std::memory_order_relaxed);
    m.unknown_drops = unknown_drops_.load(std::memory_order_relaxed);
    m.timeouts = timeouts_.load(std::memory_order_relaxed);
    return m;
}

// Remove the live entry and record the tombstone in one critical section so
// a racing lookup never observes the id as fully unknown.
void pending_registry::retire(const request_id& id, entry_state terminal) {
    std::lock_guard lock(mu_);
    entries_.erase(id);
    if (tombstones_.emplace(id, terminal).second) {
        tombstone_order_.push_back(id);
        while (tombstone_order_.size() > tombstone_capacity_) {
            tombstones_.erase(tombstone_order_.front());
            tombstone_order_.pop_front();
        }
    }
}

std::string to_string(response_outcome o) {
    switch (o) {
        case response_outcome::delivered: return "delivered";
        case response_outcome::dropped_duplicate: return "dropped_duplicate";
        case response_outcome::dropped_late: return "dropped_late";
        case response_outcome::dropped_unknown: return "dropped_unknown";
    }
    return "?";
}

}  // namespace fogfleet::proxy
