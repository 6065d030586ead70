#pragma once

#include <atomic>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "fogfleet/bytes.hpp"
#include "fogfleet/wire.hpp"

namespace fogfleet::proxy {

enum class response_outcome {
    delivered,           // first response for a pending request
    dropped_duplicate,   // request already completed by an earlier replica
    dropped_late,        // request already timed out
    dropped_unknown,     // no record of this request id
};

enum class timeout_outcome {
    timed_out,
    already_completed,  // entry reached a terminal state before the timer
};

struct registry_metrics {
    std::uint64_t delivered = 0;
    std::uint64_t duplicate_drops = 0;
    std::uint64_t late_drops = 0;
    std::uint64_t unknown_drops = 0;
    std::uint64_t timeouts = 0;
};

// Robot-side table of in-flight request ids. Safe for concurrent mutation
// from interface workers and the timer source; the pending -> terminal
// transition is a compare-and-swap, so exactly one of the response sink and
// the timeout sink fires, exactly once, per request. Terminal entries are
// removed once their callback has run; a bounded tombstone log keeps the
// terminal kind around so late responses are classified as duplicate/late
// drops rather than unknown.
class pending_registry {
public:
    using response_sink = std::function<void(const wire::envelope&)>;
    using timeout_sink = std::function<void(const request_id&)>;

    explicit pending_registry(std::size_t tombstone_capacity = 1 << 16)
        : tombstone_capacity_(tombstone_capacity) {}

    // Throws if the id is already registered (programming error upstream).
    void register_request(const request_id& id, double deadline_ms, std::vector<std::string> sent_to,
                          response_sink on_response, timeout_sink on_timeout);

    response_outcome on_response(const wire::envelope& response);
    timeout_outcome on_timeout(const request_id& id);

    std::size_t pending_count() const;
    registry_metrics metrics() const;

private:
    enum class entry_state : std::uint8_t { pending, completed, timed_out };

    struct entry {
        double deadline_ms = 0;
        std::atomic<entry_state> state{entry_state::pending};
        std::vector<std::string> sent_to;
        response_sink response;
        timeout_sink timeout;
    };

    void retire(const request_id& id, entry_state terminal);

    mutable std::mutex mu_;
    std::unordered_map<request_id, std::shared_ptr<entry>, byte_id_hash<16>> entries_;
    std::unordered_map<request_id, entry_state, byte_id_hash<16>> tombstones_;
    std::deque<request_id> tombstone_order_;
    std::size_t tombstone_capacity_;

    std::atomic<std::uint64_t> delivered_{0};
    std::atomic<std::uint64_t> duplicate_drops_{0};
    std::atomic<std::uint64_t> late_drops_{0};
    std::atomic<std::uint64_t> unknown_drops_{0};
    std::atomic<std::uint64_t> timeouts_{0};
};

std::string to_string(response_outcome o);

}  // namespace fogfleet::proxy
