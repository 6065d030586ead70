#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "fogfleet/reliability.hpp"
#include "fogfleet/sim/engine.hpp"
#include "fogfleet/sim/scenario.hpp"

namespace fogfleet::report {

// trace CSV: one row per request. Path outcomes are packed into one column
// as "if<i>-><srv>:<ms>|lost_*" entries joined by ';'.
void write_trace_csv(std::ostream& out, const std::vector<sim::trace_record>& trace,
                     const sim::scenario_config& config);

// Reads back the latency/timeout columns of a trace CSV.
struct trace_row {
    std::uint64_t request_index = 0;
    double send_ms = 0;
    bool timed_out = false;
    double latency_ms = 0;  // valid when !timed_out
    std::uint64_t egress_bytes = 0;
};
std::vector<trace_row> read_trace_csv(std::istream& in);

void write_events_jsonl(std::ostream& out, const std::vector<sim::sim_event_log_entry>& events);

std::string summary_json(const sim::sim_result& result, const sim::scenario_config& config);
std::string comparison_json(const sim::comparison& cmp);
std::string comparison_table(const sim::comparison& cmp);

struct histogram_bucket {
    double lo_ms = 0;
    double hi_ms = 0;
    std::uint64_t count = 0;
};

// Fixed-width buckets over [0, max]; width chosen as max/bucket_count.
std::vector<histogram_bucket> histogram(const std::vector<double>& latencies_ms,
                                        std::size_t bucket_count);

void write_histogram_csv(std::ostream& out, const std::vector<histogram_bucket>& buckets);

// Empirical CDF sampled at each bucket edge.
void write_cdf_csv(std::ostream& out, const std::vector<double>& latencies_ms,
                   std::size_t points);

}  // namespace fogfleet::report
