#pragma once

#include <span>
#include <vector>

#include "fogfleet/latency_distribution.hpp"

namespace fogfleet::reliability {

// Availability model of one preemptible machine. Durations in seconds.
struct failure_model {
    double mean_uptime_s = 0;
    double recovery_time_s = 0;
};

struct latency_summary {
    std::size_t count = 0;
    double mean_ms = 0;
    double p50_ms = 0;
    double p99_ms = 0;
    double max_ms = 0;
};

// P(VM down at a random instant) = recovery / (uptime + recovery).
double vm_failure_probability(const failure_model& model);

// All replicas down simultaneously: product of per-VM probabilities.
// An empty pool is always failed, so the empty product is 1.
double system_failure_probability(std::span<const double> per_vm);

// Smallest N with p_vm^N <= p_target; at least 1.
int required_replicas(double p_vm, double p_target);

// All paths miss the deadline: product of per-path miss probabilities.
double deadline_miss_probability(std::span<const double> path_misses);

// First-response latency over independent paths: P(min <= t) = 1 - prod(1 - F_i(t)).
double min_latency_cdf(std::span<const latency_distribution> paths, double t_ms);

// Nearest-rank percentile, q in (0, 100]. No interpolation.
double percentile(std::span<const double> samples_ms, double q);

latency_summary summarize(std::span<const double> samples_ms);

}  // namespace fogfleet::reliability
