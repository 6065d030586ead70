#pragma once

#include <cstddef>
#include <vector>

namespace fogfleet::matcher {

// Per-pair deadline-miss probabilities for m interfaces x n servers, plus
// per-server connection capacities (all 1 unless configured otherwise).
struct cost_matrix {
    std::size_t m = 0;
    std::size_t n = 0;
    std::vector<double> eps;        // row-major, m*n entries in [0,1]
    std::vector<int> capacities;    // length n; empty means all 1

    double at(std::size_t i, std::size_t j) const { return eps[i * n + j]; }
    int capacity(std::size_t j) const { return capacities.empty() ? 1 : capacities[j]; }
    long total_capacity() const;
    void validate() const;
};

// One server per interface; column loads stay within capacity.
struct assignment {
    std::vector<int> server_of;  // server_of[i] = column assigned to row i

    bool operator==(const assignment&) const = default;
};

enum class objective_mode {
    sum,          // minimize sum of selected eps (the printed objective)
    log_product,  // minimize sum of log(eps): the joint miss product
};

// eps floor applied before log() in log_product mode.
inline constexpr double log_mode_eps_floor = 1e-12;

// Raw profiling data: per-pair network round trips and per-server compute
// times, measured separately so only the network side needs permuting.
struct path_sample_set {
    std::size_t interfaces = 0;
    std::size_t servers = 0;
    std::vector<std::vector<double>> network_ms;  // interfaces*servers, row-major
    std::vector<std::vector<double>> compute_ms;  // one list per server
    double deadline_ms = 0;

    void validate() const;
};

// eps_ij = fraction of (network sample + compute sample) pairs, over the full
// cross product, whose sum exceeds the deadline.
cost_matrix estimate_costs(const path_sample_set& samples);

double objective(const cost_matrix& costs, const assignment& a, objective_mode mode);

// True when a's flattened binary matrix is lexicographically smaller than
// b's: within a row the 1 bit sits at position (row*n + col), so the later
// the column, the smaller the flattened string.
bool lex_before(const assignment& a, const assignment& b);

// Exactly optimal assignment under the configured objective; ties broken by
// the lexicographically smallest flattened binary matrix. Branch-and-bound
// over injective-within-capacity assignments with a greedy row-minimum bound.
assignment solve(const cost_matrix& costs, objective_mode mode = objective_mode::sum);

// Fresh optimum, unless it improves on the previous assignment's objective
// (under the fresh costs) by less than `hysteresis` -- then the previous
// assignment is kept to avoid flapping.
assignment rematch(const assignment& previous, const cost_matrix& fresh_costs, double hysteresis,
                   objective_mode mode = objective_mode::sum);

}  // namespace fogfleet::matcher
