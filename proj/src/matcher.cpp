#include "fogfleet/matcher.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace fogfleet::matcher {

long cost_matrix::total_capacity() const {
    if (capacities.empty()) return static_cast<long>(n);
    return std::accumulate(capacities.begin(), capacities.end(), 0L);
}

void cost_matrix::validate() const {
    if (m < 1 || n < 1) throw std::invalid_argument("cost_matrix: m and n must be >= 1");
    if (eps.size() != m * n) throw std::invalid_argument("cost_matrix: eps size must be m*n");
    for (double e : eps)
        if (!(e >= 0.0 && e <= 1.0))
            throw std::invalid_argument("cost_matrix: every eps must be in [0,1]");
    if (!capacities.empty()) {
        if (capacities.size() != n)
            throw std::invalid_argument("cost_matrix: capacities length must equal n");
        for (int c : capacities)
            if (c < 0) throw std::invalid_argument("cost_matrix: capacities must be >= 0");
    }
}

void path_sample_set::validate() const {
    if (interfaces < 1 || servers < 1)
        throw std::invalid_argument("path_sample_set: need >= 1 interface and server");
    if (network_ms.size() != interfaces * servers)
        throw std::invalid_argument("path_sample_set: network_ms must have interfaces*servers lists");
    if (compute_ms.size() != servers)
        throw std::invalid_argument("path_sample_set: compute_ms must have one list per server");
    if (!(deadline_ms > 0)) throw std::invalid_argument("path_sample_set: deadline must be > 0");
    for (const auto& l : network_ms) {
        if (l.empty()) throw std::invalid_argument("path_sample_set: empty network sample list");
        for (double v : l)
            if (!(v >= 0)) throw std::invalid_argument("path_sample_set: samples must be >= 0");
    }
    for (const auto& l : compute_ms) {
        if (l.empty()) throw std::invalid_argument("path_sample_set: empty compute sample list");
        for (double v : l)
            if (!(v >= 0)) throw std::invalid_argument("path_sample_set: samples must be >= 0");
    }
}

cost_matrix estimate_costs(const path_sample_set& samples) {
    samples.validate();
    cost_matrix costs;
    costs.m = samples.interfaces;
    costs.n = samples.servers;
    costs.eps.resize(costs.m * costs.n);
    costs.capacities.assign(costs.n, 1);
    for (std::size_t i = 0; i < costs.m; ++i) {
        for (std::size_t j = 0; j < costs.n; ++j) {
            const auto& net = samples.network_ms[i * costs.n + j];
            const auto& comp = samples.compute_ms[j];
            std::size_t misses = 0;
            for (double a : net)
                for (double b : comp) misses += (a + b > samples.deadline_ms);
            costs.eps[i * costs.n + j] =
                static_cast<double>(misses) / static_cast<double>(net.size() * comp.size());
        }
    }
    return costs;
}

namespace {

double edge_cost(const cost_matrix& costs, std::size_t i, std::size_t j, objective_mode mode) {
    double e = costs.at(i, j);
    if (mode == objective_mode::sum) return e;
    return std::log(std::max(e, log_mode_eps_floor));
}

// Compare partial prefixes under the flattened-binary-matrix order.
// Returns <0 if a is lex-smaller, >0 if larger, 0 if equal so far.
int lex_compare_prefix(const std::vector<int>& a, const std::vector<int>& b, std::size_t rows) {
    for (std::size_t i = 0; i < rows; ++i) {
        if (a[i] != b[i]) return a[i] > b[i] ? -1 : 1;  // higher column = smaller string
    }
    return 0;
}

struct search_state {
    const cost_matrix& costs;
    objective_mode mode;
    std::vector<double> row_min;        // greedy per-row lower bound
    std::vector<double> tail_min;       // suffix sums of row_min
    std::vector<int> remaining_cap;
    std::vector<int> current;
    std::vector<int> best;
    double best_cost = std::numeric_limits<double>::infinity();
    bool have_best = false;
    std::vector<std::size_t> column_order;  // per-row candidate order, flattened
};

void search(search_state& st, std::size_t row, double cost_so_far) {
    const std::size_t m = st.costs.m, n = st.costs.n;
    if (row == m) {
        if (!st.have_best || cost_so_far < st.best_cost ||
            (cost_so_far == st.best_cost &&
             lex_compare_prefix(st.current, st.best, m) < 0)) {
            st.best = st.current;
            st.best_cost = cost_so_far;
            st.have_best = true;
        }
        return;
    }
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t j = st.column_order[row * n + k];
        if (st.remaining_cap[j] == 0) continue;
        double c = cost_so_far + edge_cost(st.costs, row, j, st.mode);
        double bound = c + st.tail_min[row + 1];
        if (st.have_best) {
            if (bound > st.best_cost) continue;
            if (bound == st.best_cost) {
                // Equal-cost completions can only win on lex order; give up as
                // soon as the prefix is already lex-greater-or-equal with no
                // strictly smaller continuation possible.
                st.current[row] = static_cast<int>(j);
                int cmp = lex_compare_prefix(st.current, st.best, row + 1);
                if (cmp > 0) continue;
            }
        }
        st.current[row] = static_cast<int>(j);
        --st.remaining_cap[j];
        search(st, row + 1, c);
        ++st.remaining_cap[j];
        st.current[row] = -1;
    }
}

}  // namespace

double objective(const cost_matrix& costs, const assignment& a, objective_mode mode) {
    if (a.server_of.size() != costs.m)
        throw std::invalid_argument("objective: assignment rows != cost matrix rows");
    double total = 0;
    for (std::size_t i = 0; i < costs.m; ++i) {
        int j = a.server_of[i];
        if (j < 0 || static_cast<std::size_t>(j) >= costs.n)
            throw std::invalid_argument("objective: assignment column out of range");
        total += edge_cost(costs, i, static_cast<std::size_t>(j), mode);
    }
    return total;
}

bool lex_before(const assignment& a, const assignment& b) {
    if (a.server_of.size() != b.server_of.size())
        throw std::invalid_argument("lex_before: size mismatch");
    return lex_compare_prefix(a.server_of, b.server_of, a.server_of.size()) < 0;
}

assignment solve(const cost_matrix& costs, objective_mode mode) {
    costs.validate();
    if (static_cast<long>(costs.m) > costs.total_capacity())
        throw std::runtime_error("matcher: infeasible, interfaces exceed total server capacity");

    search_state st{costs, mode, {}, {}, {}, {}, {}};
    st.row_min.resize(costs.m);
    st.tail_min.assign(costs.m + 1, 0.0);
    st.remaining_cap.resize(costs.n);
    for (std::size_t j = 0; j < costs.n; ++j) st.remaining_cap[j] = costs.capacity(j);
    for (std::size_t i = 0; i < costs.m; ++i) {
        double mn = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < costs.n; ++j)
            mn = std::min(mn, edge_cost(costs, i, j, mode));
        st.row_min[i] = mn;
    }
    for (std::size_t i = costs.m; i-- > 0;) st.tail_min[i] = st.tail_min[i + 1] + st.row_min[i];

    // Candidate order: cheap columns first; among equal costs the higher
    // column index first, so the lex-preferred candidate is found early.
    st.column_order.resize(costs.m * costs.n);
    for (std::size_t i = 0; i < costs.m; ++i) {
        auto* row = &st.column_order[i * costs.n];
        for (std::size_t j = 0; j < costs.n; ++j) row[j] = j;
        std::sort(row, row + costs.n, [&](std::size_t a, std::size_t b) {
            double ca = edge_cost(costs, i, a, mode), cb = edge_cost(costs, i, b, mode);
            if (ca != cb) return ca < cb;
            return a > b;
        });
    }

    st.current.assign(costs.m, -1);
    search(st, 0, 0.0);
    if (!st.have_best) throw std::runtime_error("matcher: no feasible assignment found");
    return assignment{st.best};
}

assignment rematch(const assignment& previous, const cost_matrix& fresh_costs, double hysteresis,
                   objective_mode mode) {
    if (hysteresis < 0) throw std::invalid_argument("rematch: hysteresis must be >= 0");
    fresh_costs.validate();
    if (previous.server_of.size() != fresh_costs.m)
        throw std::invalid_argument("rematch: previous assignment does not match fresh dimensions");
    for (int j : previous.server_of)
        if (j < 0 || static_cast<std::size_t>(j) >= fresh_costs.n)
            throw std::invalid_argument("rematch: previous assignment does not match fresh dimensions");

    assignment fresh = solve(fresh_costs, mode);
    double previous_obj = objective(fresh_costs, previous, mode);
    double fresh_obj = objective(fresh_costs, fresh, mode);
    double improvement = previous_obj - fresh_obj;
    if (improvement < hysteresis) return previous;
    return fresh;
}

}  // namespace fogfleet::matcher
