#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <optional>

#include "fogfleet/matcher.hpp"
#include "test_util.hpp"

using namespace fogfleet::matcher;

namespace {

// Independent oracle: enumerate every feasible assignment recursively.
// Costs summed in row order, ties broken by the flattened-binary-matrix
// rule (within a row, a later column is lexicographically smaller).
struct brute_force {
    const cost_matrix& costs;
    objective_mode mode;
    std::vector<int> current;
    std::vector<int> caps;
    std::optional<assignment> best;
    double best_cost = 0;

    double edge(std::size_t i, std::size_t j) const {
        double e = costs.at(i, j);
        return mode == objective_mode::sum ? e : std::log(std::max(e, log_mode_eps_floor));
    }

    static bool lex_smaller(const std::vector<int>& a, const std::vector<int>& b) {
        for (std::size_t i = 0; i < a.size(); ++i)
            if (a[i] != b[i]) return a[i] > b[i];
        return false;
    }

    void recurse(std::size_t row, double cost) {
        if (row == costs.m) {
            if (!best || cost < best_cost ||
                (cost == best_cost && lex_smaller(current, best->server_of))) {
                best = assignment{current};
                best_cost = cost;
            }
            return;
        }
        for (std::size_t j = 0; j < costs.n; ++j) {
            if (caps[j] == 0) continue;
            --caps[j];
            current[row] = static_cast<int>(j);
            recurse(row + 1, cost + edge(row, j));
            ++caps[j];
        }
    }

    std::pair<assignment, double> solve() {
        current.assign(costs.m, -1);
        caps.resize(costs.n);
        for (std::size_t j = 0; j < costs.n; ++j) caps[j] = costs.capacity(j);
        recurse(0, 0.0);
        REQUIRE(best.has_value());
        return {*best, best_cost};
    }
};

cost_matrix make_costs(std::size_t m, std::size_t n, std::vector<double> eps,
                       std::vector<int> caps = {}) {
    cost_matrix c;
    c.m = m;
    c.n = n;
    c.eps = std::move(eps);
    c.capacities = std::move(caps);
    return c;
}

}  // namespace

TEST_CASE("solve: forced single pair") {
    auto costs = make_costs(1, 1, {0.3});
    auto a = solve(costs);
    CHECK(a.server_of == std::vector<int>{0});
    CHECK(objective(costs, a, objective_mode::sum) == 0.3);
}

TEST_CASE("solve: 2x2 diagonal") {
    auto costs = make_costs(2, 2, {0.1, 0.9, 0.9, 0.1}, {1, 1});
    auto a = solve(costs);
    CHECK(a.server_of == std::vector<int>{0, 1});
    CHECK(objective(costs, a, objective_mode::sum) == doctest::Approx(0.2).epsilon(1e-15));
}

TEST_CASE("solve: 2x3, checked against enumerating all 6 injective assignments") {
    auto costs = make_costs(2, 3, {0.5, 0.2, 0.9, 0.4, 0.3, 0.8}, {1, 1, 1});
    auto a = solve(costs);
    CHECK(a.server_of == std::vector<int>{1, 0});
    CHECK(objective(costs, a, objective_mode::sum) == doctest::Approx(0.6).epsilon(1e-15));
    auto [oracle, oracle_cost] = brute_force{costs, objective_mode::sum}.solve();
    CHECK(a == oracle);
}

TEST_CASE("solve: errors") {
    CHECK_THROWS(solve(make_costs(3, 2, {0.1, 0.2, 0.3, 0.4, 0.5, 0.6}, {1, 1})));  // infeasible
    CHECK_THROWS_AS(solve(make_costs(1, 2, {0.5, 1.2})), std::invalid_argument);    // eps > 1
    CHECK_THROWS_AS(solve(make_costs(0, 0, {})), std::invalid_argument);
    // capacity > 1 restores feasibility
    auto c = make_costs(3, 2, {0.1, 0.2, 0.3, 0.4, 0.5, 0.6}, {2, 1});
    auto a = solve(c);
    CHECK(a.server_of.size() == 3);
}

TEST_CASE("solve equals brute force on small grids and random instances") {
    test_rng rng(404);
    for (std::size_t m = 1; m <= 4; ++m) {
        for (std::size_t n = m; n <= 4; ++n) {
            for (int inst = 0; inst < 40; ++inst) {
                std::vector<double> eps(m * n);
                for (auto& e : eps) e = rng.uniform();
                auto costs = make_costs(m, n, eps);
                for (auto mode : {objective_mode::sum, objective_mode::log_product}) {
                    auto a = solve(costs, mode);
                    auto [oracle, oracle_cost] = brute_force{costs, mode}.solve();
                    CAPTURE(m);
                    CAPTURE(n);
                    CAPTURE(inst);
                    CHECK(objective(costs, a, mode) == oracle_cost);
                    CHECK(a.server_of == oracle.server_of);
                }
            }
        }
    }
}

TEST_CASE("tie-break: equal costs prefer the lex-smallest flattened matrix") {
    // all-equal costs: every assignment ties; flattened-binary order prefers
    // the highest column in the earliest row
    auto costs = make_costs(2, 2, {0.5, 0.5, 0.5, 0.5}, {1, 1});
    auto a = solve(costs);
    auto [oracle, oracle_cost] = brute_force{costs, objective_mode::sum}.solve();
    CHECK(a.server_of == oracle.server_of);
    CHECK(a.server_of == std::vector<int>{1, 0});

    // bigger degenerate instance still terminates quickly and matches
    auto big = make_costs(6, 6, std::vector<double>(36, 0.25));
    auto ab = solve(big);
    auto [oracle_b, cost_b] = brute_force{big, objective_mode::sum}.solve();
    CHECK(ab.server_of == oracle_b.server_of);
}

TEST_CASE("constraints always hold") {
    test_rng rng(31);
    for (int inst = 0; inst < 100; ++inst) {
        std::size_t m = rng.below(5) + 1;
        std::size_t n = rng.below(5) + 1;
        std::vector<int> caps(n);
        long total = 0;
        for (auto& c : caps) {
            c = static_cast<int>(rng.below(3));
            total += c;
        }
        if (total < static_cast<long>(m)) continue;  // keep instance feasible
        std::vector<double> eps(m * n);
        for (auto& e : eps) e = rng.uniform();
        auto costs = make_costs(m, n, eps, caps);
        auto a = solve(costs);
        REQUIRE(a.server_of.size() == m);  // every row assigned exactly once
        std::vector<int> load(n, 0);
        for (int j : a.server_of) {
            REQUIRE(j >= 0);
            REQUIRE(static_cast<std::size_t>(j) < n);
            ++load[j];
        }
        for (std::size_t j = 0; j < n; ++j) CHECK(load[j] <= caps[j]);
    }
}

TEST_CASE("scaling every eps by a positive constant preserves the argmin") {
    test_rng rng(77);
    for (int inst = 0; inst < 50; ++inst) {
        std::size_t m = rng.below(4) + 1;
        std::size_t n = m + rng.below(3);
        std::vector<double> eps(m * n);
        for (auto& e : eps) e = rng.uniform(0.001, 0.9);
        auto costs = make_costs(m, n, eps);
        auto base = solve(costs);
        double scale = rng.uniform(0.05, 1.1);
        auto scaled = costs;
        for (auto& e : scaled.eps) e = std::min(e * scale, 1.0);
        // only compare when scaling kept all entries in range (no clamping)
        bool clamped = false;
        for (std::size_t k = 0; k < eps.size(); ++k)
            if (scaled.eps[k] != eps[k] * scale) clamped = true;
        if (clamped) continue;
        CHECK(solve(scaled).server_of == base.server_of);
    }
}

TEST_CASE("log-product mode minimizes the joint miss product") {
    test_rng rng(55);
    for (int inst = 0; inst < 30; ++inst) {
        std::size_t m = 2 + rng.below(2);
        std::size_t n = m + rng.below(2);
        std::vector<double> eps(m * n);
        for (auto& e : eps) e = rng.uniform(0.0001, 1.0);
        if (inst % 5 == 0) eps[rng.below(eps.size())] = 0.0;  // exercise the floor
        auto costs = make_costs(m, n, eps);
        auto a = solve(costs, objective_mode::log_product);

        // oracle: enumerate and compare floored products
        auto [oracle, oracle_cost] = brute_force{costs, objective_mode::log_product}.solve();
        CHECK(a.server_of == oracle.server_of);
    }
}

TEST_CASE("estimate_costs from the sample cross product") {
    path_sample_set s;
    s.interfaces = 1;
    s.servers = 1;
    s.deadline_ms = 20;
    s.network_ms = {{5, 5, 5}};
    s.compute_ms = {{10}};
    CHECK(estimate_costs(s).at(0, 0) == 0.0);  // always 15 <= 20

    s.compute_ms = {{30}};
    CHECK(estimate_costs(s).at(0, 0) == 1.0);  // always 35 > 20

    s.deadline_ms = 25;
    s.network_ms = {{5, 15}};
    s.compute_ms = {{10, 20}};
    // sums: 15, 25, 25, 35 -> only 35 exceeds 25
    CHECK(estimate_costs(s).at(0, 0) == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("estimate_costs invariant under sample permutation") {
    test_rng rng(88);
    path_sample_set s;
    s.interfaces = 2;
    s.servers = 2;
    s.deadline_ms = 40;
    s.network_ms.resize(4);
    s.compute_ms.resize(2);
    for (auto& l : s.network_ms)
        for (int k = 0; k < 9; ++k) l.push_back(rng.uniform(0, 50));
    for (auto& l : s.compute_ms)
        for (int k = 0; k < 7; ++k) l.push_back(rng.uniform(0, 30));
    auto base = estimate_costs(s);
    auto shuffled = s;
    for (auto& l : shuffled.network_ms)
        for (std::size_t i = l.size(); i > 1; --i) std::swap(l[i - 1], l[rng.below(i)]);
    for (auto& l : shuffled.compute_ms)
        for (std::size_t i = l.size(); i > 1; --i) std::swap(l[i - 1], l[rng.below(i)]);
    CHECK(estimate_costs(shuffled).eps == base.eps);
}

TEST_CASE("estimate_costs rejects empty sample lists") {
    path_sample_set s;
    s.interfaces = 1;
    s.servers = 1;
    s.deadline_ms = 10;
    s.network_ms = {{}};
    s.compute_ms = {{1.0}};
    CHECK_THROWS_AS(estimate_costs(s), std::invalid_argument);
}

TEST_CASE("rematch") {
    auto costs = make_costs(2, 2, {0.1, 0.9, 0.9, 0.1}, {1, 1});
    assignment previous{{1, 0}};  // objective 1.8, clearly worse

    SUBCASE("zero hysteresis always adopts the fresh optimum") {
        auto a = rematch(previous, costs, 0.0);
        CHECK(a.server_of == std::vector<int>{0, 1});
        // even an already-optimal previous is replaced by the canonical optimum
        auto b = rematch(a, costs, 0.0);
        CHECK(b.server_of == std::vector<int>{0, 1});
    }
    SUBCASE("identical costs with an optimal previous are retained") {
        assignment optimal{{0, 1}};
        auto a = rematch(optimal, costs, 0.05);
        CHECK(a.server_of == optimal.server_of);
    }
    SUBCASE("improvement above hysteresis flips") {
        // previous objective 0.6, fresh optimum 0.3: improvement 0.3 > 0.1
        auto c = make_costs(1, 2, {0.3, 0.6});
        assignment prev{{1}};
        auto a = rematch(prev, c, 0.1);
        CHECK(a.server_of == std::vector<int>{0});
    }
    SUBCASE("improvement under hysteresis is ignored") {
        auto c = make_costs(1, 2, {0.55, 0.6});
        assignment prev{{1}};
        auto a = rematch(prev, c, 0.1);  // improvement 0.05 < 0.1
        CHECK(a.server_of == std::vector<int>{1});
    }
    SUBCASE("dimension mismatch") {
        assignment bad{{0, 1, 0}};
        CHECK_THROWS_AS(rematch(bad, costs, 0.0), std::invalid_argument);
        assignment out_of_range{{0, 5}};
        CHECK_THROWS_AS(rematch(out_of_range, costs, 0.0), std::invalid_argument);
    }
}
