#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fogfleet/reliability.hpp"
#include "test_util.hpp"

using namespace fogfleet;
using namespace fogfleet::reliability;

namespace {

// Monte-Carlo Bernoulli oracle: fraction of trials where every event fires.
double mc_all_fail_fraction(const std::vector<double>& probs, std::size_t trials,
                            std::uint64_t seed) {
    test_rng rng(seed);
    std::size_t all = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        bool every = true;
        for (double p : probs) every = every && (rng.uniform() < p);
        all += every;
    }
    return static_cast<double>(all) / static_cast<double>(trials);
}

// Monte-Carlo min-sampling oracle for the first-response CDF.
double mc_min_cdf(const std::vector<latency_distribution>& paths, double t, std::size_t trials,
                  std::uint64_t seed) {
    test_rng rng(seed);
    std::size_t hits = 0;
    for (std::size_t k = 0; k < trials; ++k) {
        double lo = std::numeric_limits<double>::infinity();
        for (const auto& p : paths) lo = std::min(lo, p.sample(rng.uniform()));
        hits += (lo <= t);
    }
    return static_cast<double>(hits) / static_cast<double>(trials);
}

}  // namespace

TEST_CASE("vm failure probability") {
    // 15 h uptime, 20 min recovery
    failure_model spot{15 * 3600.0, 20 * 60.0};
    CHECK(vm_failure_probability(spot) == doctest::Approx(1200.0 / 55200.0).epsilon(1e-12));
    CHECK(vm_failure_probability(spot) == doctest::Approx(0.021739).epsilon(1e-4));

    CHECK(vm_failure_probability({12345.0, 0.0}) == 0.0);
    CHECK(vm_failure_probability({20 * 60.0, 20 * 60.0}) == 0.5);

    CHECK_THROWS_AS(vm_failure_probability({0.0, 10.0}), std::invalid_argument);
    CHECK_THROWS_AS(vm_failure_probability({-1.0, 10.0}), std::invalid_argument);
    CHECK_THROWS_AS(vm_failure_probability({10.0, -1.0}), std::invalid_argument);
}

TEST_CASE("vm failure probability is monotone and < 1") {
    test_rng rng(7);
    for (int k = 0; k < 200; ++k) {
        double up = rng.uniform(1.0, 1e6);
        double rec = rng.uniform(0.0, 1e6);
        double p = vm_failure_probability({up, rec});
        CHECK(p >= 0.0);
        CHECK(p < 1.0);
        CHECK(vm_failure_probability({up, rec + 1.0}) > p);
        CHECK(vm_failure_probability({up + 1.0, rec}) <= p);
    }
}

TEST_CASE("system failure probability") {
    double p = vm_failure_probability({15 * 3600.0, 20 * 60.0});
    double p2 = system_failure_probability(std::vector<double>{p, p});
    CHECK(p2 == doctest::Approx(4.726e-4).epsilon(5e-4));  // 4 significant figures
    CHECK(p2 < 0.0005);                                    // the headline bound

    CHECK(system_failure_probability(std::vector<double>{0.7, 0.0}) == 0.0);
    CHECK(system_failure_probability(std::vector<double>{}) == 1.0);  // zero replicas: always down

    // direct product, cross-checked by Bernoulli simulation with 1e6 draws
    std::vector<double> three{0.3, 0.3, 0.3};
    CHECK(system_failure_probability(three) == doctest::Approx(0.027).epsilon(1e-12));
    double mc = mc_all_fail_fraction(three, 1'000'000, 42);
    double se = std::sqrt(0.027 * (1 - 0.027) / 1e6);
    CHECK(std::abs(mc - 0.027) < 3 * se + 1e-9);

    CHECK_THROWS_AS(system_failure_probability(std::vector<double>{1.5}), std::invalid_argument);
}

TEST_CASE("system failure probability properties") {
    test_rng rng(11);
    for (int k = 0; k < 100; ++k) {
        std::vector<double> ps;
        for (int i = 0; i < 6; ++i) ps.push_back(rng.uniform());
        double direct = system_failure_probability(ps);
        std::vector<double> shuffled = ps;
        for (std::size_t i = shuffled.size(); i > 1; --i)
            std::swap(shuffled[i - 1], shuffled[rng.below(i)]);
        CHECK(system_failure_probability(shuffled) == doctest::Approx(direct).epsilon(1e-12));
        // appending p < 1 never increases the product
        std::vector<double> more = ps;
        more.push_back(rng.uniform(0.0, 0.999999));
        CHECK(system_failure_probability(more) <= direct);
    }
}

TEST_CASE("log-space product path matches direct computation") {
    std::vector<double> many(70, 0.9);
    double expected = 1.0;
    for (double f : many) expected *= f;
    CHECK(system_failure_probability(many) == doctest::Approx(expected).epsilon(1e-12));
    many.push_back(0.0);
    CHECK(system_failure_probability(many) == 0.0);
}

TEST_CASE("required replicas") {
    CHECK(required_replicas(0.021739, 1e-4) == 3);  // 0.021739^2 ~ 4.7e-4 > 1e-4 >= 0.021739^3
    CHECK(required_replicas(0.5, 0.5) == 1);
    CHECK(required_replicas(0.1, 1e-6) == 6);  // 0.1^6 = 1e-6

    CHECK_THROWS_AS(required_replicas(0.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(required_replicas(1.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(required_replicas(0.5, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(required_replicas(0.5, 1.0), std::invalid_argument);
}

TEST_CASE("required_replicas(p, p^k) == k") {
    test_rng rng(3);
    for (int trial = 0; trial < 300; ++trial) {
        double p = rng.uniform(0.01, 0.99);
        int k = static_cast<int>(rng.below(20)) + 1;
        double target = std::pow(p, k);
        if (target <= 0.0 || target >= 1.0) continue;
        CAPTURE(p);
        CAPTURE(k);
        CHECK(required_replicas(p, target) == k);
    }
}

TEST_CASE("deadline miss probability") {
    CHECK(deadline_miss_probability(std::vector<double>{0.1, 0.1}) ==
          doctest::Approx(0.01).epsilon(1e-15));
    CHECK(deadline_miss_probability(std::vector<double>{0.42}) == 0.42);

    std::vector<double> mixed{0.2, 0.05, 0.5};
    CHECK(deadline_miss_probability(mixed) == doctest::Approx(0.005).epsilon(1e-12));
    double mc = mc_all_fail_fraction(mixed, 1'000'000, 99);
    double se = std::sqrt(0.005 * 0.995 / 1e6);
    CHECK(std::abs(mc - 0.005) < 3 * se + 1e-9);

    CHECK_THROWS_AS(deadline_miss_probability(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("deadline miss of n equal eps equals iterated product exactly") {
    test_rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        double eps = rng.uniform();
        int n = static_cast<int>(rng.below(10)) + 1;
        std::vector<double> copies(n, eps);
        double iterated = 1.0;
        for (int i = 0; i < n; ++i) iterated *= eps;
        CHECK(deadline_miss_probability(copies) == iterated);
    }
}

TEST_CASE("min latency cdf") {
    // two identical paths with F(t) = 0.5 at t = 1
    auto half = latency_distribution::empirical({0.0, 2.0});
    CHECK(half.cdf(1.0) == 0.5);
    std::vector<latency_distribution> two{half, half};
    CHECK(min_latency_cdf(two, 1.0) == doctest::Approx(0.75).epsilon(1e-15));

    // single path: identity
    auto exp1 = latency_distribution::shifted_exponential(5.0, 20.0);
    std::vector<latency_distribution> one{exp1};
    for (double t : {0.0, 5.0, 10.0, 100.0})
        CHECK(min_latency_cdf(one, t) == doctest::Approx(exp1.cdf(t)).epsilon(1e-15));

    CHECK_THROWS_AS(min_latency_cdf({}, 1.0), std::invalid_argument);
}

TEST_CASE("min latency cdf vs Monte-Carlo min-sampling at the analytic median") {
    auto a = latency_distribution::lognormal(std::log(50.0), 0.5);
    auto b = latency_distribution::lognormal(std::log(80.0), 0.3);
    double median_a = a.quantile(0.5);
    CHECK(median_a == doctest::Approx(50.0).epsilon(1e-9));

    std::vector<latency_distribution> paths{a, b};
    double analytic = min_latency_cdf(paths, median_a);
    double mc = mc_min_cdf(paths, median_a, 100'000, 1234);
    CHECK(std::abs(analytic - mc) < 0.01);
}

TEST_CASE("min latency cdf of n iid paths equals 1-(1-F)^n and Monte-Carlo agrees") {
    auto d = latency_distribution::lognormal(std::log(30.0), 0.6);
    for (int n : {1, 2, 3, 5}) {
        std::vector<latency_distribution> paths(n, d);
        for (double t : {10.0, 30.0, 60.0}) {
            double f = d.cdf(t);
            double expect = 1.0 - std::pow(1.0 - f, n);
            CHECK(min_latency_cdf(paths, t) == doctest::Approx(expect).epsilon(1e-12));
        }
        double t = 30.0;
        double analytic = min_latency_cdf(paths, t);
        double mc = mc_min_cdf(paths, t, 100'000, 777 + n);
        double se = std::sqrt(analytic * (1 - analytic) / 1e5);
        CHECK(std::abs(analytic - mc) < 3 * se + 1e-6);
    }
}

TEST_CASE("percentile nearest-rank") {
    std::vector<double> grid(100);
    std::iota(grid.begin(), grid.end(), 1.0);  // 1..100
    CHECK(percentile(grid, 99.0) == 99.0);
    CHECK(percentile(grid, 100.0) == 100.0);
    CHECK(percentile(grid, 1.0) == 1.0);

    CHECK(percentile(std::vector<double>{7.0}, 50.0) == 7.0);

    std::vector<double> four{10.0, 20.0, 30.0, 40.0};
    CHECK(percentile(four, 99.0) == 40.0);  // ceil(3.96) - 1 = index 3
    CHECK(percentile(four, 50.0) == 20.0);

    CHECK_THROWS_AS(percentile(std::vector<double>{}, 50.0), std::invalid_argument);
    CHECK_THROWS_AS(percentile(four, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(percentile(four, 100.5), std::invalid_argument);
}

TEST_CASE("percentile properties: max at q=100, permutation invariant") {
    test_rng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> xs;
        std::size_t n = rng.below(40) + 1;
        for (std::size_t i = 0; i < n; ++i) xs.push_back(rng.uniform(0, 1000));
        CHECK(percentile(xs, 100.0) == *std::max_element(xs.begin(), xs.end()));
        double q = rng.uniform(0.5, 100.0);
        double before = percentile(xs, q);
        std::vector<double> shuffled = xs;
        for (std::size_t i = shuffled.size(); i > 1; --i)
            std::swap(shuffled[i - 1], shuffled[rng.below(i)]);
        CHECK(percentile(shuffled, q) == before);
    }
}

TEST_CASE("summarize consistent with percentile") {
    std::vector<double> grid(100);
    std::iota(grid.begin(), grid.end(), 1.0);
    auto s = summarize(grid);
    CHECK(s.count == 100);
    CHECK(s.mean_ms == doctest::Approx(50.5));
    CHECK(s.p50_ms == percentile(grid, 50.0));
    CHECK(s.p99_ms == percentile(grid, 99.0));
    CHECK(s.max_ms == 100.0);
    CHECK(s.p50_ms <= s.p99_ms);
    CHECK(s.p99_ms <= s.max_ms);

    auto one = summarize(std::vector<double>{7.0});
    CHECK(one.count == 1);
    CHECK(one.mean_ms == 7.0);
    CHECK(one.p50_ms == 7.0);
    CHECK(one.p99_ms == 7.0);
    CHECK(one.max_ms == 7.0);

    CHECK_THROWS_AS(summarize(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("latency distribution invariants") {
    CHECK_THROWS_AS(latency_distribution::empirical({}), std::invalid_argument);
    CHECK_THROWS_AS(latency_distribution::empirical({1.0, -0.5}), std::invalid_argument);
    CHECK_THROWS_AS(latency_distribution::constant(-1.0), std::invalid_argument);
    CHECK_THROWS_AS(latency_distribution::shifted_exponential(-1.0, 2.0), std::invalid_argument);

    test_rng rng(23);
    auto check_samples = [&](const latency_distribution& d) {
        for (int i = 0; i < 500; ++i) {
            double v = d.sample(rng.uniform());
            CHECK(v >= 0.0);
        }
    };
    check_samples(latency_distribution::constant(3.0));
    check_samples(latency_distribution::lognormal(2.0, 1.0));
    check_samples(latency_distribution::shifted_exponential(4.0, 10.0));
    check_samples(latency_distribution::empirical({1.0, 2.0, 3.0}));

    // CDF is monotone in t
    auto d = latency_distribution::lognormal(3.0, 0.7);
    double prev = -1;
    for (double t = 0; t < 200; t += 5) {
        double c = d.cdf(t);
        CHECK(c >= prev);
        prev = c;
    }
}
