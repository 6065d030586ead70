#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace fogfleet {

// Round-trip latency models, all in milliseconds. Sampled values are
// always >= 0.

struct constant_latency {
    double value_ms = 0;
};

// mu/sigma act on log-milliseconds.
struct lognormal_latency {
    double mu_log_ms = 0;
    double sigma_log_ms = 1;
};

struct shifted_exponential_latency {
    double offset_ms = 0;
    double mean_ms = 1;  // mean of the exponential part
};

struct empirical_latency {
    std::vector<double> samples_ms;  // at least one sample
};

class latency_distribution {
public:
    using model =
        std::variant<constant_latency, lognormal_latency, shifted_exponential_latency, empirical_latency>;

    latency_distribution() : model_(constant_latency{0}) {}
    latency_distribution(model m);  // validates invariants

    static latency_distribution constant(double value_ms);
    static latency_distribution lognormal(double mu_log_ms, double sigma_log_ms);
    static latency_distribution shifted_exponential(double offset_ms, double mean_ms);
    static latency_distribution empirical(std::vector<double> samples_ms);

    // P(L <= t).
    double cdf(double t_ms) const;

    // Inverse of a uniform draw u in [0,1): deterministic sampling hook for
    // the counter-based RNG. Monotone in u.
    double sample(double u) const;

    // Smallest t with cdf(t) >= q, analytic where the family allows.
    double quantile(double q) const;

    double mean() const;

    const model& get() const { return model_; }
    std::string describe() const;

private:
    model model_;
};

}  // namespace fogfleet
