#include "fogfleet/reliability.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fogfleet::reliability {

namespace {

constexpr std::size_t log_space_threshold = 64;

void check_probability(double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument(std::string(what) + " must be in [0,1]");
}

// Product of probabilities; switches to log-space for long lists so that
// hundreds of small factors do not underflow to a hard zero prematurely.
double probability_product(std::span<const double> factors, const char* what) {
    for (double p : factors) check_probability(p, what);
    if (factors.size() > log_space_threshold) {
        double log_sum = 0;
        for (double p : factors) {
            if (p == 0.0) return 0.0;
            log_sum += std::log(p);
        }
        return std::exp(log_sum);
    }
    double prod = 1.0;
    for (double p : factors) prod *= p;
    return prod;
}

}  // namespace

double vm_failure_probability(const failure_model& model) {
    if (!(model.mean_uptime_s > 0))
        throw std::invalid_argument("failure_model: mean_uptime must be > 0");
    if (!(model.recovery_time_s >= 0))
        throw std::invalid_argument("failure_model: recovery_time must be >= 0");
    return model.recovery_time_s / (model.mean_uptime_s + model.recovery_time_s);
}

double system_failure_probability(std::span<const double> per_vm) {
    return probability_product(per_vm, "per-VM failure probability");
}

int required_replicas(double p_vm, double p_target) {
    if (!(p_vm > 0.0 && p_vm < 1.0))
        throw std::invalid_argument("required_replicas: p_vm must be in (0,1)");
    if (!(p_target > 0.0 && p_target < 1.0))
        throw std::invalid_argument("required_replicas: p_target must be in (0,1)");

    // Relative slack so that exact-power targets (p_target == p_vm^k) land on
    // k instead of k+1 when pow() rounds up by an ulp.
    auto meets = [&](int n) { return std::pow(p_vm, n) <= p_target * (1.0 + 1e-9); };

    int n = static_cast<int>(std::ceil(std::log(p_target) / std::log(p_vm) - 1e-9));
    n = std::max(n, 1);
    while (!meets(n)) ++n;
    while (n > 1 && meets(n - 1)) --n;
    return n;
}

double deadline_miss_probability(std::span<const double> path_misses) {
    if (path_misses.empty())
        throw std::invalid_argument("deadline_miss_probability: no paths (request cannot be sent)");
    return probability_product(path_misses, "path miss probability");
}

double min_latency_cdf(std::span<const latency_distribution> paths, double t_ms) {
    if (paths.empty()) throw std::invalid_argument("min_latency_cdf: empty path list");
    if (!(t_ms >= 0)) throw std::invalid_argument("min_latency_cdf: t must be >= 0");
    std::vector<double> survivals;
    survivals.reserve(paths.size());
    for (const auto& p : paths) survivals.push_back(1.0 - p.cdf(t_ms));
    return 1.0 - probability_product(survivals, "path survival");
}

double percentile(std::span<const double> samples_ms, double q) {
    if (samples_ms.empty()) throw std::invalid_argument("percentile: empty sample list");
    if (!(q > 0.0 && q <= 100.0)) throw std::invalid_argument("percentile: q must be in (0,100]");
    std::vector<double> sorted(samples_ms.begin(), samples_ms.end());
    std::sort(sorted.begin(), sorted.end());
    auto n = static_cast<double>(sorted.size());
    auto rank = static_cast<std::size_t>(std::ceil(q * n / 100.0));  // 1-based
    rank = std::clamp<std::size_t>(rank, 1, sorted.size());
    return sorted[rank - 1];
}

latency_summary summarize(std::span<const double> samples_ms) {
    if (samples_ms.empty()) throw std::invalid_argument("summarize: empty sample list");
    latency_summary s;
    s.count = samples_ms.size();
    s.mean_ms = std::accumulate(samples_ms.begin(), samples_ms.end(), 0.0) /
                static_cast<double>(samples_ms.size());
    s.p50_ms = percentile(samples_ms, 50.0);
    s.p99_ms = percentile(samples_ms, 99.0);
    s.max_ms = *std::max_element(samples_ms.begin(), samples_ms.end());
    return s;
}

}  // namespace fogfleet::reliability
