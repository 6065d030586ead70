#include "fogfleet/latency_distribution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>

namespace fogfleet {

namespace {

const boost::math::normal_distribution<double> unit_normal{0.0, 1.0};

double std_normal_cdf(double z) { return boost::math::cdf(unit_normal, z); }
double std_normal_quantile(double q) { return boost::math::quantile(unit_normal, q); }

}  // namespace

latency_distribution::latency_distribution(model m) : model_(std::move(m)) {
    std::visit(
        [](const auto& d) {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, constant_latency>) {
                if (d.value_ms < 0) throw std::invalid_argument("constant latency must be >= 0");
            } else if constexpr (std::is_same_v<T, lognormal_latency>) {
                if (d.sigma_log_ms < 0) throw std::invalid_argument("lognormal sigma must be >= 0");
                if (!std::isfinite(d.mu_log_ms) || !std::isfinite(d.sigma_log_ms))
                    throw std::invalid_argument("lognormal parameters must be finite");
            } else if constexpr (std::is_same_v<T, shifted_exponential_latency>) {
                if (d.offset_ms < 0 || d.mean_ms < 0)
                    throw std::invalid_argument("shifted-exponential offset/mean must be >= 0");
            } else if constexpr (std::is_same_v<T, empirical_latency>) {
                if (d.samples_ms.empty())
                    throw std::invalid_argument("empirical distribution requires >= 1 sample");
                for (double s : d.samples_ms)
                    if (!(s >= 0)) throw std::invalid_argument("empirical samples must be >= 0");
            }
        },
        model_);
}

latency_distribution latency_distribution::constant(double value_ms) {
    return latency_distribution(constant_latency{value_ms});
}
latency_distribution latency_distribution::lognormal(double mu_log_ms, double sigma_log_ms) {
    return latency_distribution(lognormal_latency{mu_log_ms, sigma_log_ms});
}
latency_distribution latency_distribution::shifted_exponential(double offset_ms, double mean_ms) {
    return latency_distribution(shifted_exponential_latency{offset_ms, mean_ms});
}
latency_distribution latency_distribution::empirical(std::vector<double> samples_ms) {
    return latency_distribution(empirical_latency{std::move(samples_ms)});
}

double latency_distribution::cdf(double t_ms) const {
    return std::visit(
        [t_ms](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, constant_latency>) {
                return t_ms >= d.value_ms ? 1.0 : 0.0;
            } else if constexpr (std::is_same_v<T, lognormal_latency>) {
                if (t_ms <= 0) return 0.0;
                if (d.sigma_log_ms == 0) return std::log(t_ms) >= d.mu_log_ms ? 1.0 : 0.0;
                return std_normal_cdf((std::log(t_ms) - d.mu_log_ms) / d.sigma_log_ms);
            } else if constexpr (std::is_same_v<T, shifted_exponential_latency>) {
                if (t_ms < d.offset_ms) return 0.0;
                if (d.mean_ms == 0) return 1.0;
                return 1.0 - std::exp(-(t_ms - d.offset_ms) / d.mean_ms);
            } else {
                std::size_t n = d.samples_ms.size(), c = 0;
                for (double s : d.samples_ms) c += (s <= t_ms);
                return static_cast<double>(c) / static_cast<double>(n);
            }
        },
        model_);
}

double latency_distribution::sample(double u) const {
    u = std::clamp(u, 0.0, std::nextafter(1.0, 0.0));
    return std::visit(
        [u](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, constant_latency>) {
                return d.value_ms;
            } else if constexpr (std::is_same_v<T, lognormal_latency>) {
                if (d.sigma_log_ms == 0) return std::exp(d.mu_log_ms);
                // guard the open interval; quantile(0/1) are infinite
                double uu = std::clamp(u, 1e-15, 1.0 - 1e-15);
                return std::exp(d.mu_log_ms + d.sigma_log_ms * std_normal_quantile(uu));
            } else if constexpr (std::is_same_v<T, shifted_exponential_latency>) {
                return d.offset_ms - d.mean_ms * std::log1p(-u);
            } else {
                auto idx = static_cast<std::size_t>(u * static_cast<double>(d.samples_ms.size()));
                idx = std::min(idx, d.samples_ms.size() - 1);
                return d.samples_ms[idx];
            }
        },
        model_);
}

double latency_distribution::quantile(double q) const {
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile q must be in [0,1]");
    return std::visit(
        [q](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, constant_latency>) {
                return d.value_ms;
            } else if constexpr (std::is_same_v<T, lognormal_latency>) {
                if (d.sigma_log_ms == 0) return std::exp(d.mu_log_ms);
                double qq = std::clamp(q, 1e-15, 1.0 - 1e-15);
                return std::exp(d.mu_log_ms + d.sigma_log_ms * std_normal_quantile(qq));
            } else if constexpr (std::is_same_v<T, shifted_exponential_latency>) {
                double qq = std::min(q, 1.0 - 1e-15);
                return d.offset_ms - d.mean_ms * std::log1p(-qq);
            } else {
                std::vector<double> sorted = d.samples_ms;
                std::sort(sorted.begin(), sorted.end());
                if (q == 0) return sorted.front();
                auto n = static_cast<double>(sorted.size());
                auto rank = static_cast<std::size_t>(std::ceil(q * n));
                return sorted[std::max<std::size_t>(rank, 1) - 1];
            }
        },
        model_);
}

double latency_distribution::mean() const {
    return std::visit(
        [](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, constant_latency>) {
                return d.value_ms;
            } else if constexpr (std::is_same_v<T, lognormal_latency>) {
                return std::exp(d.mu_log_ms + 0.5 * d.sigma_log_ms * d.sigma_log_ms);
            } else if constexpr (std::is_same_v<T, shifted_exponential_latency>) {
                return d.offset_ms + d.mean_ms;
            } else {
                return std::accumulate(d.samples_ms.begin(), d.samples_ms.end(), 0.0) /
                       static_cast<double>(d.samples_ms.size());
            }
        },
        model_);
}

std::string latency_distribution::describe() const {
    return std::visit(
        [](const auto& d) -> std::string {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, constant_latency>) {
                return "constant(" + std::to_string(d.value_ms) + "ms)";
            } else if constexpr (std::is_same_v<T, lognormal_latency>) {
                return "lognormal(mu=" + std::to_string(d.mu_log_ms) +
                       ", sigma=" + std::to_string(d.sigma_log_ms) + ")";
            } else if constexpr (std::is_same_v<T, shifted_exponential_latency>) {
                return "shifted_exp(offset=" + std::to_string(d.offset_ms) +
                       "ms, mean=" + std::to_string(d.mean_ms) + "ms)";
            } else {
                return "empirical(" + std::to_string(d.samples_ms.size()) + " samples)";
            }
        },
        model_);
}

}  // namespace fogfleet
