#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "swa/errors.hpp"

namespace swa {

/// Bounds on the number of subsamples m needed so that, with probability at
/// least 1 - gamma, some subsample of size s contains all p0 true features.
///
/// alpha_lower/alpha_upper bracket the per-subsample capture probability;
/// the larger alpha gives the smaller m, so `lower` comes from alpha_upper.
struct MBounds {
    double lower = 1.0;
    double upper = 1.0;
    double alpha_lower = 1.0;
    double alpha_upper = 1.0;
};

namespace detail {

inline void check_sizes(long long p, long long p0, long long s) {
    if (p < 1) throw ConfigError("p must be positive");
    if (p0 < 0) throw ConfigError("p0 must be non-negative");
    if (s < 1 || s > p) throw ConfigError("s must lie in [1, p]");
    if (p0 > s) throw ConfigError("p0 = " + std::to_string(p0) + " exceeds s = " + std::to_string(s));
}

/// m solving 1 - (1 - alpha)^m = 1 - gamma, from log(alpha).
inline double m_from_log_alpha(double log_alpha, double gamma) {
    if (log_alpha >= 0.0) return 1.0;
    // log(1 - alpha) without cancellation for alpha near 0 or near 1.
    const double log1m = log_alpha < -0.6931471805599453 ? std::log1p(-std::exp(log_alpha))
                                                         : std::log(-std::expm1(log_alpha));
    if (log1m == 0.0) {
        // alpha below double resolution: log(1 - alpha) ~ -alpha.
        const double log_m = std::log(-std::log(gamma)) - log_alpha;
        return log_m > std::log(std::numeric_limits<double>::max()) ? std::numeric_limits<double>::infinity()
                                                                    : std::exp(log_m);
    }
    return std::log(gamma) / log1m;
}

} // namespace detail

/// log of prod_{k<p0} (s-k)/(p-k), the chance that a uniform size-s subset
/// of p columns contains a fixed set of p0 columns.
inline double log_capture_probability(long long p, long long p0, long long s) {
    detail::check_sizes(p, p0, s);
    double acc = 0.0;
    for (long long k = 0; k < p0; ++k)
        acc += std::log(static_cast<double>(s - k)) - std::log(static_cast<double>(p - k));
    return acc;
}

inline double capture_probability(long long p, long long p0, long long s) {
    detail::check_sizes(p, p0, s);
    if (p0 > 30) return std::exp(log_capture_probability(p, p0, s));
    double alpha = 1.0;
    for (long long k = 0; k < p0; ++k) alpha *= static_cast<double>(s - k) / static_cast<double>(p - k);
    return alpha;
}

/// Subsample count from the exact capture probability.
inline double exact_m(long long p, long long p0, long long s, double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in (0,1)");
    return detail::m_from_log_alpha(log_capture_probability(p, p0, s), gamma);
}

inline MBounds m_bounds(long long p, long long p0, long long s, double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in (0,1)");
    detail::check_sizes(p, p0, s);
    MBounds out;
    if (s == p || p0 == 0) return out;  // every subsample captures everything

    const double k = static_cast<double>(p0);
    const double log_alpha_hi = k * std::log(static_cast<double>(s) / static_cast<double>(p));
    const double log_alpha_lo =
        k * std::log(static_cast<double>(s - p0 + 1) / static_cast<double>(p - p0 + 1));
    out.alpha_upper = std::exp(log_alpha_hi);
    out.alpha_lower = std::exp(log_alpha_lo);
    out.lower = detail::m_from_log_alpha(log_alpha_hi, gamma);
    out.upper = detail::m_from_log_alpha(log_alpha_lo, gamma);
    return out;
}

} // namespace swa
