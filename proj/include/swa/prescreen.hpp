#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "swa/dataset.hpp"
#include "swa/errors.hpp"
#include "swa/parallel.hpp"

namespace swa {

struct ScreenRule {
    enum class Kind { top_k, threshold } kind = Kind::top_k;
    Index k = 0;
    double r_min = 0.0;
};

/// Marginal-correlation screen. `kept` is ordered by |correlation|
/// descending (ties: smaller index first). Constant columns get correlation 0
/// and are listed in `constant_columns`.
struct ScreenResult {
    std::vector<Index> kept;
    std::vector<double> correlations;
    ScreenRule rule;
    std::vector<Index> constant_columns;
};

/// Pearson correlation of every column with the response, two-pass.
/// Columns (or a response) with zero variance get correlation 0.
inline std::vector<double> marginal_correlations(const Dataset& d, std::vector<Index>* constant = nullptr,
                                                 std::size_t workers = 0) {
    const Eigen::VectorXd yc = d.y().array() - d.y().mean();
    const double syy = yc.squaredNorm();
    std::vector<double> r(d.p(), 0.0);
    std::vector<char> flat(d.p(), 0);
    parallel_for(d.p(), workers, [&](std::size_t j) {
        const auto col = d.x().col(static_cast<Eigen::Index>(j));
        const Eigen::VectorXd xc = col.array() - col.mean();
        const double sxx = xc.squaredNorm();
        if (!(sxx > 0.0) || !(syy > 0.0)) {
            flat[j] = !(sxx > 0.0);
            return;
        }
        r[j] = std::clamp(xc.dot(yc) / std::sqrt(sxx * syy), -1.0, 1.0);
    });
    if (constant)
        for (Index j = 0; j < d.p(); ++j)
            if (flat[j]) constant->push_back(j);
    return r;
}

namespace detail {

inline std::vector<Index> order_by_abs(const std::vector<double>& r) {
    std::vector<Index> order(r.size());
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return std::abs(r[a]) > std::abs(r[b]); });
    return order;
}

} // namespace detail

inline ScreenResult screen_top_k(const Dataset& d, Index k, std::size_t workers = 0) {
    if (k < 1 || k > d.p()) throw ConfigError("top-k screen needs 1 <= k <= p (k = " + std::to_string(k) + ")");
    ScreenResult out;
    out.rule = {ScreenRule::Kind::top_k, k, 0.0};
    out.correlations = marginal_correlations(d, &out.constant_columns, workers);
    out.kept = detail::order_by_abs(out.correlations);
    out.kept.resize(k);
    return out;
}

inline ScreenResult screen_threshold(const Dataset& d, double r_min, std::size_t workers = 0) {
    if (!(r_min > 0.0 && r_min < 1.0)) throw ConfigError("correlation threshold must lie in (0,1)");
    ScreenResult out;
    out.rule = {ScreenRule::Kind::threshold, 0, r_min};
    out.correlations = marginal_correlations(d, &out.constant_columns, workers);
    for (Index j : detail::order_by_abs(out.correlations))
        if (std::abs(out.correlations[j]) >= r_min) out.kept.push_back(j);
    return out;
}

/// The screened design: kept columns in screening order, with names and
/// original indices preserved.
inline Dataset reduce(const Dataset& d, const ScreenResult& screen) { return d.select_columns(screen.kept); }

} // namespace swa
