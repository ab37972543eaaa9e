#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "swa/dataset.hpp"
#include "swa/errors.hpp"
#include "swa/stats.hpp"

namespace swa {

/// Relative pivot threshold below which a column counts as linearly dependent.
inline constexpr double kRankTolerance = 1e-10;

/// Least-squares fit over a subset of design columns.
///
/// `columns` lists the retained columns in the order they were requested;
/// `coefficients`, `t_values` and `p_values` are parallel to it. Columns found
/// to be linearly dependent on earlier pivots appear in `dropped_columns`
/// instead and carry no statistics.
struct OlsFit {
    std::vector<Index> columns;
    std::vector<double> coefficients;
    std::vector<double> t_values;
    std::vector<double> p_values;
    double rss = 0.0;
    Index df_residual = 0;
    std::vector<Index> dropped_columns;
    bool intercept = false;
    double intercept_value = 0.0;

    /// Position of `column` within `columns`, or columns.size() when absent.
    std::size_t position(Index column) const {
        return static_cast<std::size_t>(std::find(columns.begin(), columns.end(), column) - columns.begin());
    }
};

/// Reusable scratch space for repeated fits of the same shape.
struct OlsWorkspace {
    Eigen::MatrixXd design;
    Eigen::VectorXd response;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr;
};

namespace detail {

inline void check_columns(const Dataset& d, std::span<const Index> columns) {
    std::vector<Index> sorted(columns.begin(), columns.end());
    std::sort(sorted.begin(), sorted.end());
    if (!sorted.empty() && sorted.back() >= d.p())
        throw ConfigError("column index " + std::to_string(sorted.back()) + " out of range (p = " + std::to_string(d.p()) + ")");
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw ConfigError("column indices passed to the least-squares fit must be distinct");
}

} // namespace detail

/// Ordinary least squares of y on the requested columns via column-pivoted
/// Householder QR. With `intercept`, columns and response are centered first,
/// which is equivalent to an unpenalized constant term that is never dropped.
///
/// `with_inference = false` skips p-values (the t statistics are still filled).
inline OlsFit fit(const Dataset& d, std::span<const Index> columns, bool intercept, OlsWorkspace& ws,
                  bool with_inference = true) {
    if (columns.empty() && !intercept) throw ConfigError("least-squares fit needs at least one column or an intercept");
    detail::check_columns(d, columns);

    const auto n = static_cast<Eigen::Index>(d.n());
    const auto k = static_cast<Eigen::Index>(columns.size());
    ws.design.resize(n, k);
    for (Eigen::Index c = 0; c < k; ++c) ws.design.col(c) = d.x().col(static_cast<Eigen::Index>(columns[c]));
    ws.response = d.y();

    Eigen::RowVectorXd column_means;
    double y_mean = 0.0;
    if (intercept) {
        column_means = ws.design.colwise().mean();
        ws.design.rowwise() -= column_means;
        y_mean = ws.response.mean();
        ws.response.array() -= y_mean;
    }

    OlsFit out;
    out.intercept = intercept;

    if (k == 0) {
        out.rss = ws.response.squaredNorm();
        out.df_residual = static_cast<Index>(n) - 1;
        out.intercept_value = y_mean;
        if (out.df_residual == 0) throw NumericalError("saturated model: no residual degrees of freedom");
        return out;
    }

    ws.qr.setThreshold(kRankTolerance);
    ws.qr.compute(ws.design);
    const Eigen::Index rank = ws.qr.rank();
    const auto& perm = ws.qr.colsPermutation().indices();

    const Eigen::Index used = rank + (intercept ? 1 : 0);
    if (used >= n) throw NumericalError("saturated model: no residual degrees of freedom");
    out.df_residual = static_cast<Index>(n - used);

    // Coefficients in pivot order: R11^{-1} (Q^T y)[0:rank].
    Eigen::VectorXd qty = ws.response;
    qty.applyOnTheLeft(ws.qr.householderQ().transpose());
    const auto r11 = ws.qr.matrixR().topLeftCorner(rank, rank).template triangularView<Eigen::Upper>();
    const Eigen::VectorXd beta_pivot = r11.solve(qty.head(rank));

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(k);
    std::vector<char> kept(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < rank; ++i) {
        beta(perm(i)) = beta_pivot(i);
        kept[static_cast<std::size_t>(perm(i))] = 1;
    }

    const Eigen::VectorXd residual = ws.response - ws.design * beta;
    out.rss = residual.squaredNorm();
    const double sigma2 = out.rss / static_cast<double>(out.df_residual);

    // diag((R11^T R11)^{-1}) = squared row norms of R11^{-1}.
    const Eigen::MatrixXd r_inv = r11.solve(Eigen::MatrixXd::Identity(rank, rank));
    Eigen::VectorXd se(k);
    for (Eigen::Index i = 0; i < rank; ++i) se(perm(i)) = std::sqrt(sigma2 * r_inv.row(i).squaredNorm());

    out.columns.reserve(static_cast<std::size_t>(rank));
    out.coefficients.reserve(static_cast<std::size_t>(rank));
    out.t_values.reserve(static_cast<std::size_t>(rank));
    for (Eigen::Index c = 0; c < k; ++c) {
        const auto idx = static_cast<std::size_t>(c);
        if (!kept[idx]) {
            out.dropped_columns.push_back(columns[idx]);
            continue;
        }
        out.columns.push_back(columns[idx]);
        out.coefficients.push_back(beta(c));
        // A zero standard error only arises from an exact fit; the statistic is then unbounded.
        const double t = se(c) > 0.0 ? beta(c) / se(c) : (beta(c) == 0.0 ? 0.0 : std::copysign(HUGE_VAL, beta(c)));
        out.t_values.push_back(t);
    }
    if (with_inference) {
        out.p_values.reserve(out.t_values.size());
        for (double t : out.t_values)
            out.p_values.push_back(student_t_two_sided_p(t, static_cast<double>(out.df_residual)));
    }
    if (intercept) out.intercept_value = y_mean - column_means * beta;
    return out;
}

inline OlsFit fit(const Dataset& d, std::span<const Index> columns, bool intercept = false) {
    OlsWorkspace ws;
    return fit(d, columns, intercept, ws);
}

/// Backward elimination: while the largest p-value among retained columns
/// exceeds `threshold`, drop that column (the larger column index on ties)
/// and refit. The returned fit's `columns` are the survivors.
inline OlsFit stepwise_backward(const Dataset& d, std::span<const Index> columns, double threshold, bool intercept,
                                OlsWorkspace& ws) {
    if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("stepwise threshold must lie in (0,1)");
    std::vector<Index> current(columns.begin(), columns.end());
    for (;;) {
        OlsFit f = fit(d, current, intercept, ws);
        if (f.columns.empty()) return f;
        std::size_t worst = 0;
        for (std::size_t i = 1; i < f.columns.size(); ++i) {
            if (f.p_values[i] > f.p_values[worst] ||
                (f.p_values[i] == f.p_values[worst] && f.columns[i] > f.columns[worst]))
                worst = i;
        }
        if (!(f.p_values[worst] > threshold)) return f;
        std::erase(current, f.columns[worst]);
        if (current.empty() && !intercept) {
            // Null model y ~ 0.
            OlsFit null_fit;
            null_fit.rss = d.y().squaredNorm();
            null_fit.df_residual = d.n();
            null_fit.dropped_columns = std::move(f.dropped_columns);
            return null_fit;
        }
    }
}

inline OlsFit stepwise_backward(const Dataset& d, std::span<const Index> columns, double threshold,
                                bool intercept = false) {
    OlsWorkspace ws;
    return stepwise_backward(d, columns, threshold, intercept, ws);
}

} // namespace swa
