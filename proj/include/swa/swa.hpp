#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "swa/adjust.hpp"
#include "swa/dataset.hpp"
#include "swa/errors.hpp"
#include "swa/ols.hpp"
#include "swa/parallel.hpp"
#include "swa/rng.hpp"

namespace swa {

/// Parameters of one subsampling-winner run.
///
/// Unset optionals resolve against the data: q defaults to s, keep_top to
/// min(s, m), and the Bonferroni/BH family size to the number of features
/// entering the run (the screened p when the dataset is a screened view).
struct SwaConfig {
    Index s = 0;
    Index m = 5000;
    std::optional<Index> q;
    std::optional<Index> keep_top;
    Adjustment adjustment = Adjustment::bonferroni;
    double alpha = 0.05;
    std::optional<Index> bonferroni_divisor;
    bool stepwise_final = false;
    bool stepwise_subsample = false;
    /// Raw p-value above which backward elimination removes a column.
    double stepwise_threshold = 0.05;
    bool intercept = false;
    std::uint64_t seed = 42;

    Index resolved_q() const { return q.value_or(s); }
    Index resolved_keep_top() const { return keep_top.value_or(std::min(s, m)); }
    Index resolved_divisor(Index p) const { return bonferroni_divisor.value_or(p); }

    bool operator==(const SwaConfig&) const = default;
};

inline void validate(const SwaConfig& cfg, const Dataset& d) {
    const Index reserved = cfg.intercept ? 1 : 0;
    if (cfg.s < 1) throw ConfigError("subsample size s must be positive");
    if (cfg.s > d.p()) throw ConfigError("subsample size s = " + std::to_string(cfg.s) + " exceeds p = " + std::to_string(d.p()));
    if (cfg.s + reserved >= d.n())
        throw ConfigError("subsample size s = " + std::to_string(cfg.s) + " must be below n" +
                          (cfg.intercept ? " - 1" : "") + " = " + std::to_string(d.n() - reserved));
    if (cfg.m < 1) throw ConfigError("number of subsamples m must be positive");
    const Index q = cfg.resolved_q();
    if (q < 1 || q > d.p()) throw ConfigError("semifinalist count q = " + std::to_string(q) + " must lie in [1, p]");
    if (q + reserved >= d.n())
        throw ConfigError("semifinalist count q = " + std::to_string(q) + " leaves no residual degrees of freedom");
    const Index keep = cfg.resolved_keep_top();
    if (keep < 1 || keep > cfg.m) throw ConfigError("keep_top = " + std::to_string(keep) + " must lie in [1, m]");
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw ConfigError("alpha must lie in (0,1)");
    if (!(cfg.stepwise_threshold > 0.0 && cfg.stepwise_threshold < 1.0))
        throw ConfigError("stepwise threshold must lie in (0,1)");
    if (cfg.bonferroni_divisor) {
        if (*cfg.bonferroni_divisor < 1) throw ConfigError("multiplicity divisor must be positive");
        if (cfg.adjustment != Adjustment::none && *cfg.bonferroni_divisor < q)
            throw ConfigError("multiplicity divisor " + std::to_string(*cfg.bonferroni_divisor) +
                              " is smaller than q = " + std::to_string(q));
    }
}

/// One subsample regression: the drawn columns, its RSS, and the t statistic
/// of every column that survived the fit (absent columns count as t = 0).
struct SubsampleFit {
    std::vector<Index> columns;
    double rss = 0.0;
    std::vector<std::pair<Index, double>> t_by_feature;
};

/// Per-feature scores. w[j] averages |t| / sqrt(RSS) over the kept submodels
/// in which feature j has a nonzero t; s_count[j] is that number of submodels.
struct ScoreTable {
    std::vector<double> w;
    std::vector<Index> s_count;
    std::vector<double> kept_rss;
};

struct Finalist {
    Index column = 0;  // position in the analysed dataset
    Index index = 0;   // position in the original dataset
    std::string name;
    double coefficient = 0.0;
    double t = 0.0;
    double p_raw = 1.0;
    double p_adjusted = 1.0;
};

/// Where a result came from: the workflow, every subsample size that fed it,
/// and an optional tag naming an external feature source.
struct Provenance {
    std::string workflow = "select";
    std::vector<Index> s_values;
    std::string external_source;
    Index candidate_count = 0;
    Index divisor = 0;
};

struct SelectionResult {
    std::vector<Finalist> finalists;
    std::vector<Index> semifinalists;
    ScoreTable score_table;
    SwaConfig config;
    std::string dataset_fingerprint;
    Provenance provenance;
};

/// RSS values below this are clamped before taking 1/sqrt(RSS).
inline constexpr double kRssFloor = 1e-12;

/// Draws s distinct column indices from [0, p) with Floyd's algorithm.
/// The result depends only on (seed, task_index).
inline std::vector<Index> draw_subsample(Index p, Index s, std::uint64_t task_index, std::uint64_t seed) {
    if (s < 1 || s > p)
        throw ConfigError("cannot draw " + std::to_string(s) + " distinct columns from " + std::to_string(p));
    Rng rng = make_rng(substream(seed, "subsample", {task_index}));
    std::vector<Index> chosen;
    chosen.reserve(s);
    for (Index j = p - s; j < p; ++j) {
        const auto t = static_cast<Index>(uniform_below(rng, j + 1));
        if (std::find(chosen.begin(), chosen.end(), t) == chosen.end())
            chosen.push_back(t);
        else
            chosen.push_back(j);
    }
    return chosen;
}

/// Fits one least-squares model per subsample, m in total, in task order.
inline std::vector<SubsampleFit> run_subsamples(const Dataset& d, const SwaConfig& cfg, std::size_t workers = 0) {
    validate(cfg, d);
    std::vector<SubsampleFit> fits(cfg.m);
    parallel_for(cfg.m, workers, [&](std::size_t task) {
        thread_local OlsWorkspace ws;
        SubsampleFit& out = fits[task];
        out.columns = draw_subsample(d.p(), cfg.s, task, cfg.seed);
        OlsFit f;
        try {
            f = cfg.stepwise_subsample ? stepwise_backward(d, out.columns, cfg.stepwise_threshold, cfg.intercept, ws)
                                       : fit(d, out.columns, cfg.intercept, ws, false);
        } catch (const NumericalError& e) {
            throw NumericalError("subsample task " + std::to_string(task) + ": " + e.what());
        }
        out.rss = f.rss;
        out.t_by_feature.reserve(f.columns.size());
        for (std::size_t i = 0; i < f.columns.size(); ++i) out.t_by_feature.emplace_back(f.columns[i], f.t_values[i]);
        std::sort(out.t_by_feature.begin(), out.t_by_feature.end());
    });
    return fits;
}

/// Scores features from the keep_top submodels with the smallest RSS
/// (ties broken by task order).
inline ScoreTable score_features(std::span<const SubsampleFit> fits, Index keep_top, Index p) {
    if (fits.empty()) throw ConfigError("no subsample fits to score");
    if (keep_top < 1) throw ConfigError("keep_top must be positive");
    const Index keep = std::min<Index>(keep_top, fits.size());

    std::vector<Index> order(fits.size());
    std::iota(order.begin(), order.end(), Index{0});
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                      [&](Index a, Index b) { return fits[a].rss < fits[b].rss || (fits[a].rss == fits[b].rss && a < b); });

    ScoreTable table;
    table.w.assign(p, 0.0);
    table.s_count.assign(p, 0);
    table.kept_rss.reserve(keep);
    for (Index r = 0; r < keep; ++r) {
        const SubsampleFit& f = fits[order[r]];
        table.kept_rss.push_back(f.rss);
        const double inv_root = 1.0 / std::sqrt(std::max(f.rss, kRssFloor));
        for (const auto& [j, t] : f.t_by_feature) {
            if (t == 0.0) continue;
            if (j >= p) throw ConfigError("subsample fit references feature " + std::to_string(j) + " beyond p");
            table.w[j] += std::abs(t) * inv_root;
            ++table.s_count[j];
        }
    }
    for (Index j = 0; j < p; ++j)
        if (table.s_count[j] > 0) table.w[j] /= static_cast<double>(table.s_count[j]);
    return table;
}

/// Feature positions ordered by decreasing weight (ties: smaller index first).
inline std::vector<Index> rank_features(const std::vector<double>& w) {
    std::vector<Index> order(w.size());
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return w[a] > w[b]; });
    return order;
}

inline std::vector<Index> pick_semifinalists(const ScoreTable& table, Index q) {
    if (q < 1 || q > table.w.size()) throw ConfigError("q must lie in [1, p]");
    auto order = rank_features(table.w);
    order.resize(q);
    return order;
}

/// Fits `candidates` (backward-eliminated when `stepwise`) and keeps the
/// columns whose adjusted p-value is at most alpha.
inline std::vector<Finalist> confirm(const Dataset& d, std::span<const Index> candidates, const SwaConfig& cfg,
                                     Index divisor) {
    if (candidates.empty()) return {};
    OlsWorkspace ws;
    const OlsFit f = cfg.stepwise_final ? stepwise_backward(d, candidates, cfg.stepwise_threshold, cfg.intercept, ws)
                                        : fit(d, candidates, cfg.intercept, ws);
    const auto adjusted = adjust(f.p_values, cfg.adjustment, std::max<Index>(divisor, f.p_values.size()));
    std::vector<Finalist> out;
    for (std::size_t i = 0; i < f.columns.size(); ++i) {
        if (!(adjusted[i] <= cfg.alpha)) continue;
        const Index c = f.columns[i];
        out.push_back({c, d.source_index(c), d.name(c), f.coefficients[i], f.t_values[i], f.p_values[i], adjusted[i]});
    }
    return out;
}

/// Full subsampling-winner selection: subsample fits, scoring, semifinalists,
/// and a confirmatory fit with multiplicity control.
inline SelectionResult select(const Dataset& d, const SwaConfig& cfg, std::size_t workers = 0) {
    validate(cfg, d);
    const auto fits = run_subsamples(d, cfg, workers);

    SelectionResult result;
    result.config = cfg;
    result.dataset_fingerprint = fingerprint(d);
    result.score_table = score_features(fits, cfg.resolved_keep_top(), d.p());
    result.semifinalists = pick_semifinalists(result.score_table, cfg.resolved_q());

    const Index divisor = cfg.resolved_divisor(d.p());
    result.finalists = confirm(d, result.semifinalists, cfg, divisor);
    result.provenance.workflow = "select";
    result.provenance.s_values = {cfg.s};
    result.provenance.candidate_count = result.semifinalists.size();
    result.provenance.divisor = divisor;
    return result;
}

} // namespace swa
