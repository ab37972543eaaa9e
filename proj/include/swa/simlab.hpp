#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "swa/dataset.hpp"
#include "swa/errors.hpp"
#include "swa/parallel.hpp"
#include "swa/prescreen.hpp"
#include "swa/rng.hpp"
#include "swa/swa.hpp"

namespace swa::sim {

/// Linear model y = X beta + sigma * z with standard normal covariates.
/// When rho > 0 the first `correlated_block` columns have correlation
/// rho^|i-j|; every other column is independent.
struct ScenarioSpec {
    std::string name = "custom";
    Index n = 0;
    Index p = 0;
    std::vector<double> beta;
    double rho = 0.0;
    double sigma = 1.0;
    Index correlated_block = 11;

    std::vector<Index> true_features() const {
        std::vector<Index> out;
        for (Index j = 0; j < beta.size(); ++j)
            if (beta[j] != 0.0) out.push_back(j);
        return out;
    }
    Index p0() const { return true_features().size(); }
};

inline void validate(const ScenarioSpec& spec) {
    if (spec.n < 2) throw ConfigError("scenario needs n >= 2");
    if (spec.p < 1) throw ConfigError("scenario needs p >= 1");
    if (spec.beta.size() != spec.p) throw ConfigError("beta length must equal p");
    if (!(spec.sigma > 0.0)) throw ConfigError("sigma must be positive");
    if (!(spec.rho >= 0.0 && spec.rho < 1.0)) throw ConfigError("rho must lie in [0,1)");
}

/// y = 2 X1 + 3 X2 + 5 X3 + e, n = 20, p = 100.
inline ScenarioSpec make_example1() {
    ScenarioSpec spec;
    spec.name = "example1";
    spec.n = 20;
    spec.p = 100;
    spec.beta.assign(100, 0.0);
    spec.beta[0] = 2.0;
    spec.beta[1] = 3.0;
    spec.beta[2] = 5.0;
    return spec;
}

/// Ten graded signals (0.1 .. 5) on the first ten of `p_total` columns, n = 80.
inline ScenarioSpec make_example2(Index p_total = 100, double rho = 0.0, double sigma = 1.0) {
    if (p_total < 10) throw ConfigError("example2 needs at least 10 columns");
    ScenarioSpec spec;
    spec.name = "example2";
    spec.n = 80;
    spec.p = p_total;
    spec.beta.assign(p_total, 0.0);
    constexpr double signals[10] = {0.1, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 5.0};
    std::copy(std::begin(signals), std::end(signals), spec.beta.begin());
    spec.rho = rho;
    spec.sigma = sigma;
    return spec;
}

/// Example 2's design with every coefficient zero.
inline ScenarioSpec make_null(Index p_total = 100, double sigma = 1.0) {
    ScenarioSpec spec = make_example2(p_total, 0.0, sigma);
    spec.name = "null";
    std::fill(spec.beta.begin(), spec.beta.end(), 0.0);
    return spec;
}

/// Draws one dataset; fully determined by (spec, seed).
inline Dataset draw(const ScenarioSpec& spec, std::uint64_t seed) {
    validate(spec);
    Rng rng = make_rng(substream(seed, "draw"));
    NormalSource normal;
    const auto n = static_cast<Eigen::Index>(spec.n);
    const auto p = static_cast<Eigen::Index>(spec.p);

    Eigen::MatrixXd x(n, p);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < p; ++j) x(i, j) = normal(rng);

    const auto block = static_cast<Eigen::Index>(std::min(spec.correlated_block, spec.p));
    if (spec.rho > 0.0 && block > 1) {
        Eigen::MatrixXd cov(block, block);
        for (Eigen::Index a = 0; a < block; ++a)
            for (Eigen::Index b = 0; b < block; ++b)
                cov(a, b) = std::pow(spec.rho, static_cast<double>(std::abs(a - b)));
        const Eigen::MatrixXd lower = Eigen::LLT<Eigen::MatrixXd>(cov).matrixL();
        // Row i of the block becomes L z_i.
        x.leftCols(block) = x.leftCols(block) * lower.transpose();
    }

    Eigen::VectorXd noise(n);
    for (Eigen::Index i = 0; i < n; ++i) noise(i) = normal(rng);
    const Eigen::Map<const Eigen::VectorXd> beta(spec.beta.data(), p);
    Eigen::VectorXd y = x * beta + spec.sigma * noise;
    return Dataset(std::move(x), std::move(y));
}

struct PlainPipeline {};
struct PrescreenTopK {
    Index k = 100;
};
using Pipeline = std::variant<PlainPipeline, PrescreenTopK>;

/// Per-trial outcome: how many true and false features became finalists.
struct TrialOutcome {
    Index true_captured = 0;
    Index false_captured = 0;
};

/// Capture statistics over repeated trials.
///
/// true_capture_cdf[k] is the percentage of trials capturing at least k true
/// features, for every k in 0..p0. false_count_histogram[c] counts trials
/// with exactly c false finalists, for every c in 0..max observed.
struct CaptureTable {
    Index trials = 0;
    std::map<Index, double> true_capture_cdf;
    std::map<Index, Index> false_count_histogram;
};

inline CaptureTable aggregate(std::span<const TrialOutcome> outcomes, Index p0) {
    CaptureTable table;
    table.trials = outcomes.size();
    std::vector<Index> at_least(p0 + 1, 0);
    Index max_false = 0;
    for (const auto& o : outcomes) {
        for (Index k = 0; k <= std::min(o.true_captured, p0); ++k) ++at_least[k];
        max_false = std::max(max_false, o.false_captured);
    }
    for (Index k = 0; k <= p0; ++k)
        table.true_capture_cdf[k] = outcomes.empty() ? 0.0 : 100.0 * static_cast<double>(at_least[k]) / static_cast<double>(outcomes.size());
    for (Index c = 0; c <= max_false; ++c) table.false_count_histogram[c] = 0;
    for (const auto& o : outcomes) ++table.false_count_histogram[o.false_captured];
    return table;
}

struct TrialReport {
    CaptureTable table;
    std::vector<TrialOutcome> outcomes;
};

/// Runs one trial in isolation: draw, optional prescreen, select, count.
inline TrialOutcome run_trial(const ScenarioSpec& spec, const SwaConfig& cfg, const Pipeline& pipeline,
                              std::uint64_t trial, std::size_t workers = 1) {
    const Dataset full = draw(spec, substream(cfg.seed, "trial-data", {trial}));
    SwaConfig trial_cfg = cfg;
    trial_cfg.seed = substream(cfg.seed, "trial-swa", {trial});

    SelectionResult result;
    if (const auto* screen = std::get_if<PrescreenTopK>(&pipeline)) {
        const ScreenResult sr = screen_top_k(full, screen->k, 1);
        result = select(reduce(full, sr), trial_cfg, workers);
    } else {
        result = select(full, trial_cfg, workers);
    }

    TrialOutcome out;
    for (const auto& f : result.finalists) {
        if (spec.beta.at(f.index) != 0.0)
            ++out.true_captured;
        else
            ++out.false_captured;
    }
    return out;
}

/// Monte-Carlo harness. Trials are independent, each seeded from
/// (cfg.seed, trial index), and run concurrently on `workers` threads.
inline TrialReport run_trials(const ScenarioSpec& spec, const SwaConfig& cfg, Index trials, const Pipeline& pipeline,
                              std::size_t workers = 0) {
    validate(spec);
    if (trials < 1) throw ConfigError("trials must be positive");
    TrialReport report;
    report.outcomes.resize(trials);
    parallel_for(trials, workers, [&](std::size_t t) {
        try {
            report.outcomes[t] = run_trial(spec, cfg, pipeline, t, 1);
        } catch (const NumericalError& e) {
            throw NumericalError("trial " + std::to_string(t) + ": " + e.what());
        } catch (const ConfigError& e) {
            throw ConfigError("trial " + std::to_string(t) + ": " + e.what());
        }
    });
    report.table = aggregate(report.outcomes, spec.p0());
    return report;
}

} // namespace swa::sim
