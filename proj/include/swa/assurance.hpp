#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "swa/dataset.hpp"
#include "swa/errors.hpp"
#include "swa/rng.hpp"
#include "swa/swa.hpp"

namespace swa {

namespace detail {

/// Refits `candidates` (a set of column positions) and reports the union-sized
/// multiplicity adjustment.
inline SelectionResult refit_union(const Dataset& d, std::vector<Index> candidates, const SwaConfig& cfg) {
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    const Index reserved = cfg.intercept ? 1 : 0;
    if (candidates.size() + reserved >= d.n())
        throw NumericalError("combined candidate set of " + std::to_string(candidates.size()) +
                             " features leaves no residual degrees of freedom");

    SelectionResult out;
    out.config = cfg;
    out.dataset_fingerprint = fingerprint(d);
    out.semifinalists = candidates;
    const Index divisor = std::max<Index>(candidates.size(), 1);
    out.finalists = confirm(d, candidates, cfg, divisor);
    out.provenance.candidate_count = candidates.size();
    out.provenance.divisor = divisor;
    return out;
}

} // namespace detail

/// Runs select once per s value, pools every finalist, and refits the pool
/// with the multiplicity family equal to the pool size. A single s value
/// returns the plain select result.
inline SelectionResult double_assurance(const Dataset& d, std::vector<Index> s_values, const SwaConfig& cfg,
                                        std::size_t workers = 0) {
    if (s_values.empty()) throw ConfigError("double assurance needs at least one s value");
    std::sort(s_values.begin(), s_values.end());
    s_values.erase(std::unique(s_values.begin(), s_values.end()), s_values.end());

    std::vector<SwaConfig> runs;
    for (Index s : s_values) {
        SwaConfig c = cfg;
        c.s = s;
        if (s_values.size() > 1) c.seed = substream(cfg.seed, "assure", {s});
        validate(c, d);
        runs.push_back(c);
    }
    if (runs.size() == 1) return select(d, runs.front(), workers);

    std::vector<Index> pool;
    for (const auto& c : runs)
        for (const auto& f : select(d, c, workers).finalists) pool.push_back(f.column);

    SelectionResult out = detail::refit_union(d, pool, cfg);
    out.provenance.workflow = "assure";
    out.provenance.s_values = s_values;
    return out;
}

/// Adds externally selected features (by name) to the SWA finalists and
/// refits the union. Unknown names are reported together.
inline SelectionResult combine_external(const Dataset& d, const SelectionResult& swa_result,
                                        const std::vector<std::string>& external, const SwaConfig& cfg,
                                        const std::string& source_tag = "external") {
    std::vector<Index> pool;
    std::string unknown;
    for (const auto& name : external) {
        const Index j = d.find(name);
        if (j == d.p()) {
            unknown += (unknown.empty() ? "" : ", ") + name;
            continue;
        }
        pool.push_back(j);
    }
    if (!unknown.empty()) throw DataError("unknown feature names: " + unknown);
    for (const auto& f : swa_result.finalists) {
        if (f.column >= d.p() || d.source_index(f.column) != f.index)
            throw DataError("finalist " + f.name + " does not belong to this dataset");
        pool.push_back(f.column);
    }

    SelectionResult out = detail::refit_union(d, pool, cfg);
    out.provenance.workflow = "combine";
    out.provenance.s_values = swa_result.provenance.s_values;
    out.provenance.external_source = source_tag;
    return out;
}

} // namespace swa
