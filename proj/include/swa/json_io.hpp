#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "swa/dataset.hpp"
#include "swa/mbounds.hpp"
#include "swa/prescreen.hpp"
#include "swa/simlab.hpp"
#include "swa/swa.hpp"
#include "swa/tuning.hpp"

namespace swa {

using Json = nlohmann::ordered_json;

/// Indentation used by every emitted document.
inline constexpr int kJsonIndent = 2;

inline std::string dump(const Json& j) { return j.dump(kJsonIndent) + "\n"; }

/// Config with every optional resolved against a dataset of p features.
inline Json config_json(const SwaConfig& cfg, Index p) {
    Json j;
    j["s"] = cfg.s;
    j["m"] = cfg.m;
    j["q"] = cfg.resolved_q();
    j["keep_top"] = cfg.resolved_keep_top();
    j["adjust"] = std::string(to_string(cfg.adjustment));
    j["alpha"] = cfg.alpha;
    j["divisor"] = cfg.resolved_divisor(p);
    j["stepwise_final"] = cfg.stepwise_final;
    j["stepwise_subsample"] = cfg.stepwise_subsample;
    j["stepwise_threshold"] = cfg.stepwise_threshold;
    j["intercept"] = cfg.intercept;
    j["seed"] = cfg.seed;
    return j;
}

inline Json selection_json(const SelectionResult& r, const Dataset& d) {
    Json j;
    j["workflow"] = r.provenance.workflow;
    j["config"] = config_json(r.config, d.p());
    j["dataset"] = {{"fingerprint", r.dataset_fingerprint}, {"n", d.n()}, {"p", d.p()}};

    const bool scored = r.score_table.w.size() == d.p();
    Json semis = Json::array();
    for (Index c : r.semifinalists) {
        Json e;
        e["index"] = d.source_index(c);
        e["name"] = d.name(c);
        if (scored) {
            e["w"] = r.score_table.w[c];
            e["s_count"] = r.score_table.s_count[c];
        }
        semis.push_back(std::move(e));
    }
    j["semifinalists"] = std::move(semis);

    Json fins = Json::array();
    for (const auto& f : r.finalists)
        fins.push_back({{"index", f.index},
                        {"name", f.name},
                        {"coefficient", f.coefficient},
                        {"t", f.t},
                        {"p_raw", f.p_raw},
                        {"p_adjusted", f.p_adjusted}});
    j["finalists"] = std::move(fins);

    if (!r.score_table.kept_rss.empty()) {
        std::vector<double> rss = r.score_table.kept_rss;
        std::sort(rss.begin(), rss.end());
        j["kept_rss"] = {{"count", rss.size()}, {"min", rss.front()}, {"median", detail::median(rss)}, {"max", rss.back()}};
    }

    Json prov;
    prov["workflow"] = r.provenance.workflow;
    prov["s_values"] = r.provenance.s_values;
    if (!r.provenance.external_source.empty()) prov["external_source"] = r.provenance.external_source;
    prov["candidate_count"] = r.provenance.candidate_count;
    prov["divisor"] = r.provenance.divisor;
    j["provenance"] = std::move(prov);
    return j;
}

/// One row per feature: original index, name, weight and submodel count.
inline std::string score_table_csv(const ScoreTable& t, const Dataset& d) {
    std::string out = "index,name,w,s_count\n";
    for (Index c = 0; c < t.w.size(); ++c)
        out += std::to_string(d.source_index(c)) + "," + d.name(c) + "," + detail::format_double(t.w[c]) + "," +
               std::to_string(t.s_count[c]) + "\n";
    return out;
}

inline std::string finalists_csv(const SelectionResult& r) {
    std::string out = "index,name,coefficient,t,p_raw,p_adjusted\n";
    for (const auto& f : r.finalists)
        out += std::to_string(f.index) + "," + f.name + "," + detail::format_double(f.coefficient) + "," +
               detail::format_double(f.t) + "," + detail::format_double(f.p_raw) + "," +
               detail::format_double(f.p_adjusted) + "\n";
    return out;
}

inline Json mbounds_json(long long p, long long p0, long long s, double gamma, const MBounds& b) {
    Json j;
    j["config"] = {{"p", p}, {"p0", p0}, {"s", s}, {"gamma", gamma}};
    j["alpha_lower"] = b.alpha_lower;
    j["alpha_upper"] = b.alpha_upper;
    j["m_lower"] = b.lower;
    j["m_upper"] = b.upper;
    j["alpha_exact"] = capture_probability(p, p0, s);
    j["m_exact"] = exact_m(p, p0, s, gamma);
    return j;
}

inline Json tune_json(const TuneReport& r) {
    Json j;
    j["config"] = {{"m", r.m},
                   {"seed", r.seed},
                   {"display", r.options.display},
                   {"drop_factor", r.options.drop_factor},
                   {"min_coverage", r.options.min_coverage},
                   {"intercept", r.options.intercept}};
    Json panels = Json::array();
    for (const auto& c : r.curves) {
        Json p;
        p["s"] = c.s;
        const auto& e = r.elbows.at(c.s);
        p["elbow"] = e ? Json(*e) : Json("none");
        const auto arm = r.upper_arms.find(c.s);
        p["upper_arm"] = arm == r.upper_arms.end() ? Json::array() : Json(arm->second);
        p["stability"] = std::string(to_string(r.stability.at(c.s)));
        Json ranked = Json::array();
        for (const auto& f : c.ranked) ranked.push_back({{"feature", f.feature}, {"name", f.name}, {"w", f.w}});
        p["ranked"] = std::move(ranked);
        panels.push_back(std::move(p));
    }
    j["panels"] = std::move(panels);
    j["recommended_s"] = r.recommended_s ? Json(*r.recommended_s) : Json("inconclusive");
    j["suggested_s"] = r.suggested_s;
    return j;
}

inline Json screen_json(const ScreenResult& r, const Dataset& d) {
    Json j;
    if (r.rule.kind == ScreenRule::Kind::top_k)
        j["config"] = {{"rule", "top_k"}, {"k", r.rule.k}};
    else
        j["config"] = {{"rule", "threshold"}, {"r_min", r.rule.r_min}};
    j["dataset"] = {{"fingerprint", fingerprint(d)}, {"n", d.n()}, {"p", d.p()}};
    Json kept = Json::array();
    for (Index c : r.kept)
        kept.push_back({{"index", d.source_index(c)}, {"name", d.name(c)}, {"correlation", r.correlations[c]}});
    j["kept"] = std::move(kept);
    Json flat = Json::array();
    for (Index c : r.constant_columns) flat.push_back(d.name(c));
    j["constant_columns"] = std::move(flat);
    return j;
}

inline std::string screen_csv(const ScreenResult& r, const Dataset& d) {
    std::string out = "rank,index,name,correlation\n";
    for (Index k = 0; k < r.kept.size(); ++k) {
        const Index c = r.kept[k];
        out += std::to_string(k + 1) + "," + std::to_string(d.source_index(c)) + "," + d.name(c) + "," +
               detail::format_double(r.correlations[c]) + "\n";
    }
    return out;
}

inline Json capture_json(const sim::CaptureTable& t) {
    Json j;
    j["trials"] = t.trials;
    Json cdf = Json::array();
    for (const auto& [k, pct] : t.true_capture_cdf) cdf.push_back({{"at_least", k}, {"percent", pct}});
    j["true_capture_cdf"] = std::move(cdf);
    Json hist = Json::array();
    for (const auto& [c, n] : t.false_count_histogram) hist.push_back({{"false_count", c}, {"trials", n}});
    j["false_count_histogram"] = std::move(hist);
    const auto zero = t.false_count_histogram.find(0);
    j["zero_false_fraction"] = t.trials == 0 || zero == t.false_count_histogram.end()
                                   ? 0.0
                                   : static_cast<double>(zero->second) / static_cast<double>(t.trials);
    return j;
}

inline std::string capture_csv(const sim::CaptureTable& t) {
    std::string out = "table,count,value\n";
    for (const auto& [k, pct] : t.true_capture_cdf)
        out += "true_at_least," + std::to_string(k) + "," + detail::format_double(pct) + "\n";
    for (const auto& [c, n] : t.false_count_histogram)
        out += "false_exactly," + std::to_string(c) + "," + std::to_string(n) + "\n";
    return out;
}

} // namespace swa
