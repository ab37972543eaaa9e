#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "swa/dataset.hpp"
#include "swa/errors.hpp"
#include "swa/io.hpp"
#include "swa/rng.hpp"
#include "swa/swa.hpp"

namespace swa {

struct RankedFeature {
    Index feature = 0;  // original index
    std::string name;
    double w = 0.0;
};

/// Top of the sorted weight vector for one subsample size.
struct WeightCurve {
    Index s = 0;
    std::vector<RankedFeature> ranked;

    std::vector<double> weights() const {
        std::vector<double> out;
        out.reserve(ranked.size());
        for (const auto& r : ranked) out.push_back(r.w);
        return out;
    }
};

enum class Stability { stable, relatively_stable, unstable };

inline std::string_view to_string(Stability s) {
    switch (s) {
    case Stability::stable: return "stable";
    case Stability::relatively_stable: return "relatively-stable";
    case Stability::unstable: return "unstable";
    }
    return "unstable";
}

struct ElbowOptions {
    double drop_factor = 3.0;
    /// Largest arm size considered; 0 means the first half of the curve.
    Index leading = 0;
};

struct TuneOptions {
    Index display = 40;
    double drop_factor = 3.0;
    /// A panel is assessed only when at least this share of its displayed
    /// weights is positive; otherwise there is no tail to break away from.
    double min_coverage = 0.5;
    bool intercept = false;
    std::size_t workers = 0;
};

struct TuneReport {
    std::vector<WeightCurve> curves;
    std::map<Index, std::optional<Index>> elbows;   // s -> arm size
    std::map<Index, std::vector<Index>> upper_arms; // s -> sorted original indices
    std::map<Index, Stability> stability;
    std::optional<Index> recommended_s;
    /// Grid values worth adding when the result is inconclusive.
    std::vector<Index> suggested_s;
    Index m = 0;
    std::uint64_t seed = 0;
    TuneOptions options;
};

namespace detail {

inline double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    const double hi = *mid;
    if (v.size() % 2 == 1) return hi;
    const double lo = *std::max_element(v.begin(), mid);
    return 0.5 * (lo + hi);
}

} // namespace detail

/// Elbow of a nonincreasing weight sequence, as the size of the upper arm.
///
/// Over the leading segment, picks k maximizing the second difference
/// (w[k-1] - w[k]) - (w[k] - w[k+1]) divided by the spread left below the
/// break, w[k] - w.back(). The break counts only if the drop w[k-1] - w[k]
/// exceeds drop_factor times the median gap of the tail after k.
inline std::optional<Index> detect_elbow(std::span<const double> w, const ElbowOptions& opts = {}) {
    const Index len = w.size();
    if (len < 3) return std::nullopt;
    const Index lead = std::min<Index>(opts.leading ? opts.leading : (len + 1) / 2, len - 2);
    if (lead < 1) return std::nullopt;

    std::vector<double> gaps(len - 1);
    for (Index i = 0; i + 1 < len; ++i) gaps[i] = w[i] - w[i + 1];

    constexpr double inf = std::numeric_limits<double>::infinity();
    Index best = 0;
    double best_score = -inf;
    for (Index k = 1; k <= lead; ++k) {
        const double bend = gaps[k - 1] - gaps[k];
        const double spread = w[k] - w[len - 1];
        double score;
        if (spread > 0.0)
            score = bend / spread;
        else
            score = bend > 0.0 ? inf : (bend < 0.0 ? -inf : 0.0);
        if (score > best_score || best == 0) {
            best_score = score;
            best = k;
        }
    }
    const double tail = detail::median(std::vector<double>(gaps.begin() + static_cast<std::ptrdiff_t>(best), gaps.end()));
    if (!(gaps[best - 1] > opts.drop_factor * tail)) return std::nullopt;
    return best;
}

inline WeightCurve make_curve(const Dataset& d, const ScoreTable& table, Index s, Index display) {
    WeightCurve curve;
    curve.s = s;
    auto order = rank_features(table.w);
    order.resize(std::min<Index>(display, order.size()));
    for (Index c : order) curve.ranked.push_back({d.source_index(c), d.name(c), table.w[c]});
    return curve;
}

namespace detail {

inline bool intersects(const std::vector<Index>& a, const std::vector<Index>& b) {
    for (Index x : a)
        if (std::binary_search(b.begin(), b.end(), x)) return true;
    return false;
}

/// Values to add around panels that showed an elbow (all panels if none did).
inline std::vector<Index> suggest_neighbours(const std::vector<Index>& grid, const TuneReport& r, Index s_max) {
    std::vector<Index> out;
    bool any_elbow = false;
    for (Index s : grid) any_elbow = any_elbow || r.elbows.at(s).has_value();
    for (Index i = 0; i < grid.size(); ++i) {
        const Index s = grid[i];
        if (any_elbow && !r.elbows.at(s)) continue;
        const Index step = std::max<Index>(1, s / 4);
        const Index below = i > 0 ? (grid[i - 1] + s) / 2 : (s > step ? s - step : 1);
        const Index above = i + 1 < grid.size() ? (s + grid[i + 1] + 1) / 2 : s + step;
        for (Index c : {below, above})
            if (c >= 1 && c <= s_max && !std::binary_search(grid.begin(), grid.end(), c)) out.push_back(c);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

} // namespace detail

/// Multipanel tuning of s: one scored SWA run per grid value, elbows and
/// upper arms per panel, stability against adjacent panels, and the smallest
/// stable or relatively stable s.
inline TuneReport tune(const Dataset& d, const std::vector<Index>& grid, Index m, std::uint64_t seed,
                       const TuneOptions& opts = {}) {
    if (grid.empty()) throw ConfigError("s grid is empty");
    for (Index i = 1; i < grid.size(); ++i)
        if (grid[i] <= grid[i - 1]) throw ConfigError("s grid must be strictly increasing");
    for (Index s : grid)
        if (s >= d.n())
            throw ConfigError("grid value s = " + std::to_string(s) + " is not below n = " + std::to_string(d.n()));
    if (m < 1) throw ConfigError("number of subsamples m must be positive");
    if (opts.display < 3) throw ConfigError("display count must be at least 3");
    if (!(opts.drop_factor > 0.0)) throw ConfigError("drop factor must be positive");
    if (!(opts.min_coverage >= 0.0 && opts.min_coverage <= 1.0)) throw ConfigError("coverage must lie in [0,1]");

    TuneReport report;
    report.m = m;
    report.seed = seed;
    report.options = opts;
    for (Index s : grid) {
        SwaConfig cfg;
        cfg.s = s;
        cfg.m = m;
        cfg.intercept = opts.intercept;
        cfg.seed = substream(seed, "tune", {s});
        const auto fits = run_subsamples(d, cfg, opts.workers);
        const ScoreTable table = score_features(fits, cfg.resolved_keep_top(), d.p());
        report.curves.push_back(make_curve(d, table, s, opts.display));
    }

    for (const auto& curve : report.curves) {
        std::vector<double> w = curve.weights();
        const auto positive = static_cast<Index>(std::count_if(w.begin(), w.end(), [](double v) { return v > 0.0; }));
        std::optional<Index> elbow;
        if (static_cast<double>(positive) >= opts.min_coverage * static_cast<double>(w.size())) {
            w.resize(positive);
            elbow = detect_elbow(w, {opts.drop_factor, opts.display / 2});
        }
        report.elbows[curve.s] = elbow;
        if (elbow) {
            std::vector<Index> arm;
            for (Index k = 0; k < *elbow; ++k) arm.push_back(curve.ranked[k].feature);
            std::sort(arm.begin(), arm.end());
            report.upper_arms[curve.s] = std::move(arm);
        }
    }

    for (Index i = 0; i < grid.size(); ++i) {
        const Index s = grid[i];
        Stability st = Stability::unstable;
        const auto self = report.upper_arms.find(s);
        if (self != report.upper_arms.end() && grid.size() > 1) {
            const auto next = i + 1 < grid.size() ? report.upper_arms.find(grid[i + 1]) : report.upper_arms.end();
            const auto prev = i > 0 ? report.upper_arms.find(grid[i - 1]) : report.upper_arms.end();
            if (next != report.upper_arms.end() && next->second == self->second)
                st = Stability::stable;
            else if ((next != report.upper_arms.end() && detail::intersects(self->second, next->second)) ||
                     (prev != report.upper_arms.end() && detail::intersects(self->second, prev->second)))
                st = Stability::relatively_stable;
        }
        report.stability[s] = st;
        if (!report.recommended_s && st != Stability::unstable) report.recommended_s = s;
    }
    if (!report.recommended_s) {
        const Index s_max = std::min<Index>(d.p(), d.n() - (opts.intercept ? 2 : 1));
        report.suggested_s = detail::suggest_neighbours(grid, report, s_max);
    }
    return report;
}

enum class PanelScale { fixed, free, both };

inline PanelScale parse_panel_scale(std::string_view s) {
    if (s == "fixed") return PanelScale::fixed;
    if (s == "free") return PanelScale::free;
    if (s == "both") return PanelScale::both;
    throw ConfigError("unknown panel scale '" + std::string(s) + "' (expected fixed, free or both)");
}

inline std::string curve_csv(const WeightCurve& curve) {
    std::string out = "rank,feature,name,w\n";
    for (Index r = 0; r < curve.ranked.size(); ++r) {
        const auto& f = curve.ranked[r];
        out += std::to_string(r + 1) + "," + std::to_string(f.feature) + "," + f.name + "," +
               detail::format_double(f.w) + "\n";
    }
    return out;
}

/// Static SVG with one scree panel per curve. `fixed` shares the y-axis
/// maximum across panels; `free` scales each panel to its own top weight.
inline std::string panels_svg(const TuneReport& report, bool fixed) {
    constexpr int cols = 3, pw = 300, ph = 220, ml = 48, mr = 12, mt = 28, mb = 30;
    const int rows = static_cast<int>((report.curves.size() + cols - 1) / cols);
    double global = 0.0;
    for (const auto& c : report.curves)
        if (!c.ranked.empty()) global = std::max(global, c.ranked.front().w);

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << cols * pw << "\" height=\"" << rows * ph
        << "\" font-family=\"sans-serif\" font-size=\"11\" data-scale=\"" << (fixed ? "fixed" : "free") << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (Index i = 0; i < report.curves.size(); ++i) {
        const auto& c = report.curves[i];
        const double top = c.ranked.empty() ? 0.0 : c.ranked.front().w;
        const double ymax_raw = fixed ? global : top;
        const double ymax = ymax_raw > 0.0 ? ymax_raw : 1.0;
        const int ox = static_cast<int>(i % cols) * pw, oy = static_cast<int>(i / cols) * ph;
        const double x0 = ox + ml, x1 = ox + pw - mr, y0 = oy + ph - mb, y1 = oy + mt;
        const double count = static_cast<double>(std::max<Index>(c.ranked.size(), 2) - 1);
        auto px = [&](Index r) { return x0 + (x1 - x0) * static_cast<double>(r) / count; };
        auto py = [&](double w) { return y0 - (y0 - y1) * w / ymax; };

        svg << "<g class=\"panel\" data-s=\"" << c.s << "\" data-ymin=\"0\" data-ymax=\""
            << detail::format_double(ymax_raw) << "\">\n";
        svg << "<text x=\"" << ox + pw / 2 << "\" y=\"" << oy + 16 << "\" text-anchor=\"middle\">s = " << c.s << "</text>\n";
        svg << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x1 << "\" y2=\"" << y0 << "\" stroke=\"black\"/>\n";
        svg << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0 << "\" y2=\"" << y1 << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << x0 - 4 << "\" y=\"" << y1 + 4 << "\" text-anchor=\"end\">"
            << detail::format_double(std::round(ymax_raw * 1000.0) / 1000.0) << "</text>\n";
        svg << "<text x=\"" << x0 - 4 << "\" y=\"" << y0 << "\" text-anchor=\"end\">0</text>\n";
        svg << "<polyline fill=\"none\" stroke=\"steelblue\" points=\"";
        for (Index r = 0; r < c.ranked.size(); ++r) svg << (r ? " " : "") << px(r) << "," << py(c.ranked[r].w);
        svg << "\"/>\n";
        for (Index r = 0; r < c.ranked.size(); ++r)
            svg << "<circle cx=\"" << px(r) << "\" cy=\"" << py(c.ranked[r].w) << "\" r=\"2\" fill=\"steelblue\"><title>"
                << c.ranked[r].name << "</title></circle>\n";
        const auto e = report.elbows.find(c.s);
        if (e != report.elbows.end() && e->second && *e->second < c.ranked.size()) {
            const double xe = 0.5 * (px(*e->second - 1) + px(*e->second));
            svg << "<line class=\"elbow\" data-rank=\"" << *e->second << "\" x1=\"" << xe << "\" y1=\"" << y0
                << "\" x2=\"" << xe << "\" y2=\"" << y1 << "\" stroke=\"firebrick\" stroke-dasharray=\"4 3\"/>\n";
            svg << "<text x=\"" << xe + 4 << "\" y=\"" << y1 + 10 << "\" fill=\"firebrick\">elbow " << *e->second << "</text>\n";
        }
        svg << "</g>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

/// Writes weights_s<s>.csv for every panel plus panels_fixed.svg and/or
/// panels_free.svg. Returns the written paths.
inline std::vector<std::filesystem::path> emit_panels(const TuneReport& report, const std::filesystem::path& dir,
                                                      PanelScale scale = PanelScale::both) {
    if (report.curves.empty()) throw ConfigError("tune report has no panels");
    ensure_directory(dir);
    std::vector<std::filesystem::path> written;
    for (const auto& c : report.curves) {
        const auto path = dir / ("weights_s" + std::to_string(c.s) + ".csv");
        write_atomic(path, curve_csv(c));
        written.push_back(path);
    }
    if (scale != PanelScale::free) {
        write_atomic(dir / "panels_fixed.svg", panels_svg(report, true));
        written.push_back(dir / "panels_fixed.svg");
    }
    if (scale != PanelScale::fixed) {
        write_atomic(dir / "panels_free.svg", panels_svg(report, false));
        written.push_back(dir / "panels_free.svg");
    }
    return written;
}

} // namespace swa
