#pragma once

#include <algorithm>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "swa/errors.hpp"

namespace swa {

enum class Adjustment { bonferroni, bh, none };

inline std::string_view to_string(Adjustment a) {
    switch (a) {
    case Adjustment::bonferroni: return "bonferroni";
    case Adjustment::bh: return "bh";
    case Adjustment::none: return "none";
    }
    return "none";
}

inline Adjustment parse_adjustment(std::string_view s) {
    if (s == "bonferroni") return Adjustment::bonferroni;
    if (s == "bh") return Adjustment::bh;
    if (s == "none") return Adjustment::none;
    throw ConfigError("unknown adjustment '" + std::string(s) + "' (expected bonferroni, bh or none)");
}

/// Multiplicity-adjusted p-values.
///
/// `divisor` is the size of the testing family. It may exceed the number of
/// p-values supplied, e.g. when the family is every feature that entered the
/// search but only the semifinalists were tested.
///   bonferroni: min(1, p * divisor)
///   bh:         Benjamini-Hochberg step-up, min over j >= k of p_(j) * divisor / j
inline std::vector<double> adjust(std::span<const double> p_values, Adjustment method, std::size_t divisor) {
    for (double p : p_values)
        if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("p-value outside [0,1]: " + std::to_string(p));
    std::vector<double> out(p_values.begin(), p_values.end());
    if (method == Adjustment::none || out.empty()) return out;
    if (divisor < out.size())
        throw ConfigError("multiplicity divisor " + std::to_string(divisor) + " is smaller than the number of tests " +
                          std::to_string(out.size()));
    const double m = static_cast<double>(divisor);

    if (method == Adjustment::bonferroni) {
        for (double& p : out) p = std::min(1.0, p * m);
        return out;
    }

    std::vector<std::size_t> order(out.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });
    double running = 1.0;
    for (std::size_t r = order.size(); r-- > 0;) {
        const double scaled = p_values[order[r]] * m / static_cast<double>(r + 1);
        running = std::min(running, scaled);
        out[order[r]] = std::min(1.0, running);
    }
    return out;
}

} // namespace swa
