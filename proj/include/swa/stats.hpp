#pragma once

#include <boost/math/special_functions/beta.hpp>

#include <cmath>
#include <limits>

#include "swa/errors.hpp"

namespace swa {

/// Two-sided tail probability P(|T| >= |t|) of the central Student-t
/// distribution with `df` degrees of freedom.
///
/// Uses the identity P = I_x(df/2, 1/2) with x = df / (df + t^2), where I is
/// the regularized incomplete beta function.
inline double student_t_two_sided_p(double t, double df) {
    if (!(df > 0.0)) throw NumericalError("student-t requires positive degrees of freedom");
    if (std::isnan(t)) throw NumericalError("student-t statistic is NaN");
    if (std::isinf(t)) return 0.0;
    const double t2 = t * t;
    if (t2 == 0.0) return 1.0;
    // For large t^2, x = df/(df+t^2) loses nothing; for small t^2 use the
    // complement to avoid 1 - tiny cancellation.
    if (t2 < df) {
        const double x_c = t2 / (df + t2);
        return boost::math::ibetac(0.5, 0.5 * df, x_c);
    }
    const double x = df / (df + t2);
    return boost::math::ibeta(0.5 * df, 0.5, x);
}

} // namespace swa
