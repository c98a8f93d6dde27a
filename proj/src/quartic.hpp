#pragma once

#include <algorithm>
#include <cmath>

// Closed-form real-root extraction for monic quartics whose roots are known
// to be real (characteristic polynomials of matrices with real spectrum).
// Ferrari's factorization plus two Newton polish steps per root; roundoff
// that would push a root pair complex is collapsed onto the real axis.
// Accuracy degrades to ~1e-6 at exactly multiple roots, which is fine for
// the optimizer hot path; reported quantities are recomputed with the
// robust eigensolvers.

namespace dimcert::detail {

// Largest real root of m^3 + a m^2 + b m + c.
inline double cubic_max_root(double a, double b, double c) {
    const double p = b - a * a / 3.0;
    const double q = c - a * b / 3.0 + 2.0 * a * a * a / 27.0;
    const double shift = -a / 3.0;
    const double disc = 0.25 * q * q + p * p * p / 27.0;
    if (disc > 0.0) {
        const double s = std::sqrt(disc);
        const double u = std::cbrt(-0.5 * q + s) + std::cbrt(-0.5 * q - s);
        return u + shift;
    }
    if (p >= 0.0) return shift;  // p ~ 0, triple root
    const double r = 2.0 * std::sqrt(-p / 3.0);
    const double arg = std::clamp(3.0 * q / (p * r), -1.0, 1.0);
    return r * std::cos(std::acos(arg) / 3.0) + shift;
}

// Roots of l^4 + c3 l^3 + c2 l^2 + c1 l + c0, written to r[0..3] (unsorted).
inline void real_quartic_roots(double c3, double c2, double c1, double c0,
                               double r[4]) {
    // Depress: l = t - c3/4.
    const double sh = -c3 / 4.0;
    const double c3sq = c3 * c3;
    const double p = c2 - 3.0 * c3sq / 8.0;
    const double q = c1 - 0.5 * c3 * c2 + c3sq * c3 / 8.0;
    const double rr = c0 - 0.25 * c3 * c1 + c3sq * c2 / 16.0 -
                      3.0 * c3sq * c3sq / 256.0;

    // Resolvent 8m^3 + 8p m^2 + (2p^2 - 8rr) m - q^2 = 0.
    double m = cubic_max_root(p, 0.25 * p * p - rr, -q * q / 8.0);
    if (m < 0.0) m = 0.0;

    auto solve_quad = [](double bq, double cq, double& r0, double& r1) {
        // t^2 + bq t + cq with real roots (clamp the discriminant).
        const double d = std::sqrt(std::max(0.0, bq * bq - 4.0 * cq));
        const double t0 = -0.5 * (bq + (bq >= 0.0 ? d : -d));
        r0 = t0;
        r1 = (t0 != 0.0) ? cq / t0 : -bq - t0;
    };

    if (m > 1e-28) {
        const double s = std::sqrt(2.0 * m);
        const double half = 0.5 * p + m;
        const double off = q / (2.0 * s);
        solve_quad(-s, half - off, r[0], r[1]);
        solve_quad(+s, half + off, r[2], r[3]);
    } else {
        // Biquadratic (q ~ 0).
        double y0, y1;
        solve_quad(p, rr, y0, y1);
        y0 = std::max(0.0, y0);
        y1 = std::max(0.0, y1);
        r[0] = std::sqrt(y0);
        r[1] = -r[0];
        r[2] = std::sqrt(y1);
        r[3] = -r[2];
    }
    for (int i = 0; i < 4; ++i) r[i] += sh;

    // Newton polish on the undepressed quartic.
    for (int i = 0; i < 4; ++i) {
        double x = r[i];
        for (int it = 0; it < 2; ++it) {
            const double fx = (((x + c3) * x + c2) * x + c1) * x + c0;
            const double dfx = ((4.0 * x + 3.0 * c3) * x + 2.0 * c2) * x + c1;
            if (std::abs(dfx) < 1e-300) break;
            const double step = fx / dfx;
            if (!std::isfinite(step)) break;
            x -= step;
        }
        if (std::isfinite(x)) r[i] = x;
    }
}

}  // namespace dimcert::detail
