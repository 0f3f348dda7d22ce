#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace psv {

/// Conjugate exponent; p = 1 maps to infinity.
inline double conjugate(double p) {
    if (p < 1.0) throw std::invalid_argument("conjugate: requires p >= 1");
    if (p == 1.0) return std::numeric_limits<double>::infinity();
    return p / (p - 1.0);
}

/// The parameter tuple shared by all experiments, with the derived-value
/// rules used throughout: conjugates, the auxiliary p1, the scaling deficit
/// per inequality, and the fractional operator order beta.
struct ExponentConfig {
    int d = 1;          // dimension, 1 or 2
    double p = 1.0;     // 1 <= p <= q < infinity
    double q = 1.0;
    double r = 1.0;     // aggregation exponent, >= 1
    double s = 0.5;     // smoothness, in (0,1)
    double alpha = 0.0; // fractional offset, 0 <= alpha < 1/q + 1/p'
    double u = 1.0;     // one-weight class index, >= 1
    double p0 = 1.0;    // auxiliary exponent in [1, p]

    double p_conj() const { return conjugate(p); }
    double q_conj() const { return conjugate(q); }

    /// 1/p1 = 1 + 1/p - 1/p0.
    double p1() const { return 1.0 / (1.0 + 1.0 / p - 1.0 / p0); }
    double p1_conj() const { return conjugate(p1()); }

    /// beta = alpha + 1/p - 1/q < 1.
    double beta() const { return alpha + 1.0 / p - 1.0 / q; }

    /// gamma = min{q, r}.
    double gamma() const { return std::min(q, r); }

    /// Scaling deficit eps = t/d - (1/p - 1/q) - alpha for smoothness gap t.
    double eps(double t) const { return t / d - (1.0 / p - 1.0 / q) - alpha; }
    double eps_gradient() const { return eps(1.0); }          // gradient inequality
    double eps_fractional() const { return eps(s); }          // fractional inequality
    double eps_embedding() const { return eps(1.0 - s); }     // embedding inequality

    /// Validates the standing assumptions. Throws std::invalid_argument with
    /// the violated constraint named.
    void validate() const {
        if (d != 1 && d != 2) throw std::invalid_argument("requires d in {1,2}");
        if (!(p >= 1.0)) throw std::invalid_argument("requires p >= 1");
        if (!(p <= q)) throw std::invalid_argument("requires p <= q");
        if (!std::isfinite(q)) throw std::invalid_argument("requires q < infinity");
        if (!(r >= 1.0)) throw std::invalid_argument("requires r >= 1");
        if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("requires s in (0,1)");
        if (!(alpha >= 0.0)) throw std::invalid_argument("requires alpha >= 0");
        double alpha_cap = 1.0 / q + 1.0 / p_conj();
        if (!(alpha < alpha_cap)) throw std::invalid_argument("requires alpha < 1/q + 1/p'");
        if (!(u >= 1.0)) throw std::invalid_argument("requires u >= 1");
        if (!(p0 >= 1.0 && p0 <= p)) throw std::invalid_argument("requires p0 in [1, p]");
    }
};

}  // namespace psv
