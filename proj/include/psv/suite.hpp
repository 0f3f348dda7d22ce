#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include "psv/weights.hpp"

namespace psv {

/// Nonincreasing C^1 piecewise-cubic profile: 1 for t <= -1, 0 for t >= 1.
/// Unit total variation and a closed-form derivative.
inline double smoothstep_profile(double t) {
    if (t <= -1.0) return 1.0;
    if (t >= 1.0) return 0.0;
    double u = 0.5 * (t + 1.0);
    return 1.0 - (3.0 * u * u - 2.0 * u * u * u);
}

inline double smoothstep_profile_derivative(double t) {
    if (t <= -1.0 || t >= 1.0) return 0.0;
    double u = 0.5 * (t + 1.0);
    return -(6.0 * u - 6.0 * u * u) * 0.5;
}

/// Sharp-transition test function phi(x_1 / eps) on its cube.
inline GridFunction transition_function(const Cube& cube, std::int64_t n, double eps) {
    return GridFunction::from_function(
        cube, n, [eps](const Point& x) { return smoothstep_profile(x[0] / eps); });
}

/// Named test function families. Trig polynomials are seeded and recorded.
inline GridFunction suite_function(const std::string& kind, const Cube& cube, std::int64_t n,
                                   std::uint64_t seed = 0) {
    if (kind == "affine") {
        return GridFunction::from_function(cube, n, [&](const Point& x) {
            return cube.dim == 2 ? x[0] + 0.5 * x[1] : x[0];
        });
    }
    if (kind == "bump") {
        Point c = cube.center();
        double w = 0.35 * cube.side;
        return GridFunction::from_function(cube, n, [&](const Point& x) {
            double d2 = (x[0] - c[0]) * (x[0] - c[0]);
            if (cube.dim == 2) d2 += (x[1] - c[1]) * (x[1] - c[1]);
            return std::exp(-d2 / (w * w));
        });
    }
    if (kind == "trig") {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> amp(-1.0, 1.0);
        double a1 = amp(rng), a2 = amp(rng), a3 = amp(rng), a4 = amp(rng);
        double tau = 2.0 * 3.14159265358979323846 / cube.side;
        return GridFunction::from_function(cube, n, [&](const Point& x) {
            double t0 = (x[0] - cube.origin[0]) * tau;
            double t1 = cube.dim == 2 ? (x[1] - cube.origin[1]) * tau : 0.0;
            return a1 * std::sin(t0) + a2 * std::cos(2.0 * t0 + 1.0) +
                   a3 * std::sin(t0 + t1) + a4 * t0 / tau;
        });
    }
    if (kind == "transition") {
        // centered transition with a grid-resolved width
        Point c = cube.center();
        double eps = 8.0 * cube.side / static_cast<double>(n);
        return GridFunction::from_function(cube, n, [&](const Point& x) {
            return smoothstep_profile((x[0] - c[0]) / eps);
        });
    }
    throw std::invalid_argument("unknown function kind: " + kind);
}

/// Named weight families. Power-law weights use the singular-cell rules from
/// the characteristic module; pairs are rejected when the configured
/// characteristic exceeds the cap.
inline GridFunction suite_weight(const std::string& kind, const Cube& cube, std::int64_t n,
                                 std::uint64_t seed = 0) {
    if (kind == "constant") return GridFunction::constant(cube, n, 1.0);
    if (kind == "step") {
        double mid = cube.origin[0] + 0.5 * cube.side;
        return GridFunction::from_function(
            cube, n, [mid](const Point& x) { return x[0] < mid ? 2.0 : 1.0; });
    }
    if (kind == "power") {
        // mild interior singularity, off the cell lattice
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> pos(0.3, 0.7);
        Point c{cube.origin[0] + pos(rng) * cube.side,
                cube.dim == 2 ? cube.origin[1] + pos(rng) * cube.side : 0.0};
        return power_law_weight(cube, n, c, 0.2 * cube.dim);
    }
    if (kind == "power_strong") {
        Point c = cube.center();
        return power_law_weight(cube, n, c, 0.4 * cube.dim);
    }
    throw std::invalid_argument("unknown weight kind: " + kind);
}

/// Generates a two-weight pair of the named kind, enforcing the finite
/// characteristic cap from the suite contract.
inline std::pair<GridFunction, GridFunction> suite_weight_pair(const std::string& kind,
                                                               const Cube& cube, std::int64_t n,
                                                               const ExponentConfig& cfg,
                                                               int depth,
                                                               std::uint64_t seed = 0) {
    GridFunction omega = GridFunction::constant(cube, n, 1.0);
    GridFunction sigma = GridFunction::constant(cube, n, 1.0);
    if (kind == "constant") {
        // identity pair
    } else if (kind == "step") {
        omega = suite_weight("step", cube, n);
        sigma = suite_weight("step", cube, n);
    } else if (kind == "power_pair") {
        // (|x - c|^{-g1 d}, |x - c|^{+g2 d}) in the admissible exponent box
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> pos(0.3, 0.7);
        Point c{cube.origin[0] + pos(rng) * cube.side,
                cube.dim == 2 ? cube.origin[1] + pos(rng) * cube.side : 0.0};
        double g1 = 0.5 / cfg.q;                              // in (0, 1/q)
        omega = power_law_weight(cube, n, c, g1 * cube.dim);
        double inv_pc = cfg.p > 1.0 ? 1.0 / cfg.p_conj() : 0.0;
        if (inv_pc > 0.0) {
            double g2 = 0.5 * inv_pc;
            sigma = power_law_weight(cube, n, c, -g2 * cube.dim);  // positive power
        }
    } else {
        throw std::invalid_argument("unknown weight pair kind: " + kind);
    }
    constexpr double kCharacteristicCap = 1e6;
    if (apq_alpha(omega, sigma, cfg, depth).value > kCharacteristicCap)
        throw std::runtime_error("suite_weight_pair: characteristic cap exceeded");
    return {std::move(omega), std::move(sigma)};
}

/// One-weight families for the A_u corollaries.
inline GridFunction suite_one_weight(const std::string& kind, const Cube& cube, std::int64_t n,
                                     std::uint64_t seed = 0) {
    if (kind == "constant") return GridFunction::constant(cube, n, 1.0);
    if (kind == "step") return suite_weight("step", cube, n);
    if (kind == "power") {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> pos(0.35, 0.65);
        Point c{cube.origin[0] + pos(rng) * cube.side,
                cube.dim == 2 ? cube.origin[1] + pos(rng) * cube.side : 0.0};
        // |x - c|^{-d/2} lies in A_u for u >= 3/2
        return power_law_weight(cube, n, c, 0.5 * cube.dim);
    }
    throw std::invalid_argument("unknown one-weight kind: " + kind);
}

}  // namespace psv
