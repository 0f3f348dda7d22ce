#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "psv/norms.hpp"

namespace psv {

/// Three-case truncation: 0 below t, shifted in (t, 2t), capped at t above 2t.
inline GridFunction truncate(const GridFunction& v, double t) {
    if (!(t > 0.0)) throw std::invalid_argument("truncate: requires t > 0");
    GridFunction out(v.cube, v.n);
    for (std::size_t i = 0; i < v.samples.size(); ++i) {
        double x = v.samples[i];
        if (x < 0.0) throw std::domain_error("truncate: requires v >= 0");
        out.samples[i] = x <= t ? 0.0 : (x < 2.0 * t ? x - t : t);
    }
    return out;
}

/// Dyadic height layers lambda_k = 2^k lambda, k >= -1, with the level sets
/// E_k = {v > lambda_k} and layers A_k = E_{k-1} \ E_k as exact cell sets.
/// Levels are materialized up to the first empty E_k.
struct TruncationLayers {
    double lambda = 0.0;
    int k_min = -1;
    std::vector<double> levels;                       // levels[i] = lambda_{k_min + i}
    std::vector<std::vector<std::int64_t>> level_sets;  // E_{k_min + i}
    std::vector<std::vector<std::int64_t>> layers;      // A_k for k = 0 .. (index k)

    int k_max() const { return k_min + static_cast<int>(levels.size()) - 1; }
};

inline TruncationLayers layer_cascade(const GridFunction& v, double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("layer_cascade: requires lambda > 0");
    for (double x : v.samples)
        if (x < 0.0) throw std::domain_error("layer_cascade: requires v >= 0");
    TruncationLayers out;
    out.lambda = lambda;
    int k = out.k_min;
    while (true) {
        double level = std::ldexp(lambda, k);  // 2^k lambda, exact scaling
        std::vector<std::int64_t> ek;
        for (std::size_t i = 0; i < v.samples.size(); ++i)
            if (v.samples[i] > level) ek.push_back(static_cast<std::int64_t>(i));
        bool empty = ek.empty();
        out.levels.push_back(level);
        out.level_sets.push_back(std::move(ek));
        if (k >= 0) {
            // A_k = E_{k-1} \ E_k = {lambda_{k-1} < v <= lambda_k}
            double lo = std::ldexp(lambda, k - 1);
            std::vector<std::int64_t> ak;
            for (std::size_t i = 0; i < v.samples.size(); ++i)
                if (v.samples[i] > lo && v.samples[i] <= level)
                    ak.push_back(static_cast<std::int64_t>(i));
            out.layers.push_back(std::move(ak));
        }
        if (empty) break;
        ++k;
    }
    return out;
}

/// Outcome of a weak-to-strong upgrade run. c_weak is the measured
/// hypothesis constant unless one was supplied.
struct WeakStrongResult {
    double strong_value = 0.0;
    double bound = 0.0;
    double c_weak = 0.0;
    bool pass = true;
};

namespace detail {

inline GridFunction oscillation_of(const GridFunction& u) {
    double mean = block_mean(u, whole_block(u));
    GridFunction v(u.cube, u.n);
    for (std::size_t i = 0; i < u.samples.size(); ++i)
        v.samples[i] = std::abs(u.samples[i] - mean);
    return v;
}

/// Max ratio of the two hypothesis inequalities for a single function g,
/// against the supplied right-hand side value.
inline double hypothesis_ratio(const GridFunction& g, const GridFunction& omega,
                               const GridFunction& sigma, double q, double rhs) {
    double mean = block_mean(g, whole_block(g));
    GridFunction osc(g.cube, g.n);
    for (std::size_t i = 0; i < g.samples.size(); ++i) osc.samples[i] = g.samples[i] - mean;
    double weak = weak_lp_norm(osc, omega, q);
    GridFunction one = GridFunction::constant(g.cube, g.n, 1.0);
    GridFunction wq = omega;
    for (double& v : wq.samples) v = std::pow(v, q);
    KahanSum mass;
    for (double v : wq.samples) mass.add(v);
    double wq_q = std::pow(mass.value() * g.cell_volume(), 1.0 / q);
    double l1 = lp_norm(osc, one, 1.0);
    double lhs = std::max(weak, wq_q / g.cube.volume() * l1);
    if (rhs == 0.0) return lhs == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return lhs / rhs;
}

}  // namespace detail

/// Weak (q,p) + scaled L^1 hypotheses upgraded to the strong (q,p) Poincare
/// bound with constant 10C. C is measured as the largest hypothesis ratio
/// over u and the cascade truncations of |u - <u>_Q| unless supplied.
inline WeakStrongResult weak_to_strong_classic(const GridFunction& u, const GridFunction& omega,
                                               const GridFunction& sigma,
                                               const ExponentConfig& cfg,
                                               std::optional<double> c_weak = std::nullopt) {
    cfg.validate();
    GridFunction v = detail::oscillation_of(u);
    double lambda = block_mean(v, whole_block(v));
    GridFunction grad_u = gradient_magnitude(u);
    double grad_norm = lp_norm(grad_u, sigma, cfg.p);

    WeakStrongResult res;
    GridFunction osc = u;
    double mean_u = block_mean(u, whole_block(u));
    for (double& x : osc.samples) x -= mean_u;
    res.strong_value = lp_norm(osc, omega, cfg.q);
    if (lambda == 0.0) {  // constant u: v = 0, trivial pass
        res.c_weak = c_weak.value_or(0.0);
        res.bound = 0.0;
        res.pass = true;
        return res;
    }

    double c = 0.0;
    if (c_weak) {
        c = *c_weak;
    } else {
        c = detail::hypothesis_ratio(u, omega, sigma, cfg.q, grad_norm);
        double vmax = *std::max_element(v.samples.begin(), v.samples.end());
        for (int k = 1;; ++k) {
            double t = std::ldexp(lambda, k - 1);  // lambda_{k-1}
            if (t >= vmax) break;                  // truncation identically zero
            GridFunction vt = truncate(v, t);
            double rhs = lp_norm(gradient_magnitude(vt), sigma, cfg.p);
            c = std::max(c, detail::hypothesis_ratio(vt, omega, sigma, cfg.q, rhs));
        }
    }
    res.c_weak = c;
    res.bound = 10.0 * c * grad_norm;
    res.pass = res.strong_value <= res.bound * (1.0 + 1e-12);
    return res;
}

/// Fractional version: hypotheses against the difference seminorm, strong
/// bound with constant 58C. Requires r <= p.
inline WeakStrongResult weak_to_strong_fractional(const GridFunction& u,
                                                  const GridFunction& omega,
                                                  const GridFunction& sigma,
                                                  const ExponentConfig& cfg,
                                                  std::optional<double> c_weak = std::nullopt) {
    cfg.validate();
    if (cfg.r > cfg.p)
        throw std::invalid_argument("weak_to_strong_fractional: requires r <= p");
    GridFunction v = detail::oscillation_of(u);
    double lambda = block_mean(v, whole_block(v));

    WeakStrongResult res;
    GridFunction osc = u;
    double mean_u = block_mean(u, whole_block(u));
    for (double& x : osc.samples) x -= mean_u;
    res.strong_value = lp_norm(osc, omega, cfg.q);
    double sem_u = tl_seminorm(u, sigma, cfg).value;
    if (lambda == 0.0) {
        res.c_weak = c_weak.value_or(0.0);
        res.bound = 58.0 * res.c_weak * sem_u;
        res.pass = true;
        return res;
    }

    double c = 0.0;
    if (c_weak) {
        c = *c_weak;
    } else {
        c = detail::hypothesis_ratio(u, omega, sigma, cfg.q, sem_u);
        double vmax = *std::max_element(v.samples.begin(), v.samples.end());
        for (int k = 1;; ++k) {
            double t = std::ldexp(lambda, k - 1);
            if (t >= vmax) break;
            GridFunction vt = truncate(v, t);
            double rhs = tl_seminorm(vt, sigma, cfg).value;
            c = std::max(c, detail::hypothesis_ratio(vt, omega, sigma, cfg.q, rhs));
        }
    }
    res.c_weak = c;
    res.bound = 58.0 * c * sem_u;
    res.pass = res.strong_value <= res.bound * (1.0 + 1e-12);
    return res;
}

}  // namespace psv
