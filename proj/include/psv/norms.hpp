#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "psv/accum.hpp"
#include "psv/exponents.hpp"
#include "psv/grid.hpp"

namespace psv {

/// Weighted L^p norm with the multiplier normalization:
/// (sum |f|^p sigma^p h^d)^{1/p}. Exact for grid (simple) functions.
inline double lp_norm(const GridFunction& f, const GridFunction& sigma, double p) {
    require_same_grid(f, sigma);
    if (!(p >= 1.0) || p == kInfExponent) throw std::invalid_argument("lp_norm: requires p in [1,inf)");
    KahanSum acc;
    for (std::size_t i = 0; i < f.samples.size(); ++i) {
        double v = std::abs(f.samples[i]) * sigma.samples[i];
        acc.add(p == 1.0 ? v : (p == 2.0 ? v * v : std::pow(v, p)));
    }
    double total = acc.value() * f.cell_volume();
    return p == 1.0 ? total : (p == 2.0 ? std::sqrt(total) : std::pow(total, 1.0 / p));
}

/// Weighted weak L^p norm, exact for simple functions: the supremum over
/// levels is attained at the sample magnitudes with >=-level sets.
inline double weak_lp_norm(const GridFunction& f, const GridFunction& sigma, double p) {
    require_same_grid(f, sigma);
    if (!(p >= 1.0) || p == kInfExponent)
        throw std::invalid_argument("weak_lp_norm: requires p in [1,inf)");
    std::size_t count = f.samples.size();
    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(f.samples[a]) > std::abs(f.samples[b]);
    });
    double best = 0.0;
    KahanSum mass;  // sigma^p measure of {|f| >= v}
    double vol = f.cell_volume();
    for (std::size_t k = 0; k < count; ++k) {
        double v = std::abs(f.samples[order[k]]);
        double sp = sigma.samples[order[k]];
        mass.add((p == 1.0 ? sp : (p == 2.0 ? sp * sp : std::pow(sp, p))) * vol);
        bool last_of_level = (k + 1 == count) || std::abs(f.samples[order[k + 1]]) < v;
        if (last_of_level && v > 0.0)
            best = std::max(best, v * std::pow(mass.value(), 1.0 / p));
    }
    return best;
}

/// w-weighted mean of f over a cell block.
inline double weighted_average(const GridFunction& f, const GridFunction& w, const CellBlock& b) {
    require_same_grid(f, w);
    KahanSum num, den;
    for (std::int64_t iy = b.y0; iy < b.y1; ++iy)
        for (std::int64_t ix = b.x0; ix < b.x1; ++ix) {
            double ww = f.cube.dim == 2 ? w.at_reflected(ix, iy) : w.at_reflected(ix);
            double fv = f.cube.dim == 2 ? f.at_reflected(ix, iy) : f.at_reflected(ix);
            num.add(fv * ww);
            den.add(ww);
        }
    return num.value() / den.value();
}

inline double weighted_average(const GridFunction& f, const GridFunction& w, const Cube& r) {
    return weighted_average(f, w, block_of_cube(f, r));
}

/// (mean over the block of |f - c|^p)^{1/p}, reflected sampling allowed.
inline double block_p_average_centered(const GridFunction& f, const CellBlock& b, double p, double c) {
    KahanSum acc;
    for (std::int64_t iy = b.y0; iy < b.y1; ++iy)
        for (std::int64_t ix = b.x0; ix < b.x1; ++ix) {
            double v = std::abs((f.cube.dim == 2 ? f.at_reflected(ix, iy) : f.at_reflected(ix)) - c);
            acc.add(p == 1.0 ? v : (p == 2.0 ? v * v : std::pow(v, p)));
        }
    double mean = acc.value() / static_cast<double>(b.cell_count());
    return p == 1.0 ? mean : (p == 2.0 ? std::sqrt(mean) : std::pow(mean, 1.0 / p));
}

/// inf_c ||f - c||_{L^q_w} by golden-section search on [min f, max f].
inline double inf_constant_lp(const GridFunction& f, const GridFunction& w, double q) {
    auto [lo_it, hi_it] = std::minmax_element(f.samples.begin(), f.samples.end());
    double lo = *lo_it, hi = *hi_it;
    if (lo == hi) return 0.0;
    auto norm_at = [&](double c) {
        GridFunction shifted = f;
        for (double& v : shifted.samples) v -= c;
        return lp_norm(shifted, w, q);
    };
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double tol = 1e-8 * (hi - lo);
    double a = lo, b = hi;
    double c1 = b - gr * (b - a), c2 = a + gr * (b - a);
    double f1 = norm_at(c1), f2 = norm_at(c2);
    while (b - a > tol) {
        if (f1 <= f2) {
            b = c2;
            c2 = c1;
            f2 = f1;
            c1 = b - gr * (b - a);
            f1 = norm_at(c1);
        } else {
            a = c1;
            c1 = c2;
            f1 = f2;
            c2 = a + gr * (b - a);
            f2 = norm_at(c2);
        }
    }
    return std::min(f1, f2);
}

/// Result of the difference-seminorm quadrature.
struct SeminormResult {
    double value = 0.0;
    std::int64_t pair_count = 0;
    double excluded_diagonal_mass_bound = 0.0;  // recorded, never added
};

/// Quadrature mode for the difference seminorm.
///  - midpoint: double midpoint sum over distinct cell pairs, same-cell
///    pairs excluded, their omitted mass recorded.
///  - cell_exact: per pair the kernel moment |x-y|^{r-d-sr} is integrated
///    over the y-cell (closed form in 1D, tabulated cell integrals in 2D)
///    against the two-point radial model |f(x)-f(y)| ~ |f_i-f_j| |x-y|/|x_i-x_j|,
///    and the same-cell contribution is modeled by the local gradient.
///    Exact for affine samples at every (s, r); this is what makes the
///    closed-form oracles meet their tolerance near s = 1.
enum class TlQuadrature { auto_default, midpoint, cell_exact };

namespace detail {

/// Midpoint kernel values (h^2 (dx^2+dy^2))^{-(d+sr)/2} tabulated over
/// integer offsets; extent covers 3-fold dilates.
struct KernelTable {
    int dim = 1;
    double h = 0.0;
    double s = 0.0, r = 1.0;
    std::int64_t extent = 0;
    std::vector<double> vals;  // 1D: vals[dx]; 2D: vals[dy*(extent+1)+dx]

    KernelTable() = default;
    KernelTable(int dim_, double h_, double s_, double r_, std::int64_t extent_)
        : dim(dim_), h(h_), s(s_), r(r_), extent(extent_) {
        double expo = -(static_cast<double>(dim) + s * r) / 2.0;
        if (dim == 1) {
            vals.resize(static_cast<std::size_t>(extent + 1));
            for (std::int64_t dx = 1; dx <= extent; ++dx)
                vals[static_cast<std::size_t>(dx)] =
                    std::pow(h * h * static_cast<double>(dx * dx), expo);
        } else {
            vals.resize(static_cast<std::size_t>((extent + 1) * (extent + 1)));
            for (std::int64_t dy = 0; dy <= extent; ++dy)
                for (std::int64_t dx = 0; dx <= extent; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    vals[static_cast<std::size_t>(dy * (extent + 1) + dx)] =
                        std::pow(h * h * static_cast<double>(dx * dx + dy * dy), expo);
                }
        }
    }

    double at(std::int64_t dx, std::int64_t dy = 0) const {
        dx = std::abs(dx);
        dy = std::abs(dy);
        return dim == 1 ? vals[static_cast<std::size_t>(dx)]
                        : vals[static_cast<std::size_t>(dy * (extent + 1) + dx)];
    }
};

inline double pow_r(double v, double r) {
    return r == 1.0 ? v : (r == 2.0 ? v * v : std::pow(v, r));
}

/// Moment-matched 2D pair weights
///   W(dx,dy) = int over the y-cell of |u|^{r-2-sr} du / (h sqrt(dx^2+dy^2))^r,
/// subsampled near the diagonal where the midpoint rule is biased, reducing
/// to the plain midpoint kernel far away. The same-cell term integrates the
/// affine model |grad f . u| radially in closed form against the square cell
/// boundary, with an angular midpoint rule.
class MomentTable2D {
public:
    MomentTable2D(std::int64_t n, double h, double s, double r)
        : n_(n), h_(h), s_(s), r_(r) {
        double mexp = r - 2.0 - s * r;                 // moment exponent
        double kexp = -(2.0 + s * r) / 2.0;            // midpoint kernel exponent on squared dist
        vals_.assign(static_cast<std::size_t>((n + 1) * (n + 1)), 0.0);
        const std::int64_t near = 8, sub = 16;
        for (std::int64_t dy = 0; dy <= n; ++dy)
            for (std::int64_t dx = 0; dx <= n; ++dx) {
                if (dx == 0 && dy == 0) continue;
                double w;
                double d2 = static_cast<double>(dx * dx + dy * dy);
                if (dx <= near && dy <= near) {
                    KahanSum acc;
                    for (std::int64_t sy = 0; sy < sub; ++sy)
                        for (std::int64_t sx = 0; sx < sub; ++sx) {
                            double ux = (static_cast<double>(dx) - 0.5 + (sx + 0.5) / sub) * h;
                            double uy = (static_cast<double>(dy) - 0.5 + (sy + 0.5) / sub) * h;
                            acc.add(std::pow(ux * ux + uy * uy, 0.5 * mexp));
                        }
                    double moment = acc.value() * (h / sub) * (h / sub);
                    w = moment / pow_r(h * std::sqrt(d2), r);
                } else {
                    w = h * h * std::pow(h * h * d2, kexp);
                }
                vals_[static_cast<std::size_t>(dy * (n + 1) + dx)] = w;
            }
        // angular table for the same-cell closed radial integral
        double a = r * (1.0 - s);
        ring_.resize(kAngles);
        for (int k = 0; k < kAngles; ++k) {
            double theta = (k + 0.5) * (2.0 * 3.14159265358979323846 / kAngles);
            double c = std::abs(std::cos(theta)), sn = std::abs(std::sin(theta));
            double rho = 0.5 * h / std::max(c, sn);  // distance to the square boundary
            ring_[static_cast<std::size_t>(k)] = std::pow(rho, a) / a;
        }
    }

    double at(std::int64_t dx, std::int64_t dy) const {
        return vals_[static_cast<std::size_t>(std::abs(dy) * (n_ + 1) + std::abs(dx))];
    }

    /// Same-cell contribution for a cell with gradient (gx, gy).
    double same_cell(double gx, double gy) const {
        double g = std::sqrt(gx * gx + gy * gy);
        if (g == 0.0) return 0.0;
        double phi = std::atan2(gy, gx);
        KahanSum acc;
        for (int k = 0; k < kAngles; ++k) {
            double theta = (k + 0.5) * (2.0 * 3.14159265358979323846 / kAngles);
            acc.add(pow_r(std::abs(std::cos(theta - phi)), r_) * ring_[static_cast<std::size_t>(k)]);
        }
        return pow_r(g, r_) * acc.value() * (2.0 * 3.14159265358979323846 / kAngles);
    }

private:
    static constexpr int kAngles = 256;
    std::int64_t n_;
    double h_, s_, r_;
    std::vector<double> vals_;
    std::vector<double> ring_;
};

/// Crude Lipschitz estimate: max adjacent-cell difference over h.
inline double lipschitz_estimate(const GridFunction& f) {
    double h = f.cell_size();
    double best = 0.0;
    std::int64_t rows = f.cube.dim == 2 ? f.n : 1;
    for (std::int64_t iy = 0; iy < rows; ++iy)
        for (std::int64_t ix = 0; ix < f.n; ++ix) {
            if (ix + 1 < f.n) best = std::max(best, std::abs(f.at(ix + 1, iy) - f.at(ix, iy)));
            if (f.cube.dim == 2 && iy + 1 < f.n)
                best = std::max(best, std::abs(f.at(ix, iy + 1) - f.at(ix, iy)));
        }
    return best / h;
}

inline double diagonal_mass_bound(const GridFunction& f, double s, double r) {
    double h = f.cell_size();
    double cd = f.cube.dim == 1 ? 2.0 : 2.0 * 3.14159265358979323846;
    double L = lipschitz_estimate(f);
    double nd = static_cast<double>(f.cell_total());
    return cd * nd * f.cell_volume() * pow_r(L * h, r) * std::pow(h, -s * r) / ((1.0 - s) * r);
}

}  // namespace detail

/// Triebel-Lizorkin difference seminorm
/// ( int_Q ( int_Q |f(x)-f(y)|^r / |x-y|^{d+sr} dy )^{p/r} sigma^p dx )^{1/p},
/// inner integral first, diagonal handled per the quadrature mode.
inline SeminormResult tl_seminorm(const GridFunction& f, const GridFunction& sigma, double s,
                                  double p, double r,
                                  TlQuadrature mode = TlQuadrature::auto_default) {
    require_same_grid(f, sigma);
    if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("tl_seminorm: requires s in (0,1)");
    if (mode == TlQuadrature::auto_default) mode = TlQuadrature::cell_exact;

    std::int64_t total = f.cell_total();
    double h = f.cell_size();
    double vol = f.cell_volume();
    std::vector<double> inner(static_cast<std::size_t>(total), 0.0);

    if (mode == TlQuadrature::midpoint) {
        detail::KernelTable kt(f.cube.dim, h, s, r, f.n);
        if (f.cube.dim == 1) {
            parallel_for(static_cast<std::size_t>(total), [&](std::size_t i) {
                std::int64_t ix = static_cast<std::int64_t>(i);
                double fi = f.samples[i];
                KahanSum acc;
                for (std::int64_t jx = 0; jx < f.n; ++jx) {
                    if (jx == ix) continue;
                    acc.add(detail::pow_r(std::abs(fi - f.samples[static_cast<std::size_t>(jx)]), r) *
                            kt.at(jx - ix));
                }
                inner[i] = acc.value() * vol;
            });
        } else {
            parallel_for(static_cast<std::size_t>(total), [&](std::size_t i) {
                std::int64_t ix = static_cast<std::int64_t>(i) % f.n;
                std::int64_t iy = static_cast<std::int64_t>(i) / f.n;
                double fi = f.samples[i];
                KahanSum acc;
                for (std::int64_t jy = 0; jy < f.n; ++jy)
                    for (std::int64_t jx = 0; jx < f.n; ++jx) {
                        if (jx == ix && jy == iy) continue;
                        acc.add(detail::pow_r(std::abs(fi - f.at(jx, jy)), r) *
                                kt.at(jx - ix, jy - iy));
                    }
                inner[i] = acc.value() * vol;
            });
        }
    } else if (f.cube.dim == 1) {
        // Moment-matched 1D weights: closed-form integral of t^{r-1-sr} over
        // the y-cell divided by (hk)^r; same-cell term from the local gradient.
        double a = r * (1.0 - s);  // > 0
        std::vector<double> weight(static_cast<std::size_t>(f.n), 0.0);
        for (std::int64_t k = 1; k < f.n; ++k) {
            double lo = (static_cast<double>(k) - 0.5) * h;
            double hi = (static_cast<double>(k) + 0.5) * h;
            double mk = (std::pow(hi, a) - std::pow(lo, a)) / a;
            weight[static_cast<std::size_t>(k)] = mk / detail::pow_r(h * static_cast<double>(k), r);
        }
        double m0 = 2.0 * std::pow(0.5 * h, a) / a;
        GridFunction grad = gradient_magnitude(f);
        parallel_for(static_cast<std::size_t>(total), [&](std::size_t i) {
            std::int64_t ix = static_cast<std::int64_t>(i);
            double fi = f.samples[i];
            KahanSum acc;
            for (std::int64_t jx = 0; jx < f.n; ++jx) {
                if (jx == ix) continue;
                acc.add(detail::pow_r(std::abs(fi - f.samples[static_cast<std::size_t>(jx)]), r) *
                        weight[static_cast<std::size_t>(std::abs(jx - ix))]);
            }
            acc.add(detail::pow_r(grad.samples[i], r) * m0);
            inner[i] = acc.value();
        });
    } else {
        // 2D moment-matched weights: near cells use subsampled integrals of
        // |u|^{r-2-sr} over the y-cell divided by the center distance^r, far
        // cells reduce to the midpoint kernel. The same-cell term integrates
        // the affine model exactly in the radial direction and by an angular
        // midpoint rule against the square cell boundary.
        detail::MomentTable2D mt(f.n, h, s, r);
        auto gradc = gradient(f);
        const GridFunction& gx = gradc[0];
        const GridFunction& gy = gradc[1];
        parallel_for(static_cast<std::size_t>(total), [&](std::size_t i) {
            std::int64_t ix = static_cast<std::int64_t>(i) % f.n;
            std::int64_t iy = static_cast<std::int64_t>(i) / f.n;
            double fi = f.samples[i];
            KahanSum acc;
            for (std::int64_t jy = 0; jy < f.n; ++jy)
                for (std::int64_t jx = 0; jx < f.n; ++jx) {
                    if (jx == ix && jy == iy) continue;
                    acc.add(detail::pow_r(std::abs(fi - f.at(jx, jy)), r) *
                            mt.at(jx - ix, jy - iy));
                }
            acc.add(mt.same_cell(gx.samples[i], gy.samples[i]));
            inner[i] = acc.value();
        });
    }

    KahanSum outer;
    double pr = p / r;
    for (std::int64_t i = 0; i < total; ++i) {
        double base = inner[static_cast<std::size_t>(i)];
        double powed = pr == 1.0 ? base : std::pow(base, pr);
        double sp = sigma.samples[static_cast<std::size_t>(i)];
        outer.add(powed * (p == 1.0 ? sp : (p == 2.0 ? sp * sp : std::pow(sp, p))) * vol);
    }
    SeminormResult res;
    res.value = p == 1.0 ? outer.value() : std::pow(outer.value(), 1.0 / p);
    res.pair_count = total * (total - 1);
    res.excluded_diagonal_mass_bound = detail::diagonal_mass_bound(f, s, r);
    return res;
}

inline SeminormResult tl_seminorm(const GridFunction& f, const GridFunction& sigma,
                                  const ExponentConfig& cfg,
                                  TlQuadrature mode = TlQuadrature::auto_default) {
    return tl_seminorm(f, sigma, cfg.s, cfg.p, cfg.r, mode);
}

/// Single-point difference quotient
/// f_B^{s,r}(x) = ( int_B |f(x)-f(y)|^r / |x-y|^{d+sr} dy )^{1/r}
/// by midpoint sum over the cells of the block excluding the cell of x.
/// Blocks leaving the grid require reflect (sampling the even periodic
/// extension); the kernel uses true geometric distances.
inline double difference_quotient(const GridFunction& f, const CellBlock& b, std::int64_t ix,
                                  std::int64_t iy, double s, double r, bool reflect,
                                  const detail::KernelTable* kt = nullptr) {
    if (!reflect && !block_inside(f, b))
        throw std::invalid_argument("difference_quotient: block leaves the grid without reflection");
    double h = f.cell_size();
    double vol = f.cell_volume();
    double fi = f.cube.dim == 2 ? f.at(ix, iy) : f.at(ix);
    double expo = -(static_cast<double>(f.cube.dim) + s * r) / 2.0;
    KahanSum acc;
    for (std::int64_t jy = b.y0; jy < b.y1; ++jy)
        for (std::int64_t jx = b.x0; jx < b.x1; ++jx) {
            if (jx == ix && jy == iy) continue;
            double fj = f.cube.dim == 2 ? f.at_reflected(jx, jy) : f.at_reflected(jx);
            double dx = static_cast<double>(jx - ix), dy = static_cast<double>(jy - iy);
            double kernel = kt ? kt->at(jx - ix, jy - iy)
                               : std::pow(h * h * (dx * dx + dy * dy), expo);
            acc.add(detail::pow_r(std::abs(fi - fj), r) * kernel);
        }
    double v = acc.value() * vol;
    return r == 1.0 ? v : std::pow(v, 1.0 / r);
}

/// Difference quotients of f over a whole base block at once (x ranges over
/// `base`, y over `domain`); used by the stopping-time constructions where
/// the same field is needed at every cell of R.
inline std::vector<double> difference_quotient_field(const GridFunction& f, const CellBlock& base,
                                                     const CellBlock& domain, double s, double r,
                                                     const detail::KernelTable& kt) {
    std::int64_t bw = base.x1 - base.x0;
    std::int64_t bh = base.y1 - base.y0;
    std::vector<double> out(static_cast<std::size_t>(bw * bh), 0.0);
    double vol = f.cell_volume();
    // reflected sample cache for the y-domain rows/cols
    std::int64_t dw = domain.x1 - domain.x0;
    std::int64_t dh = domain.y1 - domain.y0;
    std::vector<std::int64_t> rx(static_cast<std::size_t>(dw)), ry(static_cast<std::size_t>(dh));
    for (std::int64_t j = 0; j < dw; ++j) rx[static_cast<std::size_t>(j)] = reflect_cell(domain.x0 + j, f.n);
    for (std::int64_t j = 0; j < dh; ++j)
        ry[static_cast<std::size_t>(j)] = f.cube.dim == 2 ? reflect_cell(domain.y0 + j, f.n) : 0;

    parallel_for(static_cast<std::size_t>(bw * bh), [&](std::size_t k) {
        std::int64_t lx = static_cast<std::int64_t>(k) % bw;
        std::int64_t ly = static_cast<std::int64_t>(k) / bw;
        std::int64_t ix = base.x0 + lx, iy = base.y0 + ly;
        double fi = f.cube.dim == 2 ? f.at(ix, iy) : f.at(ix);
        KahanSum acc;
        for (std::int64_t jy = 0; jy < dh; ++jy)
            for (std::int64_t jx = 0; jx < dw; ++jx) {
                std::int64_t gx = domain.x0 + jx, gy = domain.y0 + jy;
                if (gx == ix && gy == iy) continue;
                double fj = f.cube.dim == 2 ? f.at(rx[static_cast<std::size_t>(jx)], ry[static_cast<std::size_t>(jy)])
                                            : f.at(rx[static_cast<std::size_t>(jx)]);
                acc.add(detail::pow_r(std::abs(fi - fj), r) * kt.at(gx - ix, gy - iy));
            }
        double v = acc.value() * vol;
        out[k] = r == 1.0 ? v : std::pow(v, 1.0 / r);
    });
    return out;
}

}  // namespace psv
