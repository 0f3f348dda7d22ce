#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "psv/exponents.hpp"
#include "psv/grid.hpp"

namespace psv {

/// Value of a weight characteristic computed as a maximum over the dyadic
/// family of Q up to family_depth. The dyadic family only bounds the full
/// supremum over all subcubes from below, hence the flag.
struct CharacteristicReport {
    double value = 0.0;
    DyadicIndex attaining_cube;
    int family_depth = 0;
    bool lower_bound_flag = true;
};

namespace detail {

inline void require_positive(const GridFunction& w, const char* name) {
    for (double v : w.samples)
        if (!(v > 0.0)) throw std::domain_error(std::string(name) + ": weight must be strictly positive");
}

/// Exact block sums of a transformed sample field, per generation 0..depth.
/// levels[g] holds (2^g)^d sums, cells combined in index order.
class BlockSums {
public:
    BlockSums(const GridFunction& f, int depth, const std::function<double(double)>& transform)
        : dim_(f.cube.dim), depth_(depth) {
        if (depth > f.max_generation())
            throw std::invalid_argument("characteristic depth exceeds grid depth");
        levels_.resize(static_cast<std::size_t>(depth) + 1);
        std::int64_t m = std::int64_t{1} << depth;           // blocks per side at finest level
        std::int64_t bs = f.n / m;                            // cells per block side
        std::int64_t rows = dim_ == 2 ? m : 1;
        levels_[static_cast<std::size_t>(depth)].resize(static_cast<std::size_t>(m * rows));
        for (std::int64_t by = 0; by < rows; ++by)
            for (std::int64_t bx = 0; bx < m; ++bx) {
                KahanSum acc;
                for (std::int64_t iy = by * bs; iy < (dim_ == 2 ? (by + 1) * bs : 1); ++iy)
                    for (std::int64_t ix = bx * bs; ix < (bx + 1) * bs; ++ix)
                        acc.add(transform(f.at(ix, iy)));
                levels_[static_cast<std::size_t>(depth)][static_cast<std::size_t>(by * m + bx)] = acc.value();
            }
        for (int g = depth - 1; g >= 0; --g) {
            std::int64_t mg = std::int64_t{1} << g;
            std::int64_t rg = dim_ == 2 ? mg : 1;
            levels_[static_cast<std::size_t>(g)].resize(static_cast<std::size_t>(mg * rg));
            for (std::int64_t by = 0; by < rg; ++by)
                for (std::int64_t bx = 0; bx < mg; ++bx) {
                    double s = child(g + 1, 2 * bx, 2 * by) + child(g + 1, 2 * bx + 1, 2 * by);
                    if (dim_ == 2)
                        s += child(g + 1, 2 * bx, 2 * by + 1) + child(g + 1, 2 * bx + 1, 2 * by + 1);
                    levels_[static_cast<std::size_t>(g)][static_cast<std::size_t>(by * mg + bx)] = s;
                }
        }
        cells_per_block_.resize(static_cast<std::size_t>(depth) + 1);
        std::int64_t cell_side = f.n;
        for (int g = 0; g <= depth; ++g) {
            std::int64_t side = cell_side >> g;
            cells_per_block_[static_cast<std::size_t>(g)] = dim_ == 2 ? side * side : side;
        }
    }

    double sum(const DyadicIndex& idx) const { return child(idx.generation, idx.coords[0], idx.coords[1]); }
    double mean(const DyadicIndex& idx) const {
        return sum(idx) / static_cast<double>(cells_per_block_[static_cast<std::size_t>(idx.generation)]);
    }
    std::int64_t block_cells(int gen) const { return cells_per_block_[static_cast<std::size_t>(gen)]; }
    int depth() const { return depth_; }

private:
    double child(int g, std::int64_t bx, std::int64_t by) const {
        std::int64_t mg = std::int64_t{1} << g;
        return levels_[static_cast<std::size_t>(g)][static_cast<std::size_t>((dim_ == 2 ? by : 0) * mg + bx)];
    }

    int dim_;
    int depth_;
    std::vector<std::vector<double>> levels_;
    std::vector<std::int64_t> cells_per_block_;
};

/// Max over blocks, same layout as BlockSums.
class BlockMax {
public:
    BlockMax(const GridFunction& f, int depth, const std::function<double(double)>& transform)
        : dim_(f.cube.dim), depth_(depth) {
        levels_.resize(static_cast<std::size_t>(depth) + 1);
        std::int64_t m = std::int64_t{1} << depth;
        std::int64_t bs = f.n / m;
        std::int64_t rows = dim_ == 2 ? m : 1;
        levels_[static_cast<std::size_t>(depth)].resize(static_cast<std::size_t>(m * rows));
        for (std::int64_t by = 0; by < rows; ++by)
            for (std::int64_t bx = 0; bx < m; ++bx) {
                double mx = -1e300;
                for (std::int64_t iy = by * bs; iy < (dim_ == 2 ? (by + 1) * bs : 1); ++iy)
                    for (std::int64_t ix = bx * bs; ix < (bx + 1) * bs; ++ix)
                        mx = std::max(mx, transform(f.at(ix, iy)));
                levels_[static_cast<std::size_t>(depth)][static_cast<std::size_t>(by * m + bx)] = mx;
            }
        for (int g = depth - 1; g >= 0; --g) {
            std::int64_t mg = std::int64_t{1} << g;
            std::int64_t rg = dim_ == 2 ? mg : 1;
            levels_[static_cast<std::size_t>(g)].resize(static_cast<std::size_t>(mg * rg));
            for (std::int64_t by = 0; by < rg; ++by)
                for (std::int64_t bx = 0; bx < mg; ++bx) {
                    double s = std::max(at(g + 1, 2 * bx, 2 * by), at(g + 1, 2 * bx + 1, 2 * by));
                    if (dim_ == 2)
                        s = std::max(s, std::max(at(g + 1, 2 * bx, 2 * by + 1), at(g + 1, 2 * bx + 1, 2 * by + 1)));
                    levels_[static_cast<std::size_t>(g)][static_cast<std::size_t>(by * mg + bx)] = s;
                }
        }
    }

    double max(const DyadicIndex& idx) const { return at(idx.generation, idx.coords[0], idx.coords[1]); }

private:
    double at(int g, std::int64_t bx, std::int64_t by) const {
        std::int64_t mg = std::int64_t{1} << g;
        return levels_[static_cast<std::size_t>(g)][static_cast<std::size_t>((dim_ == 2 ? by : 0) * mg + bx)];
    }

    int dim_;
    int depth_;
    std::vector<std::vector<double>> levels_;
};

template <typename PerCube>
CharacteristicReport max_over_family(const GridFunction& f, int depth, PerCube&& value_of) {
    CharacteristicReport rep;
    rep.family_depth = depth;
    rep.value = -1e300;
    for (int g = 0; g <= depth; ++g) {
        std::int64_t m = std::int64_t{1} << g;
        for (std::int64_t cy = 0; cy < (f.cube.dim == 2 ? m : 1); ++cy)
            for (std::int64_t cx = 0; cx < m; ++cx) {
                DyadicIndex idx(g, cx, cy);
                double v = value_of(idx);
                if (v > rep.value) {
                    rep.value = v;
                    rep.attaining_cube = idx;
                }
            }
    }
    return rep;
}

}  // namespace detail

/// Two-weight characteristic with explicit exponents (used directly by the
/// rescaling identities): sup_R |R|^alpha <w>_{q,R} <s^{-1}>_{p',R} over the
/// dyadic subcubes of Q up to `depth`.
inline CharacteristicReport apq_alpha_pq(const GridFunction& omega, const GridFunction& sigma,
                                         double p, double q, double alpha, int depth) {
    require_same_grid(omega, sigma);
    double pc = conjugate(p);
    detail::BlockSums wq(omega, depth, [q](double v) { return std::pow(v, q); });
    double vol = omega.cube.volume();
    if (pc == kInfExponent) {
        detail::BlockMax sinv(sigma, depth, [](double v) { return 1.0 / v; });
        return detail::max_over_family(omega, depth, [&](const DyadicIndex& idx) {
            double cube_vol = vol * std::ldexp(1.0, -idx.generation * omega.cube.dim);
            return std::pow(cube_vol, alpha) * std::pow(wq.mean(idx), 1.0 / q) * sinv.max(idx);
        });
    }
    detail::BlockSums sp(sigma, depth, [pc](double v) { return std::pow(v, -pc); });
    return detail::max_over_family(omega, depth, [&](const DyadicIndex& idx) {
        double cube_vol = vol * std::ldexp(1.0, -idx.generation * omega.cube.dim);
        return std::pow(cube_vol, alpha) * std::pow(wq.mean(idx), 1.0 / q) *
               std::pow(sp.mean(idx), 1.0 / pc);
    });
}

/// The characteristic at the exponents carried by cfg.
inline CharacteristicReport apq_alpha(const GridFunction& omega, const GridFunction& sigma,
                                      const ExponentConfig& cfg, int depth) {
    detail::require_positive(omega, "apq_alpha(omega)");
    detail::require_positive(sigma, "apq_alpha(sigma)");
    return apq_alpha_pq(omega, sigma, cfg.p, cfg.q, cfg.alpha, depth);
}

/// Fujii-Wilson A_infinity characteristic over the dyadic family:
/// max_R (1/w(R)) * sum over cells of the R-localized dyadic maximal
/// function of w, exact on cell sums.
inline CharacteristicReport ainfty(const GridFunction& w, int depth) {
    detail::require_positive(w, "ainfty");
    detail::BlockSums sums(w, depth, [](double v) { return v; });

    // numerator(R) = sum over leaf blocks of (chain max of <w>_{1,S}) * cells
    std::function<double(const DyadicIndex&, double)> dfs =
        [&](const DyadicIndex& idx, double chain_max) -> double {
        double m = std::max(chain_max, sums.mean(idx));
        if (idx.generation == depth)
            return m * static_cast<double>(sums.block_cells(idx.generation));
        double total = 0.0;
        for (const auto& child : dyadic_children(idx, w.cube.dim)) total += dfs(child, m);
        return total;
    };
    return detail::max_over_family(w, depth, [&](const DyadicIndex& idx) {
        return dfs(idx, 0.0) / sums.sum(idx);
    });
}

/// Localized A_u characteristic over the dyadic family. u = 1 uses the limit
/// form <w>_{1,R} * ess sup_R w^{-1}, exact on samples.
inline CharacteristicReport au_characteristic(const GridFunction& w, double u, int depth) {
    if (u < 1.0) throw std::invalid_argument("au_characteristic: requires u >= 1");
    detail::require_positive(w, "au_characteristic");
    detail::BlockSums sums(w, depth, [](double v) { return v; });
    if (u == 1.0) {
        detail::BlockMax winv(w, depth, [](double v) { return 1.0 / v; });
        return detail::max_over_family(w, depth, [&](const DyadicIndex& idx) {
            return sums.mean(idx) * winv.max(idx);
        });
    }
    double e = 1.0 / (u - 1.0);
    detail::BlockSums invs(w, depth, [e](double v) { return std::pow(v, -e); });
    return detail::max_over_family(w, depth, [&](const DyadicIndex& idx) {
        return sums.mean(idx) * std::pow(invs.mean(idx), u - 1.0);
    });
}

/// Result of the reverse-Holder search behind the endpoint-exponent drop.
struct ReverseHolderResult {
    bool ok = false;
    double s_star = 1.0;       // largest verified Holder bump
    double beta = 0.0;         // 1/(q s*) + 1/p'
    double char_beta = 0.0;    // [omega,sigma]_{A^beta} over the dyadic family
    double bound = 0.0;        // 2 |Q|^{beta-alpha} [omega,sigma]_{A^alpha}
};

/// Searches by bisection for the largest s in (1, 8] with
/// <omega>_{qs,Q} <= 2 <omega>_{q,Q} and certifies the resulting beta drop
/// from the endpoint alpha = 1/q + 1/p'. Search tolerance 1e-3, cap 8.
inline ReverseHolderResult reverse_holder_beta(const GridFunction& omega, const GridFunction& sigma,
                                               const ExponentConfig& cfg, int depth) {
    detail::require_positive(omega, "reverse_holder_beta");
    detail::require_positive(sigma, "reverse_holder_beta");
    const double cap = 8.0, tol = 1e-3;
    double q = cfg.q;
    double alpha_endpoint = 1.0 / q + 1.0 / cfg.p_conj();
    CellBlock whole = whole_block(omega);
    auto avg_pow = [&](double e) { return block_p_average(omega, whole, e); };
    double base = 2.0 * avg_pow(q);
    auto ok_at = [&](double s) { return avg_pow(q * s) <= base; };

    ReverseHolderResult res;
    double s_star;
    if (ok_at(cap)) {
        s_star = cap;
    } else if (!ok_at(1.0 + tol)) {
        res.ok = false;  // weight too singular for the grid
        return res;
    } else {
        double lo = 1.0 + tol, hi = cap;
        while (hi - lo > tol) {
            double mid = 0.5 * (lo + hi);
            (ok_at(mid) ? lo : hi) = mid;
        }
        s_star = lo;
    }
    res.ok = true;
    res.s_star = s_star;
    res.beta = 1.0 / (q * s_star) + 1.0 / cfg.p_conj();
    res.char_beta = apq_alpha_pq(omega, sigma, cfg.p, q, res.beta, depth).value;
    double char_alpha = apq_alpha_pq(omega, sigma, cfg.p, q, alpha_endpoint, depth).value;
    res.bound = 2.0 * std::pow(omega.cube.volume(), res.beta - alpha_endpoint) * char_alpha;
    return res;
}

/// Power-law weight |x - c|^{-g}. The singular cell takes the exact cell
/// average in 1D (closed form, needs g < 1) and a center-offset sample in 2D.
inline GridFunction power_law_weight(const Cube& cube, std::int64_t n, const Point& c, double g) {
    GridFunction w(cube, n);
    double h = w.cell_size();
    std::int64_t rows = cube.dim == 2 ? n : 1;
    for (std::int64_t iy = 0; iy < rows; ++iy)
        for (std::int64_t ix = 0; ix < n; ++ix) {
            Point x = w.cell_center(ix, iy);
            if (cube.dim == 1) {
                double a = x[0] - 0.5 * h, b = x[0] + 0.5 * h;
                if (c[0] >= a && c[0] <= b) {
                    if (g >= 1.0)
                        throw std::invalid_argument("power_law_weight: exponent not integrable");
                    double left = c[0] - a, right = b - c[0];
                    w.at(ix, iy) =
                        (std::pow(left, 1.0 - g) + std::pow(right, 1.0 - g)) / ((1.0 - g) * h);
                } else {
                    w.at(ix, iy) = std::pow(std::abs(x[0] - c[0]), -g);
                }
            } else {
                double dx = x[0] - c[0], dy = x[1] - c[1];
                if (std::abs(dx) <= 0.5 * h && std::abs(dy) <= 0.5 * h) {
                    dx = (x[0] + 0.25 * h) - c[0];
                    dy = (x[1] + 0.25 * h) - c[1];
                }
                w.at(ix, iy) = std::pow(std::sqrt(dx * dx + dy * dy), -g);
            }
        }
    return w;
}

}  // namespace psv
