#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "psv/accum.hpp"
#include "psv/lattice.hpp"

namespace psv {

inline bool is_power_of_two(std::int64_t n) { return n > 0 && (n & (n - 1)) == 0; }

inline int log2_exact(std::int64_t n) {
    int g = 0;
    while ((std::int64_t{1} << g) < n) ++g;
    return g;
}

/// Integer rectangle of grid cells, half-open per axis. Coordinates may lie
/// outside [0, n) when the block describes a dilate sampled by reflection.
struct CellBlock {
    std::int64_t x0 = 0, x1 = 0;
    std::int64_t y0 = 0, y1 = 1;  // [0,1) for d = 1

    std::int64_t cell_count() const { return (x1 - x0) * (y1 - y0); }
};

/// Fold a cell index into [0, n) by even reflection with period 2n.
inline std::int64_t reflect_cell(std::int64_t i, std::int64_t n) {
    std::int64_t p = ((i % (2 * n)) + 2 * n) % (2 * n);
    return p < n ? p : 2 * n - 1 - p;
}

/// Function sampled at the cell centers of a uniform n^d grid over a cube.
/// n is a power of two, so every dyadic subcube of generation <= log2(n)
/// is an exact union of cells and dyadic averages are exact cell sums.
struct GridFunction {
    Cube cube;
    std::int64_t n = 1;
    std::vector<double> samples;

    GridFunction() = default;
    GridFunction(const Cube& cube_, std::int64_t n_)
        : cube(cube_), n(n_) {
        if (!is_power_of_two(n)) throw std::invalid_argument("GridFunction: n must be a power of two");
        samples.assign(static_cast<std::size_t>(cell_total()), 0.0);
    }

    std::int64_t cell_total() const { return cube.dim == 1 ? n : n * n; }
    double cell_size() const { return cube.side / static_cast<double>(n); }
    double cell_volume() const { return cube.dim == 1 ? cell_size() : cell_size() * cell_size(); }
    int max_generation() const { return log2_exact(n); }

    double& at(std::int64_t ix, std::int64_t iy = 0) { return samples[static_cast<std::size_t>(iy * n + ix)]; }
    double at(std::int64_t ix, std::int64_t iy = 0) const { return samples[static_cast<std::size_t>(iy * n + ix)]; }

    /// Sample with reflected (periodic even extension) indices.
    double at_reflected(std::int64_t ix, std::int64_t iy = 0) const {
        return at(reflect_cell(ix, n), cube.dim == 2 ? reflect_cell(iy, n) : 0);
    }

    Point cell_center(std::int64_t ix, std::int64_t iy = 0) const {
        double h = cell_size();
        Point p{cube.origin[0] + (static_cast<double>(ix) + 0.5) * h, 0.0};
        if (cube.dim == 2) p[1] = cube.origin[1] + (static_cast<double>(iy) + 0.5) * h;
        return p;
    }

    static GridFunction from_function(const Cube& cube, std::int64_t n,
                                      const std::function<double(const Point&)>& fn) {
        GridFunction g(cube, n);
        std::int64_t rows = cube.dim == 2 ? n : 1;
        for (std::int64_t iy = 0; iy < rows; ++iy)
            for (std::int64_t ix = 0; ix < n; ++ix)
                g.at(ix, iy) = fn(g.cell_center(ix, iy));
        return g;
    }

    static GridFunction constant(const Cube& cube, std::int64_t n, double c) {
        GridFunction g(cube, n);
        std::fill(g.samples.begin(), g.samples.end(), c);
        return g;
    }

    bool same_grid(const GridFunction& other) const {
        return n == other.n && cube.dim == other.cube.dim &&
               cube.side == other.cube.side && cube.origin == other.cube.origin;
    }
};

inline void require_same_grid(const GridFunction& a, const GridFunction& b) {
    if (!a.same_grid(b)) throw std::invalid_argument("grid mismatch");
}

/// Cell block of the dyadic subcube (j,k); requires j <= log2(n).
inline CellBlock block_of(const GridFunction& f, const DyadicIndex& idx) {
    if (idx.generation > f.max_generation())
        throw std::invalid_argument("block_of: generation exceeds grid depth");
    std::int64_t m = f.n >> idx.generation;
    CellBlock b;
    b.x0 = idx.coords[0] * m;
    b.x1 = b.x0 + m;
    if (f.cube.dim == 2) {
        b.y0 = idx.coords[1] * m;
        b.y1 = b.y0 + m;
    }
    return b;
}

/// Cell block of the concentric 3-fold dilate of a dyadic subcube. The block
/// extends outside the grid; samples are taken through reflection.
inline CellBlock block_of_dilate3(const GridFunction& f, const DyadicIndex& idx) {
    CellBlock b = block_of(f, idx);
    std::int64_t m = f.n >> idx.generation;
    b.x0 -= m;
    b.x1 += m;
    if (f.cube.dim == 2) {
        b.y0 -= m;
        b.y1 += m;
    }
    return b;
}

inline CellBlock whole_block(const GridFunction& f) {
    CellBlock b;
    b.x0 = 0;
    b.x1 = f.n;
    b.y0 = 0;
    b.y1 = f.cube.dim == 2 ? f.n : 1;
    return b;
}

inline bool block_inside(const GridFunction& f, const CellBlock& b) {
    CellBlock w = whole_block(f);
    return b.x0 >= w.x0 && b.x1 <= w.x1 && b.y0 >= w.y0 && b.y1 <= w.y1;
}

/// Map a geometric cube to a grid-aligned cell block. Throws when R is not a
/// union of whole cells; out-of-grid blocks are allowed only with reflect.
inline CellBlock block_of_cube(const GridFunction& f, const Cube& r, bool reflect = false) {
    double h = f.cell_size();
    CellBlock b;
    auto snap = [&](double v) {
        double rel = v / h;
        double rounded = std::round(rel);
        if (std::abs(rel - rounded) > 1e-9 * static_cast<double>(f.n))
            throw std::invalid_argument("average: cube is not aligned with the grid");
        return static_cast<std::int64_t>(rounded);
    };
    b.x0 = snap(r.origin[0] - f.cube.origin[0]);
    b.x1 = snap(r.origin[0] + r.side - f.cube.origin[0]);
    if (f.cube.dim == 2) {
        b.y0 = snap(r.origin[1] - f.cube.origin[1]);
        b.y1 = snap(r.origin[1] + r.side - f.cube.origin[1]);
    }
    if (!reflect && !block_inside(f, b))
        throw std::invalid_argument("average: cube extends beyond the grid without reflection");
    return b;
}

/// Signed mean over a block (reflected sampling for out-of-grid cells).
inline double block_mean(const GridFunction& f, const CellBlock& b) {
    KahanSum acc;
    for (std::int64_t iy = b.y0; iy < b.y1; ++iy)
        for (std::int64_t ix = b.x0; ix < b.x1; ++ix)
            acc.add(f.cube.dim == 2 ? f.at_reflected(ix, iy) : f.at_reflected(ix));
    return acc.value() / static_cast<double>(b.cell_count());
}

inline constexpr double kInfExponent = std::numeric_limits<double>::infinity();

/// <f>_{p,B} = (mean of |f|^p)^{1/p}; p = infinity gives the max sample.
inline double block_p_average(const GridFunction& f, const CellBlock& b, double p) {
    if (p == kInfExponent) {
        double m = 0.0;
        for (std::int64_t iy = b.y0; iy < b.y1; ++iy)
            for (std::int64_t ix = b.x0; ix < b.x1; ++ix)
                m = std::max(m, std::abs(f.cube.dim == 2 ? f.at_reflected(ix, iy) : f.at_reflected(ix)));
        return m;
    }
    if (p <= 0.0) throw std::invalid_argument("block_p_average: p must be positive");
    KahanSum acc;
    for (std::int64_t iy = b.y0; iy < b.y1; ++iy)
        for (std::int64_t ix = b.x0; ix < b.x1; ++ix) {
            double v = std::abs(f.cube.dim == 2 ? f.at_reflected(ix, iy) : f.at_reflected(ix));
            acc.add(p == 1.0 ? v : (p == 2.0 ? v * v : std::pow(v, p)));
        }
    double mean = acc.value() / static_cast<double>(b.cell_count());
    return p == 1.0 ? mean : (p == 2.0 ? std::sqrt(mean) : std::pow(mean, 1.0 / p));
}

/// <f>_{p,R} for a geometric cube R aligned with f's grid.
inline double average(const GridFunction& f, const Cube& r, double p, bool reflect = false) {
    return block_p_average(f, block_of_cube(f, r, reflect), p);
}

inline double average(const GridFunction& f, const DyadicIndex& idx, double p) {
    return block_p_average(f, block_of(f, idx), p);
}

/// Componentwise finite-difference gradient: central differences at interior
/// cells, one-sided at the boundary. Exact on affine samples.
inline std::vector<GridFunction> gradient(const GridFunction& f) {
    if (f.n < 2) throw std::invalid_argument("gradient: n must be at least 2");
    double h = f.cell_size();
    std::vector<GridFunction> out;
    out.reserve(static_cast<std::size_t>(f.cube.dim));
    std::int64_t rows = f.cube.dim == 2 ? f.n : 1;
    for (int axis = 0; axis < f.cube.dim; ++axis) {
        GridFunction g(f.cube, f.n);
        for (std::int64_t iy = 0; iy < rows; ++iy)
            for (std::int64_t ix = 0; ix < f.n; ++ix) {
                std::int64_t i = axis == 0 ? ix : iy;
                double lo, hi, denom;
                if (i == 0) {
                    lo = f.at(ix, iy);
                    hi = axis == 0 ? f.at(ix + 1, iy) : f.at(ix, iy + 1);
                    denom = h;
                } else if (i == f.n - 1) {
                    lo = axis == 0 ? f.at(ix - 1, iy) : f.at(ix, iy - 1);
                    hi = f.at(ix, iy);
                    denom = h;
                } else {
                    lo = axis == 0 ? f.at(ix - 1, iy) : f.at(ix, iy - 1);
                    hi = axis == 0 ? f.at(ix + 1, iy) : f.at(ix, iy + 1);
                    denom = 2.0 * h;
                }
                g.at(ix, iy) = (hi - lo) / denom;
            }
        out.push_back(std::move(g));
    }
    return out;
}

/// Euclidean norm of the finite-difference gradient.
inline GridFunction gradient_magnitude(const GridFunction& f) {
    auto comps = gradient(f);
    GridFunction g(f.cube, f.n);
    for (std::size_t i = 0; i < g.samples.size(); ++i) {
        double sq = 0.0;
        for (const auto& c : comps) sq += c.samples[i] * c.samples[i];
        g.samples[i] = std::sqrt(sq);
    }
    return g;
}

}  // namespace psv
