#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace psv {

using Point = std::array<double, 2>;

/// Axis-aligned cube in dimension 1 or 2. Only the first `dim` entries of
/// coordinate arrays are meaningful.
struct Cube {
    Point origin{0.0, 0.0};
    double side = 1.0;
    int dim = 1;

    Cube() = default;
    Cube(Point origin_, double side_, int dim_) : origin(origin_), side(side_), dim(dim_) {
        if (side <= 0.0) throw std::invalid_argument("Cube: side must be positive");
        if (dim != 1 && dim != 2) throw std::invalid_argument("Cube: dim must be 1 or 2");
    }

    static Cube unit(int dim) { return Cube({0.0, 0.0}, 1.0, dim); }

    double volume() const { return dim == 1 ? side : side * side; }

    Point center() const {
        Point c{0.0, 0.0};
        for (int j = 0; j < dim; ++j) c[j] = origin[j] + 0.5 * side;
        return c;
    }

    bool contains(const Point& x) const {
        for (int j = 0; j < dim; ++j)
            if (x[j] < origin[j] || x[j] > origin[j] + side) return false;
        return true;
    }
};

/// Dilate about the center: same center, side multiplied by gamma.
inline Cube dilate(const Cube& r, double gamma) {
    if (gamma <= 0.0) throw std::invalid_argument("dilate: gamma must be positive");
    Cube out = r;
    out.side = gamma * r.side;
    for (int j = 0; j < r.dim; ++j)
        out.origin[j] = r.origin[j] + 0.5 * r.side * (1.0 - gamma);
    return out;
}

/// Address of a dyadic subcube: generation j splits each axis into 2^j parts,
/// coords select the slot along each axis. All relations are exact integer
/// arithmetic.
struct DyadicIndex {
    int generation = 0;
    std::array<std::int64_t, 2> coords{0, 0};

    DyadicIndex() = default;
    DyadicIndex(int gen, std::int64_t cx, std::int64_t cy = 0)
        : generation(gen), coords{cx, cy} {}

    DyadicIndex parent() const {
        if (generation == 0) throw std::logic_error("DyadicIndex: root has no parent");
        return DyadicIndex(generation - 1, coords[0] >> 1, coords[1] >> 1);
    }

    bool operator==(const DyadicIndex& o) const {
        return generation == o.generation && coords == o.coords;
    }
};

/// True when `inner` addresses a cube contained in `outer` (same lattice).
inline bool dyadic_contains(const DyadicIndex& outer, const DyadicIndex& inner) {
    if (inner.generation < outer.generation) return false;
    int shift = inner.generation - outer.generation;
    return (inner.coords[0] >> shift) == outer.coords[0] &&
           (inner.coords[1] >> shift) == outer.coords[1];
}

/// Children of a dyadic index, 2^d of them, in lexicographic order.
inline std::vector<DyadicIndex> dyadic_children(const DyadicIndex& idx, int dim) {
    std::vector<DyadicIndex> out;
    out.reserve(dim == 1 ? 2 : 4);
    for (std::int64_t dy = 0; dy < (dim == 2 ? 2 : 1); ++dy)
        for (std::int64_t dx = 0; dx < 2; ++dx)
            out.emplace_back(idx.generation + 1, 2 * idx.coords[0] + dx,
                             dim == 2 ? 2 * idx.coords[1] + dy : 0);
    return out;
}

/// Geometric cube addressed by (j, k) inside q.
inline Cube subcube(const Cube& q, const DyadicIndex& idx) {
    double scale = std::ldexp(1.0, -idx.generation);  // 2^{-j}
    Cube out = q;
    out.side = q.side * scale;
    for (int j = 0; j < q.dim; ++j)
        out.origin[j] = q.origin[j] + static_cast<double>(idx.coords[j]) * out.side;
    return out;
}

/// All dyadic subcubes of generations 0..max_gen. Cubes of equal generation
/// tile q and are pairwise disjoint.
inline std::vector<std::pair<DyadicIndex, Cube>> dyadic_cubes(const Cube& q, int max_gen) {
    if (max_gen < 0) throw std::invalid_argument("dyadic_cubes: max_gen must be >= 0");
    std::vector<std::pair<DyadicIndex, Cube>> out;
    for (int g = 0; g <= max_gen; ++g) {
        std::int64_t m = std::int64_t{1} << g;
        for (std::int64_t cy = 0; cy < (q.dim == 2 ? m : 1); ++cy)
            for (std::int64_t cx = 0; cx < m; ++cx) {
                DyadicIndex idx(g, cx, cy);
                out.emplace_back(idx, subcube(q, idx));
            }
    }
    return out;
}

/// Fold a point into q by the 2*side-periodic even reflection across each
/// face: y_j = (x_j - a_j) mod 2l, x*_j = a_j + l - |y_j - l|.
inline Point reflect_point(const Cube& q, Point x) {
    double l = q.side;
    Point out = x;
    for (int j = 0; j < q.dim; ++j) {
        double y = std::fmod(x[j] - q.origin[j], 2.0 * l);
        if (y < 0.0) y += 2.0 * l;
        out[j] = q.origin[j] + l - std::abs(y - l);
    }
    return out;
}

}  // namespace psv
