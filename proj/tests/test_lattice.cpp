#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "psv/lattice.hpp"

using namespace psv;

TEST_CASE("dyadic_cubes enumerates the full tree") {
    Cube q = Cube::unit(1);
    auto gen0 = dyadic_cubes(q, 0);
    REQUIRE(gen0.size() == 1);
    CHECK(gen0[0].second.side == 1.0);

    auto gen1 = dyadic_cubes(q, 1);
    REQUIRE(gen1.size() == 3);
    CHECK(gen1[1].second.origin[0] == 0.0);
    CHECK(gen1[1].second.side == 0.5);
    CHECK(gen1[2].second.origin[0] == 0.5);

    auto gen2d = dyadic_cubes(Cube::unit(2), 2);
    CHECK(gen2d.size() == 1 + 4 + 16);
}

TEST_CASE("equal-generation cubes tile the volume exactly") {
    for (int dim : {1, 2}) {
        Cube q({0.25, -1.0}, 2.0, dim);
        for (int g = 0; g <= 4; ++g) {
            double total = 0.0;
            for (auto& [idx, c] : dyadic_cubes(q, g))
                if (idx.generation == g) total += c.volume();
            CHECK(total == Catch::Approx(q.volume()).epsilon(1e-14));
        }
    }
}

TEST_CASE("dilate preserves the center") {
    Cube r({0.25, 0.0}, 0.25, 1);
    Cube d3 = dilate(r, 3.0);
    CHECK(d3.origin[0] == Catch::Approx(0.0));
    CHECK(d3.side == Catch::Approx(0.75));
    CHECK(d3.center()[0] == Catch::Approx(r.center()[0]));

    Cube r2({0.0, 0.0}, 0.5, 2);
    Cube d2 = dilate(r2, 3.0);
    CHECK(d2.origin[0] == Catch::Approx(-0.5));
    CHECK(d2.origin[1] == Catch::Approx(-0.5));
    CHECK(d2.side == Catch::Approx(1.5));

    CHECK(dilate(r, 1.0).origin[0] == r.origin[0]);
}

TEST_CASE("reflect_point implements the even periodic fold") {
    Cube q = Cube::unit(1);
    CHECK(reflect_point(q, {0.3, 0.0})[0] == Catch::Approx(0.3));
    CHECK(reflect_point(q, {1.25, 0.0})[0] == Catch::Approx(0.75));
    CHECK(reflect_point(q, {-0.3, 0.0})[0] == Catch::Approx(0.3));

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> dist(-5.0, 5.0);
    for (int trial = 0; trial < 200; ++trial) {
        Cube qq({dist(rng), dist(rng)}, 1.0 + std::abs(dist(rng)), 2);
        Point x{dist(rng), dist(rng)};
        Point y = reflect_point(qq, x);
        CHECK(qq.contains(y));
        // idempotence
        Point z = reflect_point(qq, y);
        CHECK(z[0] == Catch::Approx(y[0]).margin(1e-12));
        CHECK(z[1] == Catch::Approx(y[1]).margin(1e-12));
        // periodicity along each axis
        for (int axis = 0; axis < 2; ++axis) {
            Point shifted = x;
            shifted[axis] += 2.0 * qq.side;
            Point w = reflect_point(qq, shifted);
            CHECK(w[0] == Catch::Approx(y[0]).margin(1e-9));
            CHECK(w[1] == Catch::Approx(y[1]).margin(1e-9));
        }
    }
}

TEST_CASE("dyadic parent/child relations are exact") {
    DyadicIndex idx(3, 5, 2);
    auto kids = dyadic_children(idx, 2);
    REQUIRE(kids.size() == 4);
    for (auto& k : kids) {
        CHECK(k.parent() == idx);
        CHECK(dyadic_contains(idx, k));
    }
    CHECK(dyadic_contains(DyadicIndex(0, 0, 0), idx));
    CHECK(!dyadic_contains(DyadicIndex(3, 4, 2), DyadicIndex(3, 5, 2)));
}
