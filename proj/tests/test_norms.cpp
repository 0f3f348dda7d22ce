#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "psv/norms.hpp"

using namespace psv;

namespace {

GridFunction smooth_test_fn(std::uint64_t seed, const Cube& q, std::int64_t n) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> amp(-1.0, 1.0);
    double a1 = amp(rng), a2 = amp(rng), a3 = amp(rng);
    return GridFunction::from_function(q, n, [&](const Point& x) {
        double t = x[0] + (q.dim == 2 ? 0.61 * x[1] : 0.0);
        return a1 * std::sin(6.28318530717958648 * t) + a2 * std::cos(2.0 * t) + a3 * t;
    });
}

}  // namespace

TEST_CASE("weighted L^p norm uses the multiplier normalization") {
    Cube q = Cube::unit(1);
    auto one = GridFunction::constant(q, 256, 1.0);
    auto two = GridFunction::constant(q, 256, 2.0);
    CHECK(lp_norm(one, one, 1.0) == Catch::Approx(1.0));
    CHECK(lp_norm(one, one, 3.0) == Catch::Approx(1.0));
    CHECK(lp_norm(one, two, 1.0) == Catch::Approx(2.0));

    auto f = GridFunction::from_function(q, 4096, [](const Point& x) { return x[0]; });
    auto onef = GridFunction::constant(q, 4096, 1.0);
    CHECK(lp_norm(f, onef, 2.0) == Catch::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-6));
}

TEST_CASE("weak norm: exact on simple functions and below the strong norm") {
    Cube q = Cube::unit(1);
    auto ind = GridFunction::from_function(q, 64, [](const Point& x) { return x[0] < 0.5 ? 1.0 : 0.0; });
    auto one = GridFunction::constant(q, 64, 1.0);
    CHECK(weak_lp_norm(ind, one, 1.0) == Catch::Approx(0.5));

    auto c = GridFunction::constant(q, 64, 2.5);
    auto sig = GridFunction::constant(q, 64, 3.0);
    CHECK(weak_lp_norm(c, sig, 2.0) == Catch::Approx(2.5 * 3.0));

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    for (int trial = 0; trial < 10; ++trial) {
        auto f = GridFunction::from_function(q, 128, [&](const Point&) { return dist(rng); });
        auto w = GridFunction::from_function(q, 128, [&](const Point&) { return 0.5 + std::abs(dist(rng)); });
        for (double p : {1.0, 2.0, 3.5})
            CHECK(weak_lp_norm(f, w, p) <= lp_norm(f, w, p) * (1.0 + 1e-13));
    }
}

TEST_CASE("difference seminorm closed form for the identity map") {
    Cube q = Cube::unit(1);
    auto f = GridFunction::from_function(q, 2048, [](const Point& x) { return x[0]; });
    auto one = GridFunction::constant(q, 2048, 1.0);
    for (double s : {0.1, 0.5, 0.9, 0.95}) {
        double truth = 2.0 / ((1.0 - s) * (2.0 - s));
        auto res = tl_seminorm(f, one, s, 1.0, 1.0);
        CHECK(res.value == Catch::Approx(truth).epsilon(1e-3));
        CHECK(res.pair_count == 2048 * 2047);
    }
    // BBM factor behavior at s = 0.9
    auto res = tl_seminorm(f, one, 0.9, 1.0, 1.0);
    CHECK(0.1 * res.value == Catch::Approx(2.0 / 1.1).epsilon(1e-3));
}

TEST_CASE("seminorm vanishes exactly iff constant") {
    for (int dim : {1, 2}) {
        auto c = GridFunction::constant(Cube::unit(dim), 16, 5.0);
        auto one = GridFunction::constant(Cube::unit(dim), 16, 1.0);
        for (auto mode : {TlQuadrature::midpoint, TlQuadrature::cell_exact})
            CHECK(tl_seminorm(c, one, 0.5, 2.0, 2.0, mode).value == 0.0);
        auto f = smooth_test_fn(4, Cube::unit(dim), 16);
        CHECK(tl_seminorm(f, one, 0.5, 2.0, 2.0).value > 0.0);
    }
}

TEST_CASE("seminorm refinement stability on the smooth suite") {
    for (int dim : {1, 2}) {
        std::int64_t n0 = dim == 1 ? 256 : 32;
        auto one_n0 = GridFunction::constant(Cube::unit(dim), n0, 1.0);
        auto one_n1 = GridFunction::constant(Cube::unit(dim), 2 * n0, 1.0);
        for (std::uint64_t seed : {21u, 22u}) {
            auto fc = smooth_test_fn(seed, Cube::unit(dim), n0);
            auto ff = smooth_test_fn(seed, Cube::unit(dim), 2 * n0);
            for (double s : {0.3, 0.7, 0.9}) {
                double coarse = tl_seminorm(fc, one_n0, s, 2.0, 2.0).value;
                double fine = tl_seminorm(ff, one_n1, s, 2.0, 2.0).value;
                CHECK(std::abs(fine / coarse - 1.0) < 0.05);
            }
        }
    }
}

TEST_CASE("reverse-triangle contraction of the seminorm") {
    Cube q = Cube::unit(1);
    auto one = GridFunction::constant(q, 128, 1.0);
    for (std::uint64_t seed : {31u, 32u, 33u}) {
        auto u = smooth_test_fn(seed, q, 128);
        for (double c : {0.0, 0.4, -1.0}) {
            GridFunction v = u;
            for (double& x : v.samples) x = std::abs(x - c);
            for (auto mode : {TlQuadrature::midpoint, TlQuadrature::cell_exact}) {
                double lhs = tl_seminorm(v, one, 0.6, 2.0, 1.5, mode).value;
                double rhs = tl_seminorm(u, one, 0.6, 2.0, 1.5, mode).value;
                CHECK(lhs <= rhs * (1.0 + 1e-12));
            }
        }
    }
}

TEST_CASE("difference quotient closed forms") {
    Cube q = Cube::unit(1);
    std::int64_t n = 4096;
    auto c = GridFunction::constant(q, n, 3.0);
    CellBlock whole = whole_block(c);
    CHECK(difference_quotient(c, whole, n / 2, 0, 0.5, 1.0, false) == 0.0);

    auto f = GridFunction::from_function(q, n, [](const Point& x) { return x[0]; });
    for (double s : {0.3, 0.5}) {
        double truth = 2.0 * std::pow(0.5, 1.0 - s) / (1.0 - s);
        double got = difference_quotient(f, whole_block(f), n / 2, 0, s, 1.0, false);
        CHECK(got == Catch::Approx(truth).epsilon(0.03));
    }

    // constant extended by reflection stays constant
    DyadicIndex root(0, 0);
    CellBlock b3 = block_of_dilate3(c, root);
    CHECK(difference_quotient(c, b3, 5, 0, 0.5, 1.0, true) == 0.0);
    CHECK_THROWS_AS(difference_quotient(c, b3, 5, 0, 0.5, 1.0, false), std::invalid_argument);
}

TEST_CASE("weighted averages") {
    Cube q = Cube::unit(1);
    auto f = GridFunction::from_function(q, 64, [](const Point& x) { return x[0] < 0.5 ? 1.0 : 0.0; });
    auto w = GridFunction::from_function(q, 64, [](const Point& x) { return x[0] < 0.5 ? 3.0 : 1.0; });
    auto one = GridFunction::constant(q, 64, 1.0);
    CHECK(weighted_average(f, one, whole_block(f)) == Catch::Approx(0.5));
    auto c = GridFunction::constant(q, 64, 4.2);
    CHECK(weighted_average(c, w, whole_block(c)) == Catch::Approx(4.2));
    CHECK(weighted_average(f, w, whole_block(f)) == Catch::Approx(0.75));
}

TEST_CASE("oscillation comparison: inf over constants vs weighted and plain averages") {
    Cube q = Cube::unit(1);
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 6; ++trial) {
        auto f = smooth_test_fn(50 + trial, q, 128);
        auto omega = GridFunction::from_function(q, 128, [&](const Point& x) {
            return 0.5 + x[0] * x[0] + 0.1 * static_cast<double>(trial);
        });
        for (double qq : {1.0, 2.0, 3.0}) {
            GridFunction wq = omega;  // omega^q as the averaging density
            for (double& v : wq.samples) v = std::pow(v, qq);
            double weighted_mean = weighted_average(f, wq, whole_block(f));
            double plain_mean = block_mean(f, whole_block(f));

            GridFunction fw = f, fp = f;
            for (double& v : fw.samples) v -= weighted_mean;
            for (double& v : fp.samples) v -= plain_mean;
            double inf_c = inf_constant_lp(f, omega, qq);
            double at_weighted = lp_norm(fw, omega, qq);
            double at_plain = lp_norm(fp, omega, qq);
            CHECK(inf_c <= at_weighted * (1.0 + 1e-9));
            CHECK(at_weighted <= 2.0 * at_plain * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("mean oscillation against the BBM-normalized seminorm") {
    // ||f - <f>_Q||_{L^1} <= C (1-s)^{1/r} l(Q)^s [f]_{F^s_{1,r}} with one
    // measured constant across the smooth suite and s in [0.1, 0.95].
    Cube q = Cube::unit(1);
    auto one = GridFunction::constant(q, 256, 1.0);
    double worst = 0.0;
    for (std::uint64_t seed : {61u, 62u, 63u}) {
        auto f = smooth_test_fn(seed, q, 256);
        double mean = block_mean(f, whole_block(f));
        GridFunction osc = f;
        for (double& v : osc.samples) v -= mean;
        double lhs = lp_norm(osc, one, 1.0);
        for (double s : {0.1, 0.3, 0.5, 0.7, 0.9, 0.95})
            for (double r : {1.0, 2.0}) {
                double sem = tl_seminorm(f, one, s, 1.0, r).value;
                double rhs = std::pow(1.0 - s, 1.0 / r) * sem;
                worst = std::max(worst, lhs / rhs);
            }
    }
    CHECK(worst < 2.0);
    CHECK(worst > 0.0);
}
