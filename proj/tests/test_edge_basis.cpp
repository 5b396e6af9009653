#include <cmath>
#include <random>

#include "doctest.h"
#include "qgs/edge_basis.hpp"
#include "qgs/errors.hpp"

using namespace qgs;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("basis values at pinned points") {
    auto b = basis_eval(0.0, 2.0);
    CHECK(b.c == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(b.s == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(b.dc == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(b.ds == doctest::Approx(1.0).epsilon(1e-14));

    b = basis_eval(kPi * kPi, 1.0);
    CHECK(b.c == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(std::abs(b.s) < 1e-14);
    CHECK(std::abs(b.dc) < 1e-12);
    CHECK(b.ds == doctest::Approx(-1.0).epsilon(1e-14));

    b = basis_eval(-1.0, 1.0);
    CHECK(b.c == doctest::Approx(std::cosh(1.0)).epsilon(1e-14));
    CHECK(b.s == doctest::Approx(std::sinh(1.0)).epsilon(1e-14));
    CHECK(b.dc == doctest::Approx(std::sinh(1.0)).epsilon(1e-14));
    CHECK(b.ds == doctest::Approx(std::cosh(1.0)).epsilon(1e-14));
}

TEST_CASE("Wronskian identity on random (lambda, x) pairs") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> lam(-50.0, 200.0);
    std::uniform_real_distribution<double> pos(0.0, 3.0);
    for (int i = 0; i < 10000; ++i) {
        const double l = lam(rng), x = pos(rng);
        const BasisValues b = basis_eval(l, x);
        // relative to the natural magnitude c^2 + |lambda| s^2 (the two
        // cancelling terms in the hyperbolic regime)
        const double scale = std::max(1.0, b.c * b.c + std::abs(l) * b.s * b.s);
        CHECK(std::abs(b.c * b.ds - b.dc * b.s - 1.0) < 1e-12 * scale);
    }
}

TEST_CASE("continuity across lambda = 0") {
    for (double x : {0.1, 0.7, 1.0, 2.5}) {
        const BasisValues p = basis_eval(1e-8, x);
        const BasisValues m = basis_eval(-1e-8, x);
        CHECK(std::abs(p.c - m.c) < 1e-6);
        CHECK(std::abs(p.s - m.s) < 1e-6);
        CHECK(std::abs(p.dc - m.dc) < 1e-6);
        CHECK(std::abs(p.ds - m.ds) < 1e-6);
    }
}

TEST_CASE("transfer matrix pinned values and composition") {
    auto t = edge_transfer(0.0, 1.5);
    CHECK(t[0][0] == doctest::Approx(1.0));
    CHECK(t[0][1] == doctest::Approx(1.5));
    CHECK(t[1][0] == doctest::Approx(0.0));
    CHECK(t[1][1] == doctest::Approx(1.0));

    t = edge_transfer(kPi * kPi, 1.0);
    CHECK(t[0][0] == doctest::Approx(-1.0));
    CHECK(std::abs(t[0][1]) < 1e-14);
    CHECK(std::abs(t[1][0]) < 1e-12);
    CHECK(t[1][1] == doctest::Approx(-1.0));

    t = edge_transfer(4.0, kPi / 2.0);
    CHECK(t[0][0] == doctest::Approx(-1.0));
    CHECK(std::abs(t[0][1]) < 1e-14);
    CHECK(std::abs(t[1][0]) < 1e-13);
    CHECK(t[1][1] == doctest::Approx(-1.0));

    std::mt19937 rng(11);
    std::uniform_real_distribution<double> lam(-20.0, 80.0);
    std::uniform_real_distribution<double> len(0.1, 1.5);
    for (int i = 0; i < 200; ++i) {
        const double l = lam(rng), l1 = len(rng), l2 = len(rng);
        const auto a = edge_transfer(l, l1);
        const auto b = edge_transfer(l, l2);
        const auto c = edge_transfer(l, l1 + l2);
        for (int r = 0; r < 2; ++r)
            for (int s = 0; s < 2; ++s) {
                const double prod = b[r][0] * a[0][s] + b[r][1] * a[1][s];
                CHECK(std::abs(prod - c[r][s]) < 1e-10);
            }
        CHECK(std::abs(a[0][0] * a[1][1] - a[0][1] * a[1][0] - 1.0) < 1e-12);
    }
}

TEST_CASE("DtN block pinned values") {
    auto d = edge_dtn_block(0.0, 1.0);
    CHECK(d[0][0] == doctest::Approx(-1.0));
    CHECK(d[0][1] == doctest::Approx(1.0));
    CHECK(d[1][0] == doctest::Approx(1.0));
    CHECK(d[1][1] == doctest::Approx(-1.0));

    d = edge_dtn_block(kPi * kPi / 4.0, 1.0);
    CHECK(std::abs(d[0][0]) < 1e-12);
    CHECK(d[0][1] == doctest::Approx(kPi / 2.0));

    d = edge_dtn_block(-1.0, 1.0);
    CHECK(d[0][0] == doctest::Approx(-std::cosh(1.0) / std::sinh(1.0)));
    CHECK(d[0][1] == doctest::Approx(1.0 / std::sinh(1.0)));

    CHECK_THROWS_AS(edge_dtn_block(kPi * kPi, 1.0), SolverError);
}

TEST_CASE("DtN block consistent with the transfer matrix") {
    // eliminating u'(0) between (u(l), u'(l)) = T (u(0), u'(0)) reproduces D
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> lam(-10.0, 60.0);
    std::uniform_real_distribution<double> len(0.3, 2.0);
    int done = 0;
    while (done < 100) {
        const double l = lam(rng), ell = len(rng);
        if (dirichlet_distance(l, ell) < 1e-3) continue;
        ++done;
        const auto t = edge_transfer(l, ell);
        // u'(0) = (u(l) - t00 u(0)) / t01 ; out at 0 is u'(0)
        const double d00 = -t[0][0] / t[0][1];
        const double d01 = 1.0 / t[0][1];
        // out at l is -u'(l) = -(t10 u0 + t11 u'(0))
        const double d11 = -t[1][1] / t[0][1];
        const double d10 = -t[1][0] + t[1][1] * t[0][0] / t[0][1];
        const auto d = edge_dtn_block(l, ell);
        CHECK(std::abs(d[0][0] - d00) < 1e-9 * (1.0 + std::abs(d00)));
        CHECK(std::abs(d[0][1] - d01) < 1e-9 * (1.0 + std::abs(d01)));
        CHECK(std::abs(d[1][0] - d10) < 1e-9 * (1.0 + std::abs(d10)));
        CHECK(std::abs(d[1][1] - d11) < 1e-9 * (1.0 + std::abs(d11)));
    }
}

TEST_CASE("basis integrals match quadrature") {
    // Simpson on a fine grid as the independent check
    auto simpson = [](auto f, double a, double b, int n) {
        double h = (b - a) / n;
        double acc = f(a) + f(b);
        for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
        return acc * h / 3.0;
    };
    for (double lambda : {-4.0, -0.5, 0.0, 1e-9, 0.3, 2.0, 25.0}) {
        for (double l : {0.4, 1.0, 1.7}) {
            const BasisIntegrals I = basis_integrals(lambda, l);
            auto c2 = [&](double x) { auto b = basis_eval(lambda, x); return b.c * b.c; };
            auto cs = [&](double x) { auto b = basis_eval(lambda, x); return b.c * b.s; };
            auto s2 = [&](double x) { auto b = basis_eval(lambda, x); return b.s * b.s; };
            CHECK(I.cc == doctest::Approx(simpson(c2, 0, l, 2000)).epsilon(1e-9));
            CHECK(I.cs == doctest::Approx(simpson(cs, 0, l, 2000)).epsilon(1e-9));
            CHECK(I.ss == doctest::Approx(simpson(s2, 0, l, 2000)).epsilon(1e-9));
        }
    }
}

TEST_CASE("edge wave satisfies the ODE") {
    EdgeWave w;
    w.lambda = 7.3;
    w.a = 0.6;
    w.b = -1.1;
    const double h = 1e-4;
    for (double x : {0.2, 0.5, 0.9}) {
        const double upp = (w.value(x + h) - 2.0 * w.value(x) + w.value(x - h)) / (h * h);
        CHECK(std::abs(-upp - w.lambda * w.value(x)) < 1e-5);
    }
}
