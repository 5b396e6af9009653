#include <cmath>
#include <random>

#include "doctest.h"
#include "oracle.hpp"
#include "qgs/errors.hpp"
#include "qgs/secular.hpp"
#include "qgs/spectrum.hpp"
#include "random_graphs.hpp"

using namespace qgs;

namespace {
constexpr double kPi = 3.14159265358979323846;

std::vector<std::pair<double, int>> eigs(const std::vector<EigenResult>& rs) {
    std::vector<std::pair<double, int>> out;
    for (const auto& r : rs) out.push_back({r.lambda, r.multiplicity});
    return out;
}
}  // namespace

TEST_CASE("secular matrix pinned entries") {
    MetricGraph g = make_interval(1.0);
    SecularMatrix sm = assemble_secular(g, VertexConditionSet::neumann(2), 1.0);
    CHECK(sm.M(0, 0).real() == doctest::Approx(-std::cos(1.0) / std::sin(1.0)).epsilon(1e-12));
    CHECK(sm.M(0, 1).real() == doctest::Approx(1.0 / std::sin(1.0)).epsilon(1e-12));
    CHECK(sm.M(1, 0).real() == doctest::Approx(1.0 / std::sin(1.0)).epsilon(1e-12));
    CHECK((sm.M - sm.M.adjoint()).norm() == 0.0);

    // lambda -> 0 gives the sign-flipped weighted combinatorial Laplacian
    MetricGraph h = make_interval(2.0);
    SecularMatrix sm0 = assemble_secular(h, VertexConditionSet::neumann(2), 0.0);
    CHECK(sm0.M(0, 0).real() == doctest::Approx(-0.5));
    CHECK(sm0.M(0, 1).real() == doctest::Approx(0.5));

    // loop contributes both endpoints to the same vertex
    MetricGraph loop = make_loop(1.0);
    SecularMatrix sml = assemble_secular(loop, VertexConditionSet::neumann(1), 1.0);
    CHECK(sml.M(0, 0).real() ==
          doctest::Approx(2.0 * (1.0 - std::cos(1.0)) / std::sin(1.0)).epsilon(1e-12));

    CHECK_THROWS_AS(assemble_secular(g, VertexConditionSet::neumann(2), kPi * kPi), SolverError);
}

TEST_CASE("interval spectrum: classical closed form") {
    MetricGraph g = make_interval(1.0);
    auto rs = solve_spectrum(g, VertexConditionSet::neumann(2), -1.0, 45.0);
    REQUIRE(rs.size() == 3);
    CHECK(std::abs(rs[0].lambda) < 1e-9);
    CHECK(rs[1].lambda == doctest::Approx(kPi * kPi).epsilon(1e-10));
    CHECK(rs[2].lambda == doctest::Approx(4.0 * kPi * kPi).epsilon(1e-10));
    for (const auto& r : rs) {
        CHECK(r.multiplicity == 1);
        CHECK(r.residual < 1e-8);
    }
}

TEST_CASE("loop spectrum: double eigenvalues recovered at sigma_D") {
    MetricGraph g = make_loop(1.0);
    auto rs = solve_spectrum(g, VertexConditionSet::neumann(1), 1.0, 200.0);
    REQUIRE(rs.size() == 2);
    CHECK(rs[0].lambda == doctest::Approx(4.0 * kPi * kPi).epsilon(1e-10));
    CHECK(rs[0].multiplicity == 2);
    CHECK(rs[1].lambda == doctest::Approx(16.0 * kPi * kPi).epsilon(1e-10));
    CHECK(rs[1].multiplicity == 2);
}

TEST_CASE("equilateral 3-star with Dirichlet leaves") {
    MetricGraph g = make_star({1.0, 1.0, 1.0});
    VertexConditionSet cond = VertexConditionSet::neumann(4);
    cond.set_dirichlet(1);
    cond.set_dirichlet(2);
    cond.set_dirichlet(3);
    auto rs = solve_spectrum(g, cond, 0.0, 30.0);
    auto e = eigs(rs);
    REQUIRE(e.size() == 3);
    CHECK(e[0].first == doctest::Approx(kPi * kPi / 4.0).epsilon(1e-10));
    CHECK(e[0].second == 1);
    CHECK(e[1].first == doctest::Approx(kPi * kPi).epsilon(1e-10));
    CHECK(e[1].second == 2);
    CHECK(e[2].first == doctest::Approx(9.0 * kPi * kPi / 4.0).epsilon(1e-10));
    CHECK(e[2].second == 1);
}

TEST_CASE("equilateral 3-star all Neumann: even multiplicities off sigma_D") {
    MetricGraph g = make_star({1.0, 1.0, 1.0});
    auto rs = solve_spectrum(g, VertexConditionSet::neumann(4), -1.0, 25.0);
    auto e = eigs(rs);
    REQUIRE(e.size() == 4);
    CHECK(std::abs(e[0].first) < 1e-9);
    CHECK(e[0].second == 1);
    CHECK(e[1].first == doctest::Approx(kPi * kPi / 4.0).epsilon(1e-10));
    CHECK(e[1].second == 2);  // found by smallest-singular-value minima, no sign change
    CHECK(e[2].first == doctest::Approx(kPi * kPi).epsilon(1e-10));
    CHECK(e[2].second == 1);
    CHECK(e[3].first == doctest::Approx(9.0 * kPi * kPi / 4.0).epsilon(1e-10));
    CHECK(e[3].second == 2);
}

TEST_CASE("Dirichlet-resonant states") {
    // two-edge cycle at pi^2: one-dimensional space, sin vs -sin
    MetricGraph cyc = build_graph({"a", "b"},
                                  {Edge{"e1", 0, 1, 1.0, {}}, Edge{"e2", 0, 1, 1.0, {}}});
    auto fs = dirichlet_resonant_states(cyc, VertexConditionSet::neumann(2), kPi * kPi);
    REQUIRE(fs.size() == 1);
    CHECK(fs[0].waves[0].b == doctest::Approx(-fs[0].waves[1].b));
    CHECK(std::abs(fs[0].waves[0].a) < 1e-12);
    CHECK(condition_residual(cyc, VertexConditionSet::neumann(2), fs[0]) < 1e-8);

    // single Neumann edge: sin branch violates the leaf condition
    MetricGraph seg = make_interval(1.0);
    CHECK(dirichlet_resonant_states(seg, VertexConditionSet::neumann(2), kPi * kPi).empty());

    // Neumann 3-star: leaf conditions kill every sin state
    MetricGraph star = make_star({1.0, 1.0, 1.0});
    CHECK(dirichlet_resonant_states(star, VertexConditionSet::neumann(4), kPi * kPi).empty());
}

TEST_CASE("eigenfunction reconstruction closed forms") {
    MetricGraph g = make_interval(1.0);
    VertexConditionSet cond = VertexConditionSet::neumann(2);
    Eigen::VectorXd vv(2);

    vv << 1.0, 1.0;
    auto w = eigenfunction_reconstruct(g, cond, 0.0, vv);
    CHECK(w[0].a == doctest::Approx(1.0));
    CHECK(std::abs(w[0].b) < 1e-14);

    vv << 1.0, 0.0;
    w = eigenfunction_reconstruct(g, cond, 0.0, vv);
    CHECK(w[0].a == doctest::Approx(1.0));
    CHECK(w[0].b == doctest::Approx(-1.0));

    // boundary data (1, -1) at lambda = 4; derivative at 0 is -2 cot(1)
    vv << 1.0, -1.0;
    w = eigenfunction_reconstruct(g, cond, 4.0, vv);
    CHECK(w[0].a == doctest::Approx(1.0));
    CHECK(w[0].b == doctest::Approx(-2.0 / std::tan(1.0)).epsilon(1e-12));
    CHECK(w[0].value(0.0) == doctest::Approx(1.0));
    CHECK(w[0].value(1.0) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("negative-lambda bound state with an attractive delta coupling") {
    MetricGraph g = make_interval(1.0);
    VertexConditionSet cond = VertexConditionSet::neumann(2);
    cond.set_delta(1, -3.0);
    // closed form: omega tanh(omega) = 3 from the Neumann-Robin interval
    double lo = 2.0, hi = 4.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (mid * std::tanh(mid) < 3.0 ? lo : hi) = mid;
    }
    const double omega = 0.5 * (lo + hi);
    auto rs = solve_spectrum(g, cond, -15.0, -0.5);
    REQUIRE(rs.size() == 1);
    CHECK(rs[0].lambda == doctest::Approx(-omega * omega).epsilon(1e-9));
    CHECK(rs[0].residual < 1e-8);
}

TEST_CASE("oracle equivalence on seeded random graphs") {
    std::mt19937 rng(2024);
    for (int trial = 0; trial < 5; ++trial) {
        MetricGraph g = testutil::random_graph(rng);
        VertexConditionSet cond = VertexConditionSet::neumann(g.num_vertices());
        SpectrumOptions opts;
        opts.scan_step = 0.002;
        auto rs = solve_spectrum(g, cond, 0.0, 60.0, opts);
        auto expected = oracle::spectrum(g, cond, 0.0, 60.0);
        REQUIRE(rs.size() == expected.size());
        for (size_t i = 0; i < rs.size(); ++i) {
            CHECK(rs[i].lambda == doctest::Approx(expected[i].first).epsilon(1e-8));
            CHECK(rs[i].multiplicity == expected[i].second);
        }
    }
}

TEST_CASE("subdivision leaves the spectrum unchanged") {
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> frac(0.3, 0.7);
    for (int trial = 0; trial < 3; ++trial) {
        MetricGraph g = testutil::random_graph(rng);
        VertexConditionSet cond = VertexConditionSet::neumann(g.num_vertices());
        auto before = solve_spectrum(g, cond, -1.0, 40.0);

        std::uniform_int_distribution<int> pick(0, g.num_edges() - 1);
        const int e = pick(rng);
        MetricGraph h = subdivide_edge(g, e, frac(rng) * g.edge(e).length);
        auto after = solve_spectrum(h, VertexConditionSet::neumann(h.num_vertices()), -1.0, 40.0);

        REQUIRE(before.size() == after.size());
        for (size_t i = 0; i < before.size(); ++i) {
            CHECK(before[i].lambda == doctest::Approx(after[i].lambda).epsilon(1e-9));
            CHECK(before[i].multiplicity == after[i].multiplicity);
        }
    }
}

TEST_CASE("Weyl count sanity") {
    MetricGraph g = make_star({1.0, 1.3, 0.7});
    auto rs = solve_spectrum(g, VertexConditionSet::neumann(4), -0.5, 100.0);
    int count = 0;
    for (const auto& r : rs) count += r.multiplicity;
    const double total_length = 3.0;
    const double predicted = total_length * 10.0 / kPi;
    CHECK(std::abs(count - predicted) <= g.num_vertices() + g.num_edges());
}

TEST_CASE("reconstructed eigenfunctions meet vertex conditions") {
    MetricGraph g = make_star({1.0, 1.4, 0.6});
    VertexConditionSet cond = VertexConditionSet::neumann(4);
    cond.set_delta(0, 0.8);
    auto rs = solve_spectrum(g, cond, -1.0, 50.0);
    CHECK(rs.size() >= 4);
    for (const auto& r : rs) {
        REQUIRE(!r.eigenfunctions.empty());
        for (const auto& f : r.eigenfunctions) {
            double norm2 = 0.0;
            for (int e = 0; e < g.num_edges(); ++e)
                norm2 += f.waves[static_cast<size_t>(e)].l2_squared(g.edge(e).length);
            CHECK(norm2 == doctest::Approx(1.0).epsilon(1e-9));
            CHECK(condition_residual(g, cond, f) < 1e-8);
        }
    }
}
