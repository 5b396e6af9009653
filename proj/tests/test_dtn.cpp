#include <cmath>
#include <memory>

#include "doctest.h"
#include "qgs/dtn.hpp"
#include "qgs/errors.hpp"
#include "qgs/spectrum.hpp"

using namespace qgs;

namespace {
constexpr double kPi = 3.14159265358979323846;

// sqrt(lambda) tan(sqrt(lambda) a), continued hyperbolically for lambda < 0
double pendant_dtn(double lambda, double a) {
    if (lambda >= 0.0) {
        const double w = std::sqrt(lambda);
        return w * std::tan(w * a);
    }
    const double w = std::sqrt(-lambda);
    return -w * std::tanh(w * a);
}
}  // namespace

TEST_CASE("pendant DtN closed form") {
    MetricGraph pendant = make_interval(1.0);
    VertexConditionSet cond = VertexConditionSet::neumann(2);
    CHECK(dtn_function(pendant, 0, cond, 1.0) == doctest::Approx(std::tan(1.0)).epsilon(1e-12));
    CHECK(std::abs(dtn_function(pendant, 0, cond, 0.0)) < 1e-12);
    CHECK(dtn_function(pendant, 0, cond, -1.0) == doctest::Approx(-std::tanh(1.0)).epsilon(1e-12));

    for (double lam = -4.0; lam < 30.0; lam += 0.173) {
        if (std::abs(lam - kPi * kPi / 4.0) < 0.3) continue;  // pole
        if (std::abs(lam - 9.0 * kPi * kPi / 4.0) < 0.5) continue;
        CHECK(dtn_function(pendant, 0, cond, lam) ==
              doctest::Approx(pendant_dtn(lam, 1.0)).epsilon(1e-10));
    }
    // evaluation at a pole fails loudly
    CHECK_THROWS_AS(dtn_function(pendant, 0, cond, kPi * kPi / 4.0), SolverError);
}

TEST_CASE("pendant DtN is monotone between poles") {
    MetricGraph pendant = make_interval(1.0);
    VertexConditionSet cond = VertexConditionSet::neumann(2);
    double prev = dtn_function(pendant, 0, cond, 0.1);
    for (double lam = 0.2; lam < 2.3; lam += 0.1) {
        const double cur = dtn_function(pendant, 0, cond, lam);
        CHECK(cur > prev);
        prev = cur;
    }
}

TEST_CASE("pendant pole candidates carry Psi and the residue law") {
    MetricGraph pendant = make_interval(1.0);
    VertexConditionSet cond = VertexConditionSet::neumann(2);
    auto poles = dtn_pole_candidates(pendant, 0, cond, 0.0, 30.0);
    REQUIRE(poles.size() == 2);
    CHECK(poles[0].lambda0 == doctest::Approx(kPi * kPi / 4.0).epsilon(1e-10));
    CHECK(poles[1].lambda0 == doctest::Approx(9.0 * kPi * kPi / 4.0).epsilon(1e-10));
    CHECK(poles[0].simple);
    CHECK(poles[0].applicable());
    // psi = pi / sqrt(2) for the normalized sqrt(2) sin(pi x / 2)
    CHECK(poles[0].psi == doctest::Approx(kPi / std::sqrt(2.0)).epsilon(1e-8));
    // residue = -pi^2 / 2, both from the fit and from -Psi^2
    CHECK(std::abs(poles[0].residue - (-kPi * kPi / 2.0)) < 1e-4);
    CHECK(std::abs(poles[0].residue + poles[0].psi * poles[0].psi) <
          1e-3 * std::abs(poles[0].residue));
}

TEST_CASE("Dirichlet-tip pendant poles are flagged on sigma_D") {
    MetricGraph pendant = make_interval(1.0);
    VertexConditionSet cond = VertexConditionSet::neumann(2);
    cond.set_dirichlet(1);
    auto poles = dtn_pole_candidates(pendant, 0, cond, 0.0, 45.0);
    REQUIRE(poles.size() == 2);
    CHECK(poles[0].lambda0 == doctest::Approx(kPi * kPi).epsilon(1e-10));
    CHECK(poles[1].lambda0 == doctest::Approx(4.0 * kPi * kPi).epsilon(1e-10));
    CHECK(poles[0].in_decoration_sigma_d);
    CHECK(!poles[0].applicable());
}

TEST_CASE("two-pendant star has a non-simple pole with doubled residue") {
    MetricGraph star = make_star({1.0, 1.0});
    VertexConditionSet cond = VertexConditionSet::neumann(3);
    auto poles = dtn_pole_candidates(star, 0, cond, 0.0, 10.0);
    REQUIRE(poles.size() == 1);
    CHECK(poles[0].lambda0 == doctest::Approx(kPi * kPi / 4.0).epsilon(1e-10));
    CHECK(poles[0].multiplicity == 2);
    CHECK(!poles[0].simple);
    CHECK(std::abs(poles[0].residue - (-kPi * kPi)) < 1e-3);
    CHECK(std::abs(poles[0].residue + poles[0].psi * poles[0].psi) <
          1e-3 * std::abs(poles[0].residue));
}

TEST_CASE("residue by Richardson fit: pendant of length 2") {
    MetricGraph pendant = make_interval(2.0);
    VertexConditionSet cond = VertexConditionSet::neumann(2);
    double err = 0.0;
    const double r = dtn_residue(pendant, 0, cond, kPi * kPi / 16.0, {1e-2, 1e-3, 1e-4}, &err);
    CHECK(std::abs(r - (-kPi * kPi / 16.0)) < 1e-4);
    CHECK(err < 1e-4);
}

TEST_CASE("triangle decoration: fitted residue matches -Psi^2") {
    MetricGraph tri = build_graph({"a", "b", "c"},
                                  {Edge{"ab", 0, 1, 1.0, {}}, Edge{"bc", 1, 2, 1.0, {}},
                                   Edge{"ca", 2, 0, 1.0, {}}});
    VertexConditionSet cond = VertexConditionSet::neumann(3);
    auto poles = dtn_pole_candidates(tri, 0, cond, 0.5, 25.0);
    REQUIRE(!poles.empty());
    for (const auto& p : poles) {
        if (!p.simple || p.in_decoration_sigma_d) continue;
        CHECK(std::abs(p.residue + p.psi * p.psi) < 1e-3 * std::max(1.0, std::abs(p.residue)));
    }
}

TEST_CASE("two-path consistency: reduction vs explicit decoration") {
    // smallest case: single loop decorated with a pendant edge
    MetricGraph loop = make_loop(1.0);
    MetricGraph pendant = make_interval(1.0);
    auto dtn = std::make_shared<const DtnFunction>(pendant, 0, VertexConditionSet::neumann(2));

    VertexConditionSet reduced = decorated_reduction(loop, VertexConditionSet::neumann(1), dtn);
    auto via_reduction = solve_spectrum(loop, reduced, 0.05, 30.0);

    DecoratedGraph unfolded = decorate(loop, pendant, 0, VertexConditionSet::neumann(2));
    auto via_unfolding = solve_spectrum(unfolded.graph, unfolded.conditions, 0.05, 30.0);

    REQUIRE(via_reduction.size() == via_unfolding.size());
    for (size_t i = 0; i < via_reduction.size(); ++i) {
        CHECK(via_reduction[i].lambda ==
              doctest::Approx(via_unfolding[i].lambda).epsilon(1e-9));
        CHECK(via_reduction[i].multiplicity == via_unfolding[i].multiplicity);
    }
}

TEST_CASE("reduction at a lambda with zero DtN equals plain Neumann") {
    MetricGraph pendant = make_interval(1.0);
    auto dtn = std::make_shared<const DtnFunction>(pendant, 0, VertexConditionSet::neumann(2));
    MetricGraph loop = make_loop(1.0);
    VertexConditionSet reduced = decorated_reduction(loop, VertexConditionSet::neumann(1), dtn);
    // dtn(0) = 0, so the Robin coupling vanishes there
    CHECK(std::abs(reduced.alpha(0, 0.0)) < 1e-12);
}

TEST_CASE("gap certificate: pendant-decorated periodic chain") {
    MetricGraph chain = make_periodic_chain(1.0);
    MetricGraph pendant = make_interval(1.0);
    auto dtn = std::make_shared<const DtnFunction>(pendant, 0, VertexConditionSet::neumann(2));
    const double lambda0 = kPi * kPi / 4.0;

    GapCertificate cert =
        gap_certificate(chain, VertexConditionSet::neumann(1), dtn, lambda0, 0.5);
    CHECK(cert.certified);
    CHECK(cert.gap_lo < lambda0 - 0.4);
    CHECK(cert.gap_hi > lambda0 + 0.4);

    // no pole at lambda = 1: refused
    GapCertificate none = gap_certificate(chain, VertexConditionSet::neumann(1), dtn, 1.0, 0.5);
    CHECK(!none.certified);
}

TEST_CASE("gap certificate refuses on the base Dirichlet spectrum, subdivision repairs it") {
    MetricGraph chain = make_periodic_chain(1.0);
    // pendant of length 1/2 has its first pole exactly at pi^2
    MetricGraph pendant = make_interval(0.5);
    auto dtn = std::make_shared<const DtnFunction>(pendant, 0, VertexConditionSet::neumann(2));
    const double lambda0 = kPi * kPi;

    GapCertificate refused =
        gap_certificate(chain, VertexConditionSet::neumann(1), dtn, lambda0, 0.5);
    CHECK(!refused.certified);

    // fake vertex at an incommensurate split shifts sigma_D away from pi^2
    MetricGraph split = subdivide_edge(chain, 0, 1.0 / std::sqrt(2.0));
    GapCertificate cert =
        gap_certificate(split, VertexConditionSet::neumann(2), dtn, lambda0, 0.4);
    CHECK(cert.certified);
    CHECK(cert.gap_lo < lambda0 - 0.3);
    CHECK(cert.gap_hi > lambda0 + 0.3);
}
