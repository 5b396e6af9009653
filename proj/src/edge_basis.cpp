#include "qgs/edge_basis.hpp"

#include <cmath>

#include "qgs/errors.hpp"

namespace qgs {

namespace {
constexpr double kSeriesThreshold = 1e-4;  // switch to series when |lambda| x^2 below this
constexpr double kPi = 3.14159265358979323846;
}  // namespace

BasisValues basis_eval(double lambda, double x) {
    const double q = lambda * x * x;
    BasisValues out{};
    if (std::abs(q) < kSeriesThreshold) {
        // c = 1 - q/2! + q^2/4! - q^3/6!,  s = x(1 - q/3! + q^2/5! - q^3/7!)
        out.c = 1.0 + q * (-1.0 / 2.0 + q * (1.0 / 24.0 - q / 720.0));
        out.s = x * (1.0 + q * (-1.0 / 6.0 + q * (1.0 / 120.0 - q / 5040.0)));
    } else if (lambda > 0.0) {
        const double w = std::sqrt(lambda);
        out.c = std::cos(w * x);
        out.s = std::sin(w * x) / w;
    } else {
        const double w = std::sqrt(-lambda);
        out.c = std::cosh(w * x);
        out.s = std::sinh(w * x) / w;
    }
    out.dc = -lambda * out.s;
    out.ds = out.c;
    return out;
}

std::array<std::array<double, 2>, 2> edge_transfer(double lambda, double l) {
    if (!(l > 0.0)) throw InvalidInput("edge_transfer: length must be positive");
    const BasisValues b = basis_eval(lambda, l);
    return {{{b.c, b.s}, {b.dc, b.ds}}};
}

double dirichlet_distance(double lambda, double l) {
    // nearest pi^2 n^2 / l^2, n >= 1
    if (lambda <= 0.0) return kPi * kPi / (l * l) - lambda;
    const double n_real = std::sqrt(lambda) * l / kPi;
    double best = std::abs(lambda - kPi * kPi / (l * l));
    for (long n = std::max(1L, static_cast<long>(std::floor(n_real)));
         n <= static_cast<long>(std::ceil(n_real)) + 1; ++n) {
        const double mu = kPi * kPi * static_cast<double>(n) * static_cast<double>(n) / (l * l);
        best = std::min(best, std::abs(lambda - mu));
    }
    return best;
}

std::array<std::array<double, 2>, 2> edge_dtn_block(double lambda, double l, double delta_d) {
    if (!(l > 0.0)) throw InvalidInput("edge_dtn_block: length must be positive");
    if (dirichlet_distance(lambda, l) < delta_d)
        throw SolverError("edge_dtn_block: lambda within exclusion radius of the edge Dirichlet spectrum");
    const BasisValues b = basis_eval(lambda, l);
    const double inv_s = 1.0 / b.s;
    return {{{-b.c * inv_s, inv_s}, {inv_s, -b.c * inv_s}}};
}

BasisIntegrals basis_integrals(double lambda, double l) {
    const BasisValues b = basis_eval(lambda, l);
    BasisIntegrals out{};
    out.cc = 0.5 * (l + b.s * b.c);
    out.cs = 0.5 * b.s * b.s;
    const double q = lambda * l * l;
    if (std::abs(q) < kSeriesThreshold) {
        // int s^2 = l^3/3 - lambda l^5/15 + 2 lambda^2 l^7/315 - lambda^3 l^9/2835
        const double l3 = l * l * l;
        out.ss = l3 * (1.0 / 3.0 + q * (-1.0 / 15.0 + q * (2.0 / 315.0 - q / 2835.0)));
    } else {
        out.ss = (l - b.s * b.c) / (2.0 * lambda);
    }
    return out;
}

double EdgeWave::value(double x) const {
    const BasisValues v = basis_eval(lambda, x);
    return a * v.c + b * v.s;
}

double EdgeWave::derivative(double x) const {
    const BasisValues v = basis_eval(lambda, x);
    return a * v.dc + b * v.ds;
}

double EdgeWave::l2_squared(double l) const {
    const BasisIntegrals I = basis_integrals(lambda, l);
    return a * a * I.cc + 2.0 * a * b * I.cs + b * b * I.ss;
}

}  // namespace qgs
