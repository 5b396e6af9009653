#ifndef QGS_EDGE_BASIS_HPP
#define QGS_EDGE_BASIS_HPP

#include <array>
#include <vector>

namespace qgs {

// Fundamental solutions of -u'' = lambda*u on an edge, entire in lambda:
//   c(x) = cos(sqrt(lambda) x)            (cosh branch for lambda < 0)
//   s(x) = sin(sqrt(lambda) x)/sqrt(lambda)  (sinh branch; s(x) = x at lambda = 0)
// with c(0)=1, c'(0)=0, s(0)=0, s'(0)=1.  Derivatives: c' = -lambda*s, s' = c.
struct BasisValues {
    double c;
    double s;
    double dc;  // c'(x) = -lambda*s(x)
    double ds;  // s'(x) = c(x)
};

// Values of the entire basis and its derivatives at (lambda, x).
// Uses the power series for |lambda|*x^2 below a small threshold so the
// implementation is continuous across lambda = 0.
BasisValues basis_eval(double lambda, double x);

// 2x2 transfer matrix mapping (u(0), u'(0)) to (u(l), u'(l)); determinant 1.
std::array<std::array<double, 2>, 2> edge_transfer(double lambda, double l);

// Per-edge Dirichlet-to-Neumann block: outgoing derivatives at the two
// endpoints in terms of the endpoint values,
//   D = (1/s(l)) [ -c(l)  1 ; 1  -c(l) ].
// Throws SolverError when lambda is within delta_d of the edge's Dirichlet
// spectrum {pi^2 n^2 / l^2} (the reduction is singular there).
std::array<std::array<double, 2>, 2> edge_dtn_block(double lambda, double l,
                                                    double delta_d = 1e-6);

// Distance from lambda to the Dirichlet spectrum {pi^2 n^2 / l^2} of a
// single edge of length l.
double dirichlet_distance(double lambda, double l);

// Closed-form integrals over [0, l] of products of the basis functions,
// used for L2 norms of edge waves:
//   I_cc = int c^2, I_cs = int c*s, I_ss = int s^2.
struct BasisIntegrals {
    double cc;
    double cs;
    double ss;
};
BasisIntegrals basis_integrals(double lambda, double l);

// A solution u(x) = a*c(x;lambda) + b*s(x;lambda) on one edge.
struct EdgeWave {
    int edge = -1;
    double lambda = 0.0;
    double a = 0.0;
    double b = 0.0;

    double value(double x) const;
    double derivative(double x) const;
    // int_0^l u^2 dx
    double l2_squared(double l) const;
};

}  // namespace qgs

#endif  // QGS_EDGE_BASIS_HPP
