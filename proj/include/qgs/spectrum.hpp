#ifndef QGS_SPECTRUM_HPP
#define QGS_SPECTRUM_HPP

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qgs/dirichlet.hpp"
#include "qgs/edge_basis.hpp"
#include "qgs/graph.hpp"
#include "qgs/secular.hpp"

namespace qgs {

// One eigenfunction: vertex values plus the closed-form wave on every edge.
struct Eigenfunction {
    Eigen::VectorXd vertex_values;  // indexed by graph vertex, 0 at Dirichlet
    std::vector<EdgeWave> waves;    // one per edge, in edge order
};

struct EigenResult {
    double lambda = 0.0;
    int multiplicity = 0;
    std::vector<Eigenfunction> eigenfunctions;
    double residual = 0.0;  // max vertex-condition residual over the basis
};

struct SpectrumOptions {
    // Scan step in sqrt(lambda) units; <= 0 selects min(0.01, l0/20).
    double scan_step = 0.0;
    double rank_tol = 1e-7;
    double delta_d = 1e-6;
    // Bracket width below which root refinement stops (sqrt-lambda units).
    double refine_tol = 1e-12;
    bool compute_eigenfunctions = true;
};

// All eigenvalues in [lo, hi] of the Laplacian on a compact metric graph
// with the given vertex conditions. Away from the Dirichlet spectrum the
// roots of det M(lambda) are located by a sqrt(lambda)-uniform grid scan
// with sign-change bisection plus smallest-|eigenvalue| minima refinement
// (even multiplicities); at Dirichlet-spectrum points the full edge-basis
// kernel is solved exactly (this covers both the vertex-vanishing resonant
// states and resonant eigenfunctions with non-vanishing vertex values).
// Robin singularities registered in `cond` are masked from the scan.
std::vector<EigenResult> solve_spectrum(const MetricGraph& g, const VertexConditionSet& cond,
                                        double lo, double hi, const SpectrumOptions& opts = {},
                                        std::vector<std::string>* warnings = nullptr);

// Eigenfunctions at lambda in the vertex-vanishing sector: on each
// lambda-resonant edge the one-parameter family b*s(x); the homogeneous
// system imposes the derivative-sum condition at every vertex. Empty when
// no such state exists.
std::vector<Eigenfunction> dirichlet_resonant_states(const MetricGraph& g,
                                                     const VertexConditionSet& cond,
                                                     double lambda, double delta_d = 1e-6);

// Kernel of the full 2|E| edge-coefficient system at lambda: all
// eigenfunctions regardless of sector. Valid on and off the Dirichlet
// spectrum (used by solve_spectrum at sigma_D points).
std::vector<Eigenfunction> eigenspace_at(const MetricGraph& g, const VertexConditionSet& cond,
                                         double lambda, double rank_tol = 1e-9);

// Edge waves with the given vertex values: on edge (v, w) of length l,
//   u(x) = [u(v) s(l - x) + u(w) s(x)] / s(l).
// Throws near the Dirichlet spectrum.
std::vector<EdgeWave> eigenfunction_reconstruct(const MetricGraph& g,
                                                const VertexConditionSet& cond, double lambda,
                                                const Eigen::VectorXd& vertex_values,
                                                double delta_d = 1e-6);

// Max over vertices of |sum of outgoing derivatives - alpha u(v)| (or of
// |u(v)| at Dirichlet vertices), plus the worst continuity mismatch.
double condition_residual(const MetricGraph& g, const VertexConditionSet& cond,
                          const Eigenfunction& f);

// Sum of outgoing derivatives of f at vertex v.
double outgoing_derivative_sum(const MetricGraph& g, const Eigenfunction& f, int v);

// Scales the eigenfunction to unit L2 norm on the graph (closed form).
void normalize_l2(const MetricGraph& g, Eigenfunction& f);

// --- scan engine (shared with the Floquet band solver) ----------------------

struct ScanRoot {
    double lambda = 0.0;
    SecularMatrix::Analysis analysis;
    double kernel_tol = 0.0;  // absolute tolerance used to accept the root
};

// Locates the zeros of a real-determinant Hermitian family on [lo, hi].
// `eval` returns nullopt at masked points. `masks` are excluded lambdas
// (holes of radius ~delta_d around which brackets are not trusted).
std::vector<ScanRoot> scan_determinant_roots(
    const std::function<std::optional<SecularMatrix::Analysis>(double)>& eval, double lo,
    double hi, const std::vector<double>& masks, const SpectrumOptions& opts,
    std::vector<std::string>* warnings = nullptr);

}  // namespace qgs

#endif  // QGS_SPECTRUM_HPP
