#ifndef QGS_DTN_HPP
#define QGS_DTN_HPP

#include <map>
#include <memory>
#include <vector>

#include "qgs/graph.hpp"
#include "qgs/spectrum.hpp"

namespace qgs {

// A pole candidate of the Dirichlet-to-Neumann function: an eigenvalue of
// the decoration operator with a Dirichlet condition at the root.
struct PoleData {
    double lambda0 = 0.0;
    double residue = 0.0;        // Richardson fit of (lambda-lambda0) * dtn(lambda)
    double residue_error = 0.0;  // extrapolation error estimate
    double psi = 0.0;  // root-sum-square of outgoing-derivative sums over the eigenbasis
    int multiplicity = 1;
    bool simple = true;
    bool in_decoration_sigma_d = false;  // lies on sigma_D of the decoration

    // gap opening applies at simple poles with nonzero derivative sum
    bool applicable() const { return simple && psi > 1e-8 && !in_decoration_sigma_d; }
};

// Dirichlet-to-Neumann function of a rooted finite decoration: dtn(lambda)
// is the sum of outgoing derivatives at the root of the solution with root
// value 1 and the prescribed conditions elsewhere. Evaluated by a bordered
// solve in the edge-coefficient basis, which is regular everywhere except
// at eigenvalues of the rooted-Dirichlet operator (the poles).
class DtnFunction {
  public:
    // Poles are located once over [pole_lo, pole_hi] via the eigen-solve of
    // the rooted-Dirichlet operator (independent of the bordered solve).
    DtnFunction(MetricGraph g1, int root, VertexConditionSet cond1, double pole_lo = -100.0,
                double pole_hi = 250.0);

    double eval(double lambda) const;  // throws SolverError at a pole
    const std::vector<PoleData>& poles() const { return poles_; }
    const MetricGraph& graph() const { return g1_; }
    int root() const { return root_; }
    const VertexConditionSet& conditions() const { return cond1_; }
    std::vector<double> pole_positions() const;

  private:
    MetricGraph g1_;
    int root_;
    VertexConditionSet cond1_;
    std::vector<PoleData> poles_;
    mutable std::map<double, double> cache_;
};

// --- operations -------------------------------------------------------------

double dtn_function(const MetricGraph& g1, int v1, const VertexConditionSet& cond1,
                    double lambda);

std::vector<PoleData> dtn_pole_candidates(const MetricGraph& g1, int v1,
                                          const VertexConditionSet& cond1, double lo, double hi);

// Two-sided Richardson extrapolation of h * dtn(lambda0 + h) over the step
// list (default {1e-2, 1e-3, 1e-4}); returns the limit and writes the
// extrapolation error estimate. Throws SolverError on a non-convergent fit.
double dtn_residue(const MetricGraph& g1, int v1, const VertexConditionSet& cond1, double lambda0,
                   const std::vector<double>& h_list = {1e-2, 1e-3, 1e-4},
                   double* error_estimate = nullptr);

// Replaces the decoration attached at every mapped vertex by the
// lambda-dependent Robin coupling alpha(lambda) = -dtn(lambda); feeding the
// result to the compact or Floquet solver computes the decorated spectrum
// without unfolding. Vertices absent from the map keep their condition.
VertexConditionSet decorated_reduction(
    const MetricGraph& g0, const VertexConditionSet& cond0,
    const std::map<int, std::shared_ptr<const DtnFunction>>& dtns);
// same decoration at every vertex
VertexConditionSet decorated_reduction(const MetricGraph& g0, const VertexConditionSet& cond0,
                                       std::shared_ptr<const DtnFunction> dtn);

// --- numerical gap certificate ----------------------------------------------

struct GapCertificateOptions {
    int lambda_points = 400;
    int k_points = 64;   // per torus dimension
    double tol = 1e-6;   // absolute smallest-|eigenvalue| threshold, times the
                         // median matrix scale over the sampled grid
    double delta_d = 1e-6;
};

struct GapCertificate {
    bool certified = false;
    double gap_lo = 0.0;  // maximal certified punctured interval around lambda0
    double gap_hi = 0.0;
    double lambda0 = 0.0;
    std::string reason;  // set when not certified / refused
};

// Scans lambda in [lambda0 - w, lambda0 + w] minus a one-grid-step hole at
// lambda0 and all quasimomenta on the grid; certifies the subinterval where
// min over k of the smallest |eigenvalue| of the reduced Bloch matrix stays
// above tolerance. Refuses when lambda0 lies on sigma_D of the base graph
// (Dirichlet-spectrum eigenvalues cannot be removed by decoration) or when
// some attached DtN function has no applicable pole at lambda0.
GapCertificate gap_certificate(const MetricGraph& g0, const VertexConditionSet& cond0,
                               const std::map<int, std::shared_ptr<const DtnFunction>>& dtns,
                               double lambda0, double w,
                               const GapCertificateOptions& opts = {});
GapCertificate gap_certificate(const MetricGraph& g0, const VertexConditionSet& cond0,
                               std::shared_ptr<const DtnFunction> dtn, double lambda0, double w,
                               const GapCertificateOptions& opts = {});

}  // namespace qgs

#endif  // QGS_DTN_HPP
