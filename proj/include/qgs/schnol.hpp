#ifndef QGS_SCHNOL_HPP
#define QGS_SCHNOL_HPP

#include <functional>
#include <map>
#include <vector>

#include "qgs/edge_basis.hpp"
#include "qgs/graph.hpp"

namespace qgs {

// A solution of -u'' = lambda u on a generated ball of an infinite chain or
// tree, satisfying the vertex conditions at every interior vertex. The
// boundary vertices of the ball are where the function would continue.
struct GeneralizedEigenfunction {
    MetricGraph graph;  // the generated compact piece, rooted
    double lambda = 0.0;
    std::vector<EdgeWave> waves;      // one per edge
    double interior_residual = 0.0;   // worst interior vertex-condition violation
    double ball_radius = 0.0;         // distance to the generated boundary
};

// Propagates edge solutions outward from the root: the seed fixes the value
// and the outgoing derivative on every root edge; at an interior vertex the
// arriving data is distributed equally over the outgoing edges (continuity
// plus the derivative-sum condition). Requires a rooted tree or chain.
GeneralizedEigenfunction generate_generalized_eigenfunction(const MetricGraph& g,
                                                            const VertexConditionSet& cond,
                                                            double lambda, double seed_value,
                                                            double seed_derivative);

// J(r): squared L2 norm of phi over the full-edge core Gamma_r.
double growth_integral(const GeneralizedEigenfunction& phi, double r);

struct GrowthProfile {
    double epsilon = 0.0;
    std::vector<std::pair<double, double>> samples;  // (r, J(r))
    // radii with J(r + L) <= e^epsilon J(r); empty for exponential growth
    std::vector<double> selected;
};

// Closed-form growth samples and the sub-exponential radius selection.
// Radii r with r + L beyond the generated ball are rejected.
GrowthProfile growth_profile(const GeneralizedEigenfunction& phi,
                             const std::vector<double>& radii, double epsilon);

// Smooth drop profile on [0, 1]: p(0) = 1, p(1) = 0, p'(0) = p'(1) = 0.
struct CutoffProfile {
    std::function<double(double)> value;
    std::function<double(double)> d1;
    std::function<double(double)> d2;
    // default polynomial bump 1 - 3 s^2 + 2 s^3
    static CutoffProfile cubic();
};

// Piecewise cutoff: 1 on Gamma_r, then plateau values p(m/width) on the
// vertex layers going outward, with each edge dropping between its endpoint
// plateaus over a window of length l0/4 after the edge midpoint; constant
// near every vertex. width = 1 reproduces the single-layer construction
// (1 from the boundary vertex to the midpoint, one profile drop, then 0);
// larger widths spread the descent over `width` edge layers, which sharpens
// the distance bound on slowly growing data.
class CutoffFunction {
  public:
    struct Piece {
        double inner_value = 1.0;  // plateau from the inner endpoint
        double outer_value = 1.0;  // plateau toward the outer endpoint
        double t0 = 0.0, t1 = 0.0;  // drop window, inner-side coordinate
        bool reversed = false;      // inner endpoint is the edge's `to` end
    };

    double value(int edge, double x) const;
    double d1(int edge, double x) const;
    double d2(int edge, double x) const;

    const std::map<int, Piece>& pieces() const { return pieces_; }
    double inner_radius() const { return r_; }
    int width() const { return width_; }

  private:
    friend CutoffFunction build_cutoff(const MetricGraph&, double, int, const CutoffProfile&);
    std::map<int, Piece> pieces_;  // every edge has one (possibly constant)
    std::vector<double> edge_lengths_;
    CutoffProfile profile_;
    double r_ = 0.0;
    int width_ = 1;
};

// Throws when the graph's generated ball is too small for the requested
// radius (the cutoff would be identically 1).
CutoffFunction build_cutoff(const MetricGraph& g, double r, int width = 1,
                            const CutoffProfile& profile = CutoffProfile::cubic());

// Certified upper bound on dist(lambda, spectrum): the Rayleigh quotient
//   ||(H - lambda)(theta phi)|| / ||theta phi||
// with (H - lambda)(theta phi) = -2 theta' phi' - theta'' phi supported on
// the drop windows (quadrature there, closed forms elsewhere). theta phi
// satisfies the vertex conditions exactly because theta is locally constant
// at vertices.
double schnol_distance_bound(const GeneralizedEigenfunction& phi, const CutoffFunction& theta);

}  // namespace qgs

#endif  // QGS_SCHNOL_HPP
