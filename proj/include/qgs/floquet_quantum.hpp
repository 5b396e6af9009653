#ifndef QGS_FLOQUET_QUANTUM_HPP
#define QGS_FLOQUET_QUANTUM_HPP

#include <optional>
#include <vector>

#include "qgs/floquet_discrete.hpp"
#include "qgs/graph.hpp"
#include "qgs/secular.hpp"
#include "qgs/spectrum.hpp"

namespace qgs {

// Fundamental-domain secular matrix of a Z^n-periodic quantum graph at
// quasimomentum k: an edge with translation tag t couples with the Bloch
// phase e^{-i k.t}. Hermitian for real lambda and k.
SecularMatrix bloch_secular(const MetricGraph& g, const VertexConditionSet& cond, double lambda,
                            const std::vector<double>& k, double delta_d = 1e-6);

struct BandStructure {
    std::vector<std::vector<double>> kgrid;
    std::vector<std::vector<double>> roots;  // per k: sorted lambdas in the window
    // root-free intervals wider than min_gap_width that survive adaptive
    // k-refinement (holes crossed by a band get closed by refined roots;
    // holes pinched at a masked Dirichlet-spectrum crossing shrink below
    // the width floor)
    std::vector<std::pair<double, double>> gaps;
    std::vector<double> flat_bands;  // lambdas carrying compactly supported states
    // largest per-band lambda step between adjacent base-grid k points
    double gap_resolution = 0.0;
};

struct BandOptions {
    SpectrumOptions spectrum;   // scan controls per k
    int scar_box = 2;           // cell-box radius for the resonant flat-band search
    double min_gap_width = 0.05;  // narrower holes are treated as unresolved
    int refine_rounds = 3;      // adaptive k-refinement passes on candidate gaps
    int refine_factor = 8;      // k-grid densification per pass
};

// Dispersion roots det M(lambda, k) = 0 per quasimomentum, with gap
// intervals and flat bands. Dirichlet-spectrum points are checked once
// globally with the resonant scar search (flat bands live there when the
// graph has cycles with commensurate lengths).
BandStructure band_structure(const MetricGraph& g, const VertexConditionSet& cond, int k_points,
                             double lo, double hi, const BandOptions& opts = {});

// True iff det M(lambda, k) vanishes identically in k, tested by sampling
// 2 d_j + 1 points per torus dimension (d_j = total translation degree in
// dimension j). On the Dirichlet spectrum the resonant route searches for a
// compactly supported cycle state instead.
bool flat_band_test(const MetricGraph& g, const VertexConditionSet& cond, double lambda,
                    double tol = 1e-8, int scar_box = 4);

// A compactly supported eigenfunction of the periodic quantum graph,
// reported on a finite window of unfolded cells.
struct Scar {
    double lambda = 0.0;
    int rank = 0;
    struct VertexValue {
        int vertex;
        Monomial cell;
        double value;
    };
    struct Wave {
        int edge;
        Monomial cell;  // cell of the edge's `from` endpoint
        double a, b;
    };
    std::vector<VertexValue> vertex_values;
    std::vector<Wave> waves;
    double residual = 0.0;  // worst vertex-condition violation on and around the support
};

// Vertex-value reduction of the quantum problem at fixed lambda: the
// periodic difference operator whose kernel vectors are vertex values of
// eigenfunctions (entries from the per-edge DtN blocks with translation
// tags). lambda must stay away from the Dirichlet spectrum.
PeriodicDifferenceOperator quantum_vertex_operator(const MetricGraph& g,
                                                   const VertexConditionSet& cond, double lambda,
                                                   double delta_d = 1e-6);

// Compactly supported eigenfunction at a flat-band lambda. On the
// Dirichlet spectrum the cycle state is constructed directly in the
// vertex-vanishing sector; otherwise the polynomial kernel of the
// vertex-value reduction is unfolded and the edge waves reconstructed.
// Returns nullopt when no kernel is found up to the degree bound (degree
// too small, or lambda is not a flat band).
std::optional<Scar> quantum_scar(const MetricGraph& g, const VertexConditionSet& cond,
                                 double lambda, int degree_bound = 8, double delta_d = 1e-6);

// Direct search for a vertex-vanishing state supported on resonant edges
// within the given cell box.
std::optional<Scar> resonant_scar(const MetricGraph& g, const VertexConditionSet& cond,
                                  double lambda, int box_radius, double delta_d = 1e-6);

}  // namespace qgs

#endif  // QGS_FLOQUET_QUANTUM_HPP
