#ifndef QGS_SECULAR_HPP
#define QGS_SECULAR_HPP

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "qgs/graph.hpp"

namespace qgs {

// Vertex-value secular matrix M(lambda) (or M(lambda, k) for a periodic
// graph), indexed by the non-Dirichlet vertices. Its kernel vectors are the
// vertex values of eigenfunctions when lambda is away from the Dirichlet
// spectrum. Entries per edge e = (v, w) of length l:
//   diagonal at each endpoint: -c(l)/s(l)
//   coupling between the endpoints: 1/s(l) (times the Bloch phase e^{-i k.t}
//   for an edge with translation tag t)
// and the coupling alpha_v(lambda) of a delta/Robin condition is subtracted
// from the diagonal, so M u = 0 encodes sum of outgoing derivatives =
// alpha_v u(v) at every vertex. Hermitian for real lambda and k.
struct SecularMatrix {
    double lambda = 0.0;
    std::vector<double> k;  // empty for a compact graph
    Eigen::MatrixXcd M;
    std::vector<int> index_to_vertex;
    std::vector<int> vertex_to_index;  // -1 at Dirichlet vertices

    // Eigendecomposition with the quantities the root scan needs.
    struct Analysis {
        Eigen::VectorXd eigenvalues;  // ascending
        Eigen::MatrixXcd eigenvectors;
        int raw_sign = 0;        // sign of det(M) from raw eigenvalue signs
        double log_abs_det = 0;  // log |det M|
        double smin = 0.0;       // smallest |eigenvalue|
        double scale = 0.0;      // largest |eigenvalue|

        bool singular(double abs_tol) const { return smin < abs_tol; }
        int kernel_dim(double abs_tol) const;
        // columns: eigenvectors with |eigenvalue| < abs_tol
        Eigen::MatrixXcd kernel(double abs_tol) const;
    };
    Analysis analyze() const;
};

// Assembles the secular matrix. Throws SolverError when lambda is within
// delta_d of the Dirichlet spectrum of some edge.
SecularMatrix assemble_secular(const MetricGraph& g, const VertexConditionSet& cond,
                               double lambda, const std::vector<double>& k = {},
                               double delta_d = 1e-6);

}  // namespace qgs

#endif  // QGS_SECULAR_HPP
