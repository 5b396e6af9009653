#include "qgs/secular.hpp"

#include <cmath>

#include "qgs/edge_basis.hpp"
#include "qgs/errors.hpp"

namespace qgs {

int SecularMatrix::Analysis::kernel_dim(double abs_tol) const {
    int dim = 0;
    for (int i = 0; i < eigenvalues.size(); ++i)
        if (std::abs(eigenvalues[i]) < abs_tol) ++dim;
    return dim;
}

Eigen::MatrixXcd SecularMatrix::Analysis::kernel(double abs_tol) const {
    const int dim = kernel_dim(abs_tol);
    Eigen::MatrixXcd out(eigenvectors.rows(), dim);
    int col = 0;
    for (int i = 0; i < eigenvalues.size(); ++i)
        if (std::abs(eigenvalues[i]) < abs_tol) out.col(col++) = eigenvectors.col(i);
    return out;
}

SecularMatrix::Analysis SecularMatrix::analyze() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(M);
    Analysis out;
    out.eigenvalues = es.eigenvalues();
    out.eigenvectors = es.eigenvectors();
    out.scale = 0.0;
    out.smin = std::numeric_limits<double>::infinity();
    int raw = 1;
    double logdet = 0.0;
    for (int i = 0; i < out.eigenvalues.size(); ++i) {
        const double v = out.eigenvalues[i];
        const double a = std::abs(v);
        out.scale = std::max(out.scale, a);
        out.smin = std::min(out.smin, a);
        if (v == 0.0)
            raw = 0;
        else if (v < 0)
            raw = -raw;
        logdet += std::log(std::max(a, 1e-300));
    }
    out.raw_sign = raw;
    out.log_abs_det = logdet;
    return out;
}

SecularMatrix assemble_secular(const MetricGraph& g, const VertexConditionSet& cond,
                               double lambda, const std::vector<double>& k, double delta_d) {
    if (g.is_periodic() && static_cast<int>(k.size()) != g.period_rank())
        throw InvalidInput("assemble_secular: quasimomentum rank mismatch");

    SecularMatrix sm;
    sm.lambda = lambda;
    sm.k = k;
    sm.vertex_to_index.assign(static_cast<size_t>(g.num_vertices()), -1);
    for (int v = 0; v < g.num_vertices(); ++v) {
        if (cond.is_dirichlet(v)) continue;
        sm.vertex_to_index[static_cast<size_t>(v)] = static_cast<int>(sm.index_to_vertex.size());
        sm.index_to_vertex.push_back(v);
    }
    const int n = static_cast<int>(sm.index_to_vertex.size());
    if (n == 0) throw InvalidInput("assemble_secular: all vertices are Dirichlet");
    sm.M = Eigen::MatrixXcd::Zero(n, n);

    for (int e = 0; e < g.num_edges(); ++e) {
        const Edge& ed = g.edge(e);
        if (dirichlet_distance(lambda, ed.length) < delta_d)
            throw SolverError("assemble_secular: lambda too close to the Dirichlet spectrum of edge " +
                              ed.name);
        const BasisValues b = basis_eval(lambda, ed.length);
        const double diag = -b.c / b.s;
        const double coup = 1.0 / b.s;
        // Bloch phase for the from->to direction
        std::complex<double> phase(1.0, 0.0);
        if (!k.empty() && ed.is_shifted()) {
            double kt = 0.0;
            for (size_t j = 0; j < k.size(); ++j) kt += k[j] * ed.shift[j];
            phase = std::complex<double>(std::cos(kt), -std::sin(kt));
        }
        const int iv = sm.vertex_to_index[static_cast<size_t>(ed.from)];
        const int iw = sm.vertex_to_index[static_cast<size_t>(ed.to)];
        if (iv >= 0) {
            sm.M(iv, iv) += diag;
            if (iw >= 0) sm.M(iv, iw) += coup * phase;
        }
        if (iw >= 0) {
            sm.M(iw, iw) += diag;
            if (iv >= 0) sm.M(iw, iv) += coup * std::conj(phase);
        }
    }
    for (int i = 0; i < n; ++i) {
        const int v = sm.index_to_vertex[static_cast<size_t>(i)];
        sm.M(i, i) -= cond.alpha(v, lambda);
    }
    return sm;
}

}  // namespace qgs
