#ifndef QGS_DIRICHLET_HPP
#define QGS_DIRICHLET_HPP

#include <vector>

#include "qgs/graph.hpp"

namespace qgs {

// The Dirichlet spectrum of a graph: the set { pi^2 n^2 / l_e^2 : n >= 1 }
// over all edges, up to a cutoff. This is the exceptional set where the
// vertex-value reduction of the quantum problem is singular.
struct DirichletSpectrum {
    struct Entry {
        double lambda;
        // (edge index, harmonic n) pairs contributing this value
        std::vector<std::pair<int, int>> sources;
    };
    std::vector<Entry> entries;  // sorted by lambda
    double delta_d = 1e-6;       // exclusion radius in lambda units

    bool near(double lambda) const;
    std::vector<double> values() const;
};

DirichletSpectrum dirichlet_spectrum(const MetricGraph& g, double lambda_max,
                                     double delta_d = 1e-6);

// Minimum over all edges of dirichlet_distance(lambda, l_e).
double dirichlet_distance(const MetricGraph& g, double lambda);

}  // namespace qgs

#endif  // QGS_DIRICHLET_HPP
