// Seeded random graph generator shared by the unit and acceptance suites.
#ifndef QGS_TESTS_RANDOM_GRAPHS_HPP
#define QGS_TESTS_RANDOM_GRAPHS_HPP

#include <random>
#include <string>
#include <vector>

#include "qgs/graph.hpp"

namespace testutil {

// Connected graph with at most max_edges edges and lengths in [0.5, 2]:
// a random spanning tree plus random extra edges (loops allowed).
inline qgs::MetricGraph random_graph(std::mt19937& rng, int max_edges = 6) {
    std::uniform_int_distribution<int> edge_count(1, max_edges);
    std::uniform_real_distribution<double> len(0.5, 2.0);
    const int ne = edge_count(rng);
    std::uniform_int_distribution<int> vcount(1, ne + 1);
    const int nv = std::max(1, std::min(ne + 1, vcount(rng)));

    std::vector<std::string> names;
    for (int i = 0; i < nv; ++i) names.push_back("v" + std::to_string(i));
    std::vector<qgs::Edge> edges;
    for (int v = 1; v < nv; ++v) {
        std::uniform_int_distribution<int> parent(0, v - 1);
        qgs::Edge e;
        e.name = "e" + std::to_string(edges.size());
        e.from = parent(rng);
        e.to = v;
        e.length = len(rng);
        edges.push_back(e);
    }
    std::uniform_int_distribution<int> any(0, nv - 1);
    while (static_cast<int>(edges.size()) < ne) {
        qgs::Edge e;
        e.name = "e" + std::to_string(edges.size());
        e.from = any(rng);
        e.to = any(rng);  // equal endpoints make a loop
        e.length = len(rng);
        edges.push_back(e);
    }
    return qgs::MetricGraph(std::move(names), std::move(edges), std::string("v0"));
}

}  // namespace testutil

#endif  // QGS_TESTS_RANDOM_GRAPHS_HPP
