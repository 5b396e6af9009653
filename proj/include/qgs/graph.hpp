#ifndef QGS_GRAPH_HPP
#define QGS_GRAPH_HPP

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace qgs {

// One edge of a metric graph. Periodic graphs tag edges with a Z^n
// translation: the edge runs from `from` in the base cell to `to` in the
// cell shifted by `shift`. An empty / all-zero shift is an internal edge.
struct Edge {
    std::string name;
    int from = -1;
    int to = -1;
    double length = 0.0;
    std::vector<int> shift;  // size = period rank, or empty for internal

    bool is_shifted() const {
        for (int s : shift)
            if (s != 0) return true;
        return false;
    }
};

// A connected metric graph: vertices, edges with positive lengths, an
// optional root, and an optional Z^n periodic structure (rank > 0 means the
// stored graph is the fundamental domain of the Z^n action).
//
// Immutable after construction; all operations below return new graphs.
class MetricGraph {
  public:
    MetricGraph(std::vector<std::string> vertex_names, std::vector<Edge> edges,
                std::optional<std::string> root = std::nullopt, int period_rank = 0);

    int num_vertices() const { return static_cast<int>(vertex_names_.size()); }
    int num_edges() const { return static_cast<int>(edges_.size()); }
    const std::vector<std::string>& vertex_names() const { return vertex_names_; }
    const std::vector<Edge>& edges() const { return edges_; }
    const Edge& edge(int e) const { return edges_[static_cast<size_t>(e)]; }
    const std::string& vertex_name(int v) const { return vertex_names_[static_cast<size_t>(v)]; }
    int vertex_index(const std::string& name) const;  // throws if unknown
    int edge_index(const std::string& name) const;

    std::optional<int> root() const { return root_; }
    int period_rank() const { return period_rank_; }
    bool is_periodic() const { return period_rank_ > 0; }

    // Condition A bounds, derived from the edge set.
    double min_length() const { return l0_; }
    double max_length() const { return L_; }

    int degree(int v) const { return degrees_[static_cast<size_t>(v)]; }
    // (edge index, endpoint side) pairs at v; side 0 = coordinate 0 end.
    const std::vector<std::pair<int, int>>& incidences(int v) const {
        return incidences_[static_cast<size_t>(v)];
    }

    // Shortest-path distance from the root to every vertex (lengths as
    // weights, shifted edges excluded). Requires a root and a compact graph.
    std::vector<double> root_distances() const;

  private:
    std::vector<std::string> vertex_names_;
    std::vector<Edge> edges_;
    std::optional<int> root_;
    int period_rank_;
    double l0_ = 0.0, L_ = 0.0;
    std::vector<int> degrees_;
    std::vector<std::vector<std::pair<int, int>>> incidences_;
};

// Per-vertex boundary condition. DeltaType(alpha) means continuity plus
//   sum of outgoing derivatives = alpha * u(v),
// so DeltaType(0) is the Neumann/Kirchhoff condition. SpectralRobin carries a
// lambda-dependent coupling alpha(lambda) (used by the decoration reduction)
// together with the list of lambdas where it is singular.
class VertexConditionSet {
  public:
    enum class Kind { Delta, Dirichlet, Robin };

    // All-Neumann set for n vertices.
    static VertexConditionSet neumann(int n);

    void set_delta(int v, double alpha);
    void set_dirichlet(int v);
    void set_robin(int v, std::function<double(double)> alpha,
                   std::vector<double> singularities = {});

    Kind kind(int v) const { return kinds_[static_cast<size_t>(v)]; }
    bool is_dirichlet(int v) const { return kind(v) == Kind::Dirichlet; }
    // Coupling alpha at lambda (Delta: the constant; Robin: alpha(lambda)).
    double alpha(int v, double lambda) const;

    // Singular lambdas of all Robin couplings (poles the solvers must avoid).
    std::vector<double> robin_singularities() const;

    int size() const { return static_cast<int>(kinds_.size()); }

  private:
    std::vector<Kind> kinds_;
    std::vector<double> alphas_;
    std::vector<std::function<double(double)>> robin_;
    std::vector<std::vector<double>> singular_;
};

// Metric ball B_r around the root and its full-edge core Gamma_r.
// Core edges are those all of whose points lie within distance r; the
// inclusions Gamma_{r-L} <= B_r <= Gamma_{r+L} hold as point sets.
struct BallSubgraph {
    double radius = 0.0;
    std::vector<double> vertex_distance;  // from root
    std::vector<int> ball_vertices;       // vertices with distance <= r
    std::vector<int> core_edges;          // edges entirely within distance r

    // Distance from the root to the point at coordinate x on edge e.
    double point_distance(const MetricGraph& g, int e, double x) const;
    bool point_in_ball(const MetricGraph& g, int e, double x) const;
};

// --- operations ------------------------------------------------------------

// Validates and builds a graph; throws InvalidInput on nonpositive lengths,
// isolated vertices, disconnectedness, or a periodic tagging whose unfolding
// is disconnected.
MetricGraph build_graph(std::vector<std::string> vertex_names, std::vector<Edge> edges,
                        std::optional<std::string> root = std::nullopt, int period_rank = 0);

BallSubgraph metric_ball(const MetricGraph& g, double r);

// Replaces edge e by two edges of lengths s and l-s joined at a new
// degree-2 vertex. The new vertex gets a Neumann condition in `cond` if a
// condition set is being tracked by the caller (it is appended at index
// |V|). Spectrally invisible for Neumann conditions.
MetricGraph subdivide_edge(const MetricGraph& g, int e, double s);

// Attaches a copy of the finite connected graph g1 at every vertex of g0,
// identifying v1 with that vertex. Vertex conditions of the result:
// Neumann on all g0 vertices (including glue points), cond1 on the copies
// of V1 \ {v1}.
struct DecoratedGraph {
    MetricGraph graph;
    VertexConditionSet conditions;
    // decorated.graph vertex index of the copy of g1-vertex u attached at
    // g0-vertex v; base vertices keep their g0 indices.
    std::vector<std::vector<int>> copy_index;  // [v in g0][u in g1]
};
DecoratedGraph decorate(const MetricGraph& g0, const MetricGraph& g1, int v1,
                        const VertexConditionSet& cond1);

// Supercell of a rank-1 periodic graph: m copies of the fundamental domain,
// period m times longer. Band structures fold accordingly.
MetricGraph make_supercell(const MetricGraph& g, int m);

// --- small builders used by tests, the CLI and the Schnol module -----------

// Path graph with vertices at -n..n of unit spacing `length`, rooted at "0".
MetricGraph make_chain(int n_each_side, double length = 1.0);
// Rooted tree: root of degree root_degree, every other internal vertex with
// `branching` children, all edges of the given length, `depth` generations.
MetricGraph make_tree(int root_degree, int branching, int depth, double length = 1.0);
// Z-periodic chain: one vertex, one edge with shift [1].
MetricGraph make_periodic_chain(double length = 1.0);
// Z-periodic necklace: one vertex per cell, two parallel edges to the next.
MetricGraph make_necklace(double l1 = 1.0, double l2 = 1.0);
// Single vertex with a loop.
MetricGraph make_loop(double length = 1.0);
// Interval [0, l] with two vertices.
MetricGraph make_interval(double length = 1.0);
// Star with the given leg lengths; vertex 0 is the center.
MetricGraph make_star(const std::vector<double>& legs);

}  // namespace qgs

#endif  // QGS_GRAPH_HPP
