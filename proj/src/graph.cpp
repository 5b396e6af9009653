#include "qgs/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <set>

#include "qgs/errors.hpp"

namespace qgs {

namespace {

// Checks that the integer vectors generate all of Z^n (so the unfolding of a
// periodic tagging is connected). Integer elimination with gcd pivoting;
// n is tiny in practice.
bool generates_full_lattice(std::vector<std::vector<long>> rows, int n) {
    if (n == 0) return true;
    int rank = 0;
    for (int col = 0; col < n; ++col) {
        // reduce column `col` below row `rank` by gcd steps
        while (true) {
            int pivot = -1;
            for (size_t i = rank; i < rows.size(); ++i)
                if (rows[i][static_cast<size_t>(col)] != 0) {
                    pivot = static_cast<int>(i);
                    break;
                }
            if (pivot < 0) break;
            std::swap(rows[static_cast<size_t>(rank)], rows[static_cast<size_t>(pivot)]);
            long p = rows[static_cast<size_t>(rank)][static_cast<size_t>(col)];
            bool reduced_all = true;
            for (size_t i = rank + 1; i < rows.size(); ++i) {
                long& x = rows[i][static_cast<size_t>(col)];
                if (x == 0) continue;
                long q = x / p;
                for (int j = 0; j < n; ++j)
                    rows[i][static_cast<size_t>(j)] -= q * rows[static_cast<size_t>(rank)][static_cast<size_t>(j)];
                if (rows[i][static_cast<size_t>(col)] != 0) reduced_all = false;
            }
            if (reduced_all) break;
        }
        if (static_cast<size_t>(rank) < rows.size() && rows[static_cast<size_t>(rank)][static_cast<size_t>(col)] != 0)
            ++rank;
    }
    if (rank < n) return false;
    // determinant of the top-rank triangular block must be +-1
    long det = 1;
    for (int i = 0; i < n; ++i) det *= rows[static_cast<size_t>(i)][static_cast<size_t>(i)];
    return det == 1 || det == -1;
}

}  // namespace

MetricGraph::MetricGraph(std::vector<std::string> vertex_names, std::vector<Edge> edges,
                         std::optional<std::string> root, int period_rank)
    : vertex_names_(std::move(vertex_names)), edges_(std::move(edges)), period_rank_(period_rank) {
    const int n = num_vertices();
    if (n == 0) throw InvalidInput("graph has no vertices");
    if (period_rank_ < 0) throw InvalidInput("negative period rank");

    std::map<std::string, int> seen;
    for (int v = 0; v < n; ++v) {
        if (!seen.emplace(vertex_names_[static_cast<size_t>(v)], v).second)
            throw InvalidInput("duplicate vertex id: " + vertex_names_[static_cast<size_t>(v)]);
    }

    degrees_.assign(static_cast<size_t>(n), 0);
    incidences_.assign(static_cast<size_t>(n), {});
    l0_ = std::numeric_limits<double>::infinity();
    L_ = 0.0;
    for (int e = 0; e < num_edges(); ++e) {
        Edge& ed = edges_[static_cast<size_t>(e)];
        if (ed.from < 0 || ed.from >= n || ed.to < 0 || ed.to >= n)
            throw InvalidInput("edge endpoint out of range: " + ed.name);
        if (!(ed.length > 0.0))
            throw InvalidInput("nonpositive edge length: " + ed.name);
        if (ed.shift.empty())
            ed.shift.assign(static_cast<size_t>(period_rank_), 0);
        if (static_cast<int>(ed.shift.size()) != period_rank_)
            throw InvalidInput("edge shift rank mismatch: " + ed.name);
        degrees_[static_cast<size_t>(ed.from)] += 1;
        degrees_[static_cast<size_t>(ed.to)] += 1;
        incidences_[static_cast<size_t>(ed.from)].push_back({e, 0});
        incidences_[static_cast<size_t>(ed.to)].push_back({e, 1});
        l0_ = std::min(l0_, ed.length);
        L_ = std::max(L_, ed.length);
    }
    for (int v = 0; v < n; ++v)
        if (degrees_[static_cast<size_t>(v)] == 0)
            throw InvalidInput("isolated vertex: " + vertex_names_[static_cast<size_t>(v)]);

    // connectivity of the quotient
    std::vector<char> visited(static_cast<size_t>(n), 0);
    std::queue<int> q;
    q.push(0);
    visited[0] = 1;
    int count = 1;
    while (!q.empty()) {
        int v = q.front();
        q.pop();
        for (auto [e, side] : incidences_[static_cast<size_t>(v)]) {
            int w = side == 0 ? edges_[static_cast<size_t>(e)].to : edges_[static_cast<size_t>(e)].from;
            if (!visited[static_cast<size_t>(w)]) {
                visited[static_cast<size_t>(w)] = 1;
                ++count;
                q.push(w);
            }
        }
    }
    if (count != n) throw InvalidInput("graph is disconnected");

    // connectivity of the unfolding: cycle shifts must generate Z^rank
    if (period_rank_ > 0) {
        std::vector<std::vector<long>> potentials(static_cast<size_t>(n),
                                                  std::vector<long>(static_cast<size_t>(period_rank_), 0));
        std::vector<char> have(static_cast<size_t>(n), 0);
        std::vector<std::vector<long>> cycle_shifts;
        std::queue<int> bfs;
        bfs.push(0);
        have[0] = 1;
        while (!bfs.empty()) {
            int v = bfs.front();
            bfs.pop();
            for (auto [e, side] : incidences_[static_cast<size_t>(v)]) {
                const Edge& ed = edges_[static_cast<size_t>(e)];
                int w = side == 0 ? ed.to : ed.from;
                std::vector<long> pw(static_cast<size_t>(period_rank_));
                for (int j = 0; j < period_rank_; ++j) {
                    long t = ed.shift[static_cast<size_t>(j)];
                    pw[static_cast<size_t>(j)] =
                        potentials[static_cast<size_t>(v)][static_cast<size_t>(j)] + (side == 0 ? t : -t);
                }
                if (!have[static_cast<size_t>(w)]) {
                    have[static_cast<size_t>(w)] = 1;
                    potentials[static_cast<size_t>(w)] = pw;
                    bfs.push(w);
                } else {
                    std::vector<long> diff(static_cast<size_t>(period_rank_));
                    bool nonzero = false;
                    for (int j = 0; j < period_rank_; ++j) {
                        diff[static_cast<size_t>(j)] =
                            pw[static_cast<size_t>(j)] - potentials[static_cast<size_t>(w)][static_cast<size_t>(j)];
                        nonzero = nonzero || diff[static_cast<size_t>(j)] != 0;
                    }
                    if (nonzero) cycle_shifts.push_back(diff);
                }
            }
        }
        if (!generates_full_lattice(cycle_shifts, period_rank_))
            throw InvalidInput("periodic tagging does not generate a connected unfolding");
    }

    if (root) {
        root_ = vertex_index(*root);
    }
}

int MetricGraph::vertex_index(const std::string& name) const {
    for (int v = 0; v < num_vertices(); ++v)
        if (vertex_names_[static_cast<size_t>(v)] == name) return v;
    throw InvalidInput("unknown vertex id: " + name);
}

int MetricGraph::edge_index(const std::string& name) const {
    for (int e = 0; e < num_edges(); ++e)
        if (edges_[static_cast<size_t>(e)].name == name) return e;
    throw InvalidInput("unknown edge id: " + name);
}

std::vector<double> MetricGraph::root_distances() const {
    if (!root_) throw InvalidInput("graph has no root");
    if (is_periodic()) throw InvalidInput("root distances require a compact graph");
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(static_cast<size_t>(num_vertices()), inf);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[static_cast<size_t>(*root_)] = 0.0;
    pq.push({0.0, *root_});
    while (!pq.empty()) {
        auto [d, v] = pq.top();
        pq.pop();
        if (d > dist[static_cast<size_t>(v)]) continue;
        for (auto [e, side] : incidences_[static_cast<size_t>(v)]) {
            const Edge& ed = edges_[static_cast<size_t>(e)];
            int w = side == 0 ? ed.to : ed.from;
            double nd = d + ed.length;
            if (nd < dist[static_cast<size_t>(w)]) {
                dist[static_cast<size_t>(w)] = nd;
                pq.push({nd, w});
            }
        }
    }
    return dist;
}

// --- VertexConditionSet -----------------------------------------------------

VertexConditionSet VertexConditionSet::neumann(int n) {
    VertexConditionSet c;
    c.kinds_.assign(static_cast<size_t>(n), Kind::Delta);
    c.alphas_.assign(static_cast<size_t>(n), 0.0);
    c.robin_.resize(static_cast<size_t>(n));
    c.singular_.resize(static_cast<size_t>(n));
    return c;
}

void VertexConditionSet::set_delta(int v, double alpha) {
    kinds_[static_cast<size_t>(v)] = Kind::Delta;
    alphas_[static_cast<size_t>(v)] = alpha;
    robin_[static_cast<size_t>(v)] = nullptr;
    singular_[static_cast<size_t>(v)].clear();
}

void VertexConditionSet::set_dirichlet(int v) {
    kinds_[static_cast<size_t>(v)] = Kind::Dirichlet;
}

void VertexConditionSet::set_robin(int v, std::function<double(double)> alpha,
                                   std::vector<double> singularities) {
    kinds_[static_cast<size_t>(v)] = Kind::Robin;
    robin_[static_cast<size_t>(v)] = std::move(alpha);
    singular_[static_cast<size_t>(v)] = std::move(singularities);
}

double VertexConditionSet::alpha(int v, double lambda) const {
    switch (kind(v)) {
        case Kind::Delta:
            return alphas_[static_cast<size_t>(v)];
        case Kind::Robin: {
            double a = robin_[static_cast<size_t>(v)](lambda);
            if (!std::isfinite(a)) throw SolverError("SpectralRobin coupling evaluated to a non-finite value");
            return a;
        }
        case Kind::Dirichlet:
            throw SolverError("alpha() queried at a Dirichlet vertex");
    }
    return 0.0;
}

std::vector<double> VertexConditionSet::robin_singularities() const {
    std::set<double> s;
    for (const auto& list : singular_) s.insert(list.begin(), list.end());
    return {s.begin(), s.end()};
}

MetricGraph build_graph(std::vector<std::string> vertex_names, std::vector<Edge> edges,
                        std::optional<std::string> root, int period_rank) {
    return MetricGraph(std::move(vertex_names), std::move(edges), std::move(root), period_rank);
}

// --- metric ball ------------------------------------------------------------

double BallSubgraph::point_distance(const MetricGraph& g, int e, double x) const {
    const Edge& ed = g.edge(e);
    const double dv = vertex_distance[static_cast<size_t>(ed.from)];
    const double dw = vertex_distance[static_cast<size_t>(ed.to)];
    return std::min(dv + x, dw + ed.length - x);
}

bool BallSubgraph::point_in_ball(const MetricGraph& g, int e, double x) const {
    return point_distance(g, e, x) <= radius;
}

BallSubgraph metric_ball(const MetricGraph& g, double r) {
    if (!g.root()) throw InvalidInput("metric_ball: graph has no root");
    if (r < 0.0) throw InvalidInput("metric_ball: negative radius");
    BallSubgraph ball;
    ball.radius = r;
    ball.vertex_distance = g.root_distances();
    for (int v = 0; v < g.num_vertices(); ++v)
        if (ball.vertex_distance[static_cast<size_t>(v)] <= r) ball.ball_vertices.push_back(v);
    for (int e = 0; e < g.num_edges(); ++e) {
        const Edge& ed = g.edge(e);
        const double dv = ball.vertex_distance[static_cast<size_t>(ed.from)];
        const double dw = ball.vertex_distance[static_cast<size_t>(ed.to)];
        if (dv > r || dw > r) continue;
        // farthest point of the edge from the root
        double far;
        if (std::abs(dv - dw) >= ed.length)
            far = std::max(dv, dw);
        else
            far = 0.5 * (dv + dw + ed.length);
        if (far <= r) ball.core_edges.push_back(e);
    }
    return ball;
}

// --- subdivision ------------------------------------------------------------

MetricGraph subdivide_edge(const MetricGraph& g, int e, double s) {
    const Edge& ed = g.edge(e);
    if (!(s > 0.0 && s < ed.length))
        throw InvalidInput("subdivide_edge: split position outside (0, length)");
    auto names = g.vertex_names();
    std::string nn = ed.name + ":cut";
    int suffix = 0;
    while (std::find(names.begin(), names.end(), nn) != names.end())
        nn = ed.name + ":cut" + std::to_string(++suffix);
    names.push_back(nn);
    const int mid = static_cast<int>(names.size()) - 1;

    std::vector<Edge> edges;
    edges.reserve(static_cast<size_t>(g.num_edges()) + 1);
    for (int i = 0; i < g.num_edges(); ++i) {
        if (i == e) continue;
        edges.push_back(g.edge(i));
    }
    Edge first{ed.name + ":a", ed.from, mid, s, {}};
    Edge second{ed.name + ":b", mid, ed.to, ed.length - s, ed.shift};
    if (g.period_rank() > 0) first.shift.assign(static_cast<size_t>(g.period_rank()), 0);
    edges.push_back(first);
    edges.push_back(second);

    std::optional<std::string> root;
    if (g.root()) root = g.vertex_name(*g.root());
    return MetricGraph(std::move(names), std::move(edges), root, g.period_rank());
}

// --- decoration -------------------------------------------------------------

DecoratedGraph decorate(const MetricGraph& g0, const MetricGraph& g1, int v1,
                        const VertexConditionSet& cond1) {
    if (g1.is_periodic()) throw InvalidInput("decorate: decoration graph must be finite");
    if (v1 < 0 || v1 >= g1.num_vertices()) throw InvalidInput("decorate: bad root vertex");

    auto names = g0.vertex_names();
    std::vector<Edge> edges = g0.edges();
    std::vector<std::vector<int>> copy_index(static_cast<size_t>(g0.num_vertices()),
                                             std::vector<int>(static_cast<size_t>(g1.num_vertices()), -1));

    for (int v = 0; v < g0.num_vertices(); ++v) {
        const std::string prefix = g0.vertex_name(v) + "/";
        for (int u = 0; u < g1.num_vertices(); ++u) {
            if (u == v1) {
                copy_index[static_cast<size_t>(v)][static_cast<size_t>(u)] = v;
            } else {
                copy_index[static_cast<size_t>(v)][static_cast<size_t>(u)] =
                    static_cast<int>(names.size());
                names.push_back(prefix + g1.vertex_name(u));
            }
        }
        for (int e = 0; e < g1.num_edges(); ++e) {
            const Edge& ed = g1.edge(e);
            Edge copy;
            copy.name = prefix + ed.name;
            copy.from = copy_index[static_cast<size_t>(v)][static_cast<size_t>(ed.from)];
            copy.to = copy_index[static_cast<size_t>(v)][static_cast<size_t>(ed.to)];
            copy.length = ed.length;
            if (g0.period_rank() > 0) copy.shift.assign(static_cast<size_t>(g0.period_rank()), 0);
            edges.push_back(copy);
        }
    }

    std::optional<std::string> root;
    if (g0.root()) root = g0.vertex_name(*g0.root());
    MetricGraph graph(std::move(names), std::move(edges), root, g0.period_rank());

    VertexConditionSet cond = VertexConditionSet::neumann(graph.num_vertices());
    for (int v = 0; v < g0.num_vertices(); ++v) {
        for (int u = 0; u < g1.num_vertices(); ++u) {
            if (u == v1) continue;  // glue points stay Neumann
            int idx = copy_index[static_cast<size_t>(v)][static_cast<size_t>(u)];
            switch (cond1.kind(u)) {
                case VertexConditionSet::Kind::Delta:
                    cond.set_delta(idx, cond1.alpha(u, 0.0));
                    break;
                case VertexConditionSet::Kind::Dirichlet:
                    cond.set_dirichlet(idx);
                    break;
                case VertexConditionSet::Kind::Robin:
                    throw InvalidInput("decorate: SpectralRobin conditions on a decoration are not supported");
            }
        }
    }
    return DecoratedGraph{std::move(graph), std::move(cond), std::move(copy_index)};
}

// --- supercell --------------------------------------------------------------

MetricGraph make_supercell(const MetricGraph& g, int m) {
    if (g.period_rank() != 1) throw InvalidInput("make_supercell: rank-1 periodic graph required");
    if (m < 1) throw InvalidInput("make_supercell: factor must be >= 1");
    std::vector<std::string> names;
    for (int c = 0; c < m; ++c)
        for (int v = 0; v < g.num_vertices(); ++v)
            names.push_back(g.vertex_name(v) + "%" + std::to_string(c));
    std::vector<Edge> edges;
    for (int c = 0; c < m; ++c) {
        for (int e = 0; e < g.num_edges(); ++e) {
            const Edge& ed = g.edge(e);
            const int t = ed.shift[0];
            const int target = c + t;
            const int cell = ((target % m) + m) % m;
            const int super = (target - cell) / m;
            Edge copy;
            copy.name = ed.name + "%" + std::to_string(c);
            copy.from = c * g.num_vertices() + ed.from;
            copy.to = cell * g.num_vertices() + ed.to;
            copy.length = ed.length;
            copy.shift = {super};
            edges.push_back(copy);
        }
    }
    return MetricGraph(std::move(names), std::move(edges), std::nullopt, 1);
}

// --- builders ---------------------------------------------------------------

MetricGraph make_chain(int n_each_side, double length) {
    std::vector<std::string> names;
    for (int i = -n_each_side; i <= n_each_side; ++i) names.push_back(std::to_string(i));
    std::vector<Edge> edges;
    for (int i = -n_each_side; i < n_each_side; ++i) {
        Edge e;
        e.name = "e" + std::to_string(i);
        e.from = i + n_each_side;
        e.to = i + 1 + n_each_side;
        e.length = length;
        edges.push_back(e);
    }
    return MetricGraph(std::move(names), std::move(edges), std::string("0"));
}

MetricGraph make_tree(int root_degree, int branching, int depth, double length) {
    std::vector<std::string> names{"o"};
    std::vector<Edge> edges;
    std::vector<int> frontier{0};
    int next_edge = 0;
    for (int gen = 0; gen < depth; ++gen) {
        std::vector<int> next;
        const int children = gen == 0 ? root_degree : branching;
        for (int v : frontier) {
            for (int cidx = 0; cidx < children; ++cidx) {
                int w = static_cast<int>(names.size());
                names.push_back(names[static_cast<size_t>(v)] + "." + std::to_string(cidx));
                Edge e;
                e.name = "t" + std::to_string(next_edge++);
                e.from = v;
                e.to = w;
                e.length = length;
                edges.push_back(e);
                next.push_back(w);
            }
        }
        frontier = std::move(next);
    }
    return MetricGraph(std::move(names), std::move(edges), std::string("o"));
}

MetricGraph make_periodic_chain(double length) {
    return MetricGraph({"v"}, {Edge{"e", 0, 0, length, {1}}}, std::nullopt, 1);
}

MetricGraph make_necklace(double l1, double l2) {
    return MetricGraph({"v"}, {Edge{"r1", 0, 0, l1, {1}}, Edge{"r2", 0, 0, l2, {1}}}, std::nullopt, 1);
}

MetricGraph make_loop(double length) {
    return MetricGraph({"v"}, {Edge{"loop", 0, 0, length, {}}});
}

MetricGraph make_interval(double length) {
    return MetricGraph({"a", "b"}, {Edge{"e", 0, 1, length, {}}});
}

MetricGraph make_star(const std::vector<double>& legs) {
    std::vector<std::string> names{"c"};
    std::vector<Edge> edges;
    for (size_t i = 0; i < legs.size(); ++i) {
        names.push_back("leaf" + std::to_string(i));
        Edge e;
        e.name = "leg" + std::to_string(i);
        e.from = 0;
        e.to = static_cast<int>(i) + 1;
        e.length = legs[i];
        edges.push_back(e);
    }
    return MetricGraph(std::move(names), std::move(edges), std::string("c"));
}

}  // namespace qgs
