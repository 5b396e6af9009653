#include "qgs/schnol.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "qgs/errors.hpp"
#include "qgs/spectrum.hpp"

namespace qgs {

namespace {

double subinterval_l2(const EdgeWave& w, double x0, double x1) {
    auto anti = [&](double x) {
        const BasisIntegrals I = basis_integrals(w.lambda, x);
        return w.a * w.a * I.cc + 2.0 * w.a * w.b * I.cs + w.b * w.b * I.ss;
    };
    return anti(x1) - anti(x0);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa,
                        double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    if (!(b > a)) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, std::max(tol, 1e-300), 40);
}

}  // namespace

GeneralizedEigenfunction generate_generalized_eigenfunction(const MetricGraph& g,
                                                            const VertexConditionSet& cond,
                                                            double lambda, double seed_value,
                                                            double seed_derivative) {
    if (!g.root()) throw InvalidInput("generalized eigenfunction: graph needs a root");
    if (g.num_edges() != g.num_vertices() - 1)
        throw InvalidInput("generalized eigenfunction: propagation needs a tree or chain "
                           "(supply the function explicitly otherwise)");

    GeneralizedEigenfunction phi{g, lambda, {}, 0.0, 0.0};
    phi.waves.assign(static_cast<size_t>(g.num_edges()), EdgeWave{});

    const std::vector<double> dist = g.root_distances();
    phi.ball_radius = *std::max_element(dist.begin(), dist.end());

    // BFS propagation: (vertex, value, outgoing derivative per remaining edge)
    struct Item {
        int vertex;
        int arrived_edge;  // -1 at the root
        double value;
        double out_deriv;  // derivative assigned to each outgoing edge
    };
    std::queue<Item> q;
    q.push({*g.root(), -1, seed_value, seed_derivative});
    std::vector<char> seen(static_cast<size_t>(g.num_vertices()), 0);
    seen[static_cast<size_t>(*g.root())] = 1;

    while (!q.empty()) {
        const Item it = q.front();
        q.pop();
        for (auto [e, side] : g.incidences(it.vertex)) {
            if (e == it.arrived_edge) continue;
            const Edge& ed = g.edge(e);
            EdgeWave w;
            w.edge = e;
            w.lambda = lambda;
            if (side == 0) {
                w.a = it.value;
                w.b = it.out_deriv;
            } else {
                // data given at the far coordinate end: u(l) = value,
                // u'(l) = -out_deriv; invert the transfer matrix (det 1)
                const BasisValues b = basis_eval(lambda, ed.length);
                w.a = b.ds * it.value - b.s * (-it.out_deriv);
                w.b = -b.dc * it.value + b.c * (-it.out_deriv);
            }
            phi.waves[static_cast<size_t>(e)] = w;

            const int far = side == 0 ? ed.to : ed.from;
            seen[static_cast<size_t>(far)] = 1;
            const double far_value = side == 0 ? w.value(ed.length) : w.value(0.0);
            const double deriv_in = side == 0 ? w.derivative(ed.length) : -w.derivative(0.0);
            const int children = g.degree(far) - 1;
            if (children > 0) {
                const double alpha = cond.is_dirichlet(far) ? 0.0 : cond.alpha(far, lambda);
                const double budget = alpha * far_value + deriv_in;
                q.push({far, e, far_value, budget / children});
            }
        }
    }

    // interior conditions (boundary vertices of the ball excluded)
    Eigenfunction f;
    f.waves = phi.waves;
    f.vertex_values = Eigen::VectorXd::Zero(g.num_vertices());
    double worst = 0.0;
    for (int v = 0; v < g.num_vertices(); ++v) {
        if (dist[static_cast<size_t>(v)] >= phi.ball_radius - 1e-9) continue;
        double value0 = 0.0;
        bool first = true;
        double deriv_sum = 0.0;
        for (auto [e, side] : g.incidences(v)) {
            const EdgeWave& w = phi.waves[static_cast<size_t>(e)];
            const double val = side == 0 ? w.value(0.0) : w.value(g.edge(e).length);
            const double out = side == 0 ? w.derivative(0.0) : -w.derivative(g.edge(e).length);
            if (first) {
                value0 = val;
                first = false;
            } else {
                worst = std::max(worst, std::abs(val - value0));
            }
            deriv_sum += out;
        }
        const double alpha = cond.is_dirichlet(v) ? 0.0 : cond.alpha(v, lambda);
        worst = std::max(worst, std::abs(deriv_sum - alpha * value0));
    }
    phi.interior_residual = worst;
    return phi;
}

double growth_integral(const GeneralizedEigenfunction& phi, double r) {
    const BallSubgraph ball = metric_ball(phi.graph, r);
    double acc = 0.0;
    for (int e : ball.core_edges)
        acc += phi.waves[static_cast<size_t>(e)].l2_squared(phi.graph.edge(e).length);
    return acc;
}

GrowthProfile growth_profile(const GeneralizedEigenfunction& phi, const std::vector<double>& radii,
                             double epsilon) {
    if (!(epsilon > 0.0)) throw InvalidInput("growth_profile: epsilon must be positive");
    const double L = phi.graph.max_length();
    GrowthProfile out;
    out.epsilon = epsilon;
    for (double r : radii) {
        if (r < 0.0 || r + L > phi.ball_radius)
            throw InvalidInput("growth_profile: radius outside the generated ball");
        const double j = growth_integral(phi, r);
        out.samples.push_back({r, j});
        const double jnext = growth_integral(phi, r + L);
        if (j > 0.0 && jnext <= std::exp(epsilon) * j) out.selected.push_back(r);
    }
    return out;
}

CutoffProfile CutoffProfile::cubic() {
    CutoffProfile p;
    p.value = [](double s) { return 1.0 - 3.0 * s * s + 2.0 * s * s * s; };
    p.d1 = [](double s) { return -6.0 * s + 6.0 * s * s; };
    p.d2 = [](double s) { return -6.0 + 12.0 * s; };
    return p;
}

CutoffFunction build_cutoff(const MetricGraph& g, double r, int width,
                            const CutoffProfile& profile) {
    if (width < 1) throw InvalidInput("build_cutoff: width must be at least 1");
    if (r < 0.0) throw InvalidInput("build_cutoff: negative radius");
    const std::vector<double> dist = g.root_distances();
    const double l0 = g.min_length();
    const double L = g.max_length();

    // integer layer of a vertex: 0 inside Gamma_r, then outward in steps of
    // the longest edge length, saturating at `width`
    auto layer = [&](int v) {
        const double d = dist[static_cast<size_t>(v)];
        if (d <= r + 1e-12) return 0;
        return std::min(width, static_cast<int>(std::ceil((d - r - 1e-12) / L)));
    };

    CutoffFunction theta;
    theta.r_ = r;
    theta.width_ = width;
    theta.profile_ = profile;
    bool any_drop = false;
    for (int e = 0; e < g.num_edges(); ++e) {
        const Edge& ed = g.edge(e);
        theta.edge_lengths_.push_back(ed.length);
        const bool from_inner = dist[static_cast<size_t>(ed.from)] <= dist[static_cast<size_t>(ed.to)];
        const int inner = from_inner ? ed.from : ed.to;
        const int outer = from_inner ? ed.to : ed.from;
        CutoffFunction::Piece piece;
        piece.reversed = !from_inner;
        piece.inner_value = profile.value(static_cast<double>(layer(inner)) / width);
        piece.outer_value = profile.value(static_cast<double>(layer(outer)) / width);
        piece.t0 = 0.5 * ed.length;
        piece.t1 = 0.5 * ed.length + 0.25 * l0;
        if (piece.inner_value != piece.outer_value) any_drop = true;
        theta.pieces_[e] = piece;
    }
    if (!any_drop)
        throw InvalidInput("build_cutoff: radius covers the whole generated graph "
                           "(the cutoff would be identically 1)");
    return theta;
}

double CutoffFunction::value(int edge, double x) const {
    const Piece& p = pieces_.at(edge);
    const double l = edge_lengths_[static_cast<size_t>(edge)];
    const double t = p.reversed ? l - x : x;
    if (t <= p.t0) return p.inner_value;
    if (t >= p.t1) return p.outer_value;
    const double s = (t - p.t0) / (p.t1 - p.t0);
    return p.outer_value + (p.inner_value - p.outer_value) * profile_.value(s);
}

double CutoffFunction::d1(int edge, double x) const {
    const Piece& p = pieces_.at(edge);
    const double l = edge_lengths_[static_cast<size_t>(edge)];
    const double t = p.reversed ? l - x : x;
    if (t <= p.t0 || t >= p.t1) return 0.0;
    const double h = p.t1 - p.t0;
    const double s = (t - p.t0) / h;
    const double dt = (p.inner_value - p.outer_value) * profile_.d1(s) / h;
    return p.reversed ? -dt : dt;
}

double CutoffFunction::d2(int edge, double x) const {
    const Piece& p = pieces_.at(edge);
    const double l = edge_lengths_[static_cast<size_t>(edge)];
    const double t = p.reversed ? l - x : x;
    if (t <= p.t0 || t >= p.t1) return 0.0;
    const double h = p.t1 - p.t0;
    const double s = (t - p.t0) / h;
    return (p.inner_value - p.outer_value) * profile_.d2(s) / (h * h);
}

double schnol_distance_bound(const GeneralizedEigenfunction& phi, const CutoffFunction& theta) {
    const MetricGraph& g = phi.graph;
    double num2 = 0.0;
    double den2 = 0.0;
    for (int e = 0; e < g.num_edges(); ++e) {
        const EdgeWave& w = phi.waves[static_cast<size_t>(e)];
        const CutoffFunction::Piece& p = theta.pieces().at(e);
        const double l = g.edge(e).length;

        // plateau regions in edge coordinates
        double drop_lo = p.t0, drop_hi = p.t1;
        if (p.reversed) {
            drop_lo = l - p.t1;
            drop_hi = l - p.t0;
        }
        const double c_lo = theta.value(e, 0.0);
        const double c_hi = theta.value(e, l);

        if (p.inner_value == p.outer_value) {
            den2 += p.inner_value * p.inner_value * subinterval_l2(w, 0.0, l);
            continue;
        }

        den2 += c_lo * c_lo * subinterval_l2(w, 0.0, drop_lo);
        den2 += c_hi * c_hi * subinterval_l2(w, drop_hi, l);
        auto theta2u2 = [&](double x) {
            const double tv = theta.value(e, x);
            const double uv = w.value(x);
            return tv * tv * uv * uv;
        };
        den2 += integrate(theta2u2, drop_lo, drop_hi, 1e-12);

        auto defect2 = [&](double x) {
            const double d = -2.0 * theta.d1(e, x) * w.derivative(x) - theta.d2(e, x) * w.value(x);
            return d * d;
        };
        num2 += integrate(defect2, drop_lo, drop_hi, 1e-12);
    }
    if (!(den2 > 0.0)) throw SolverError("schnol_distance_bound: cutoff annihilates the function");
    return std::sqrt(num2 / den2);
}

}  // namespace qgs
