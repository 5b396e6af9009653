#include "qgs/dtn.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "qgs/edge_basis.hpp"
#include "qgs/errors.hpp"
#include "qgs/secular.hpp"

namespace qgs {

namespace {

// Richardson extrapolation of an even series g(h) = R + c2 h^2 + c4 h^4 ...
// (Neville in the variable h^2). Returns the limit and the last correction.
std::pair<double, double> richardson_even(const std::vector<double>& h,
                                          const std::vector<double>& g) {
    const size_t n = h.size();
    std::vector<std::vector<double>> t(n, std::vector<double>(n, 0.0));
    for (size_t i = 0; i < n; ++i) t[i][0] = g[i];
    for (size_t j = 1; j < n; ++j) {
        for (size_t i = j; i < n; ++i) {
            const double ratio = (h[i - j] * h[i - j]) / (h[i] * h[i]);
            t[i][j] = t[i][j - 1] + (t[i][j - 1] - t[i - 1][j - 1]) / (ratio - 1.0);
        }
    }
    const double value = t[n - 1][n - 1];
    const double err = n >= 2 ? std::abs(t[n - 1][n - 1] - t[n - 1][n - 2]) : 0.0;
    return {value, err};
}

}  // namespace

DtnFunction::DtnFunction(MetricGraph g1, int root, VertexConditionSet cond1, double pole_lo,
                         double pole_hi)
    : g1_(std::move(g1)), root_(root), cond1_(std::move(cond1)) {
    if (g1_.is_periodic()) throw InvalidInput("DtnFunction: decoration must be finite");
    if (root_ < 0 || root_ >= g1_.num_vertices()) throw InvalidInput("DtnFunction: bad root");
    poles_ = dtn_pole_candidates(g1_, root_, cond1_, pole_lo, pole_hi);
}

std::vector<double> DtnFunction::pole_positions() const {
    std::vector<double> out;
    out.reserve(poles_.size());
    for (const PoleData& p : poles_) out.push_back(p.lambda0);
    return out;
}

double DtnFunction::eval(double lambda) const {
    auto it = cache_.find(lambda);
    if (it != cache_.end()) return it->second;
    const double value = dtn_function(g1_, root_, cond1_, lambda);
    cache_.emplace(lambda, value);
    return value;
}

double dtn_function(const MetricGraph& g1, int v1, const VertexConditionSet& cond1,
                    double lambda) {
    const int ne = g1.num_edges();
    const int cols = 2 * ne;
    std::vector<Eigen::RowVectorXd> rows;
    std::vector<double> rhs;

    auto value_coeffs = [&](int e, int side, Eigen::RowVectorXd& row, double w) {
        const BasisValues b = basis_eval(lambda, g1.edge(e).length);
        if (side == 0) {
            row[2 * e] += w;
        } else {
            row[2 * e] += w * b.c;
            row[2 * e + 1] += w * b.s;
        }
    };
    auto outderiv_coeffs = [&](int e, int side, Eigen::RowVectorXd& row) {
        const BasisValues b = basis_eval(lambda, g1.edge(e).length);
        if (side == 0) {
            row[2 * e + 1] += 1.0;
        } else {
            row[2 * e] += lambda * b.s;
            row[2 * e + 1] += -b.c;
        }
    };

    for (int v = 0; v < g1.num_vertices(); ++v) {
        const auto& incs = g1.incidences(v);
        if (v == v1) {
            // root boundary data u(v1) = 1 on every incidence
            for (auto [e, side] : incs) {
                Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(cols);
                value_coeffs(e, side, row, 1.0);
                rows.push_back(std::move(row));
                rhs.push_back(1.0);
            }
            continue;
        }
        if (cond1.is_dirichlet(v)) {
            for (auto [e, side] : incs) {
                Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(cols);
                value_coeffs(e, side, row, 1.0);
                rows.push_back(std::move(row));
                rhs.push_back(0.0);
            }
        } else {
            for (size_t i = 1; i < incs.size(); ++i) {
                Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(cols);
                value_coeffs(incs[i].first, incs[i].second, row, 1.0);
                value_coeffs(incs[0].first, incs[0].second, row, -1.0);
                rows.push_back(std::move(row));
                rhs.push_back(0.0);
            }
            Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(cols);
            for (auto [e, side] : incs) outderiv_coeffs(e, side, row);
            value_coeffs(incs[0].first, incs[0].second, row, -cond1.alpha(v, lambda));
            rows.push_back(std::move(row));
            rhs.push_back(0.0);
        }
    }

    Eigen::MatrixXd K(static_cast<int>(rows.size()), cols);
    Eigen::VectorXd b(static_cast<int>(rows.size()));
    for (size_t i = 0; i < rows.size(); ++i) {
        K.row(static_cast<int>(i)) = rows[i];
        b[static_cast<int>(i)] = rhs[i];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(K);
    const Eigen::VectorXd x = qr.solve(b);
    if ((K * x - b).norm() > 1e-7 * (1.0 + b.norm() + K.norm()))
        throw SolverError("dtn_function: interior system is singular (lambda at a pole?)");

    // sum of outgoing derivatives of the solution at the root
    double out = 0.0;
    for (auto [e, side] : g1.incidences(v1)) {
        const BasisValues bv = basis_eval(lambda, g1.edge(e).length);
        if (side == 0)
            out += x[2 * e + 1];
        else
            out += lambda * bv.s * x[2 * e] - bv.c * x[2 * e + 1];
    }
    return out;
}

std::vector<PoleData> dtn_pole_candidates(const MetricGraph& g1, int v1,
                                          const VertexConditionSet& cond1, double lo, double hi) {
    VertexConditionSet rooted = cond1;
    rooted.set_dirichlet(v1);
    std::vector<PoleData> out;
    for (const EigenResult& r : solve_spectrum(g1, rooted, lo, hi)) {
        PoleData p;
        p.lambda0 = r.lambda;
        p.multiplicity = r.multiplicity;
        p.simple = r.multiplicity == 1;
        p.in_decoration_sigma_d = dirichlet_distance(g1, r.lambda) < 1e-8 * (1.0 + std::abs(r.lambda));
        double psi2 = 0.0;
        for (const Eigenfunction& f : r.eigenfunctions) {
            const double s = outgoing_derivative_sum(g1, f, v1);
            psi2 += s * s;
        }
        p.psi = std::sqrt(psi2);
        try {
            p.residue = dtn_residue(g1, v1, cond1, p.lambda0, {1e-2, 1e-3, 1e-4}, &p.residue_error);
        } catch (const SolverError&) {
            p.residue = std::numeric_limits<double>::quiet_NaN();
            p.residue_error = std::numeric_limits<double>::infinity();
        }
        out.push_back(std::move(p));
    }
    return out;
}

double dtn_residue(const MetricGraph& g1, int v1, const VertexConditionSet& cond1, double lambda0,
                   const std::vector<double>& h_list, double* error_estimate) {
    if (h_list.empty()) throw InvalidInput("dtn_residue: empty step list");
    std::vector<double> h = h_list;
    std::sort(h.begin(), h.end(), std::greater<>());
    std::vector<double> g;
    g.reserve(h.size());
    for (double step : h) {
        const double plus = step * dtn_function(g1, v1, cond1, lambda0 + step);
        const double minus = -step * dtn_function(g1, v1, cond1, lambda0 - step);
        g.push_back(0.5 * (plus + minus));
    }
    const auto [value, err] = richardson_even(h, g);
    if (error_estimate) *error_estimate = err;
    if (!(std::abs(err) <= 0.05 * std::abs(value) + 1e-9))
        throw SolverError("dtn_residue: extrapolation did not converge (higher-order pole?)");
    return value;
}

VertexConditionSet decorated_reduction(
    const MetricGraph& g0, const VertexConditionSet& cond0,
    const std::map<int, std::shared_ptr<const DtnFunction>>& dtns) {
    VertexConditionSet cond = cond0;
    for (const auto& [v, dtn] : dtns) {
        if (v < 0 || v >= g0.num_vertices()) throw InvalidInput("decorated_reduction: bad vertex");
        if (cond0.is_dirichlet(v)) continue;  // a decoration at a pinned vertex is invisible
        auto fn = dtn;
        cond.set_robin(
            v, [fn](double lambda) { return -fn->eval(lambda); }, fn->pole_positions());
    }
    return cond;
}

VertexConditionSet decorated_reduction(const MetricGraph& g0, const VertexConditionSet& cond0,
                                       std::shared_ptr<const DtnFunction> dtn) {
    std::map<int, std::shared_ptr<const DtnFunction>> dtns;
    for (int v = 0; v < g0.num_vertices(); ++v) dtns[v] = dtn;
    return decorated_reduction(g0, cond0, dtns);
}

GapCertificate gap_certificate(const MetricGraph& g0, const VertexConditionSet& cond0,
                               const std::map<int, std::shared_ptr<const DtnFunction>>& dtns,
                               double lambda0, double w, const GapCertificateOptions& opts) {
    GapCertificate cert;
    cert.lambda0 = lambda0;
    if (!g0.is_periodic()) {
        cert.reason = "base graph is not periodic";
        return cert;
    }
    if (dtns.empty()) {
        cert.reason = "no decorations attached";
        return cert;
    }
    // refusal: lambda0 on sigma_D of the base graph (Remark: decoration
    // cannot remove Dirichlet-spectrum eigenvalues; subdivide first)
    if (dirichlet_distance(g0, lambda0) < 10.0 * opts.delta_d) {
        cert.reason = "lambda0 lies on the Dirichlet spectrum of the base graph; "
                      "subdivide its edges first";
        return cert;
    }
    // uniform blow-up: every attached DtN function needs an applicable pole
    // at lambda0
    for (const auto& [v, dtn] : dtns) {
        bool ok = false;
        for (const PoleData& p : dtn->poles())
            if (std::abs(p.lambda0 - lambda0) < 1e-6 * (1.0 + std::abs(lambda0)) && p.applicable())
                ok = true;
        if (!ok) {
            cert.reason = "decoration at vertex " + g0.vertex_name(v) +
                          " has no applicable pole at lambda0";
            return cert;
        }
    }

    const VertexConditionSet reduced = decorated_reduction(g0, cond0, dtns);
    const int rank = g0.period_rank();
    const int npts = std::max(3, opts.lambda_points);
    const double step = 2.0 * w / (npts - 1);
    const double hole = step;

    // k-grid: uniform per dimension, all combinations
    std::vector<std::vector<double>> kgrid;
    {
        std::vector<int> idx(static_cast<size_t>(rank), 0);
        while (true) {
            std::vector<double> k(static_cast<size_t>(rank));
            for (int j = 0; j < rank; ++j)
                k[static_cast<size_t>(j)] = 2.0 * M_PI * idx[static_cast<size_t>(j)] / opts.k_points;
            kgrid.push_back(k);
            int j = 0;
            for (; j < rank; ++j) {
                if (++idx[static_cast<size_t>(j)] < opts.k_points) break;
                idx[static_cast<size_t>(j)] = 0;
            }
            if (j == rank) break;
        }
    }

    // pass 1: minimal |eigenvalue| over k per lambda, collecting scales
    std::vector<double> lambdas, minsmin;
    std::vector<char> valid;
    std::vector<double> scales;
    for (int i = 0; i < npts; ++i) {
        const double lam = lambda0 - w + step * i;
        if (std::abs(lam - lambda0) <= hole) continue;
        lambdas.push_back(lam);
        double worst = std::numeric_limits<double>::infinity();
        bool ok = true;
        try {
            for (const auto& k : kgrid) {
                const auto an = assemble_secular(g0, reduced, lam, k, opts.delta_d).analyze();
                worst = std::min(worst, an.smin);
                scales.push_back(an.scale);
            }
        } catch (const SolverError&) {
            ok = false;
        }
        minsmin.push_back(worst);
        valid.push_back(ok ? 1 : 0);
    }
    if (scales.empty()) {
        cert.reason = "no valid sample points in the window";
        return cert;
    }
    std::nth_element(scales.begin(), scales.begin() + scales.size() / 2, scales.end());
    const double tol = opts.tol * scales[scales.size() / 2];

    // pass 2: maximal contiguous certified run on each side of the hole
    double lo_edge = lambda0, hi_edge = lambda0;
    bool any_left = false, any_right = false;
    for (size_t ii = lambdas.size(); ii-- > 0;) {
        if (lambdas[ii] > lambda0) continue;
        if (!(valid[ii] && minsmin[ii] > tol)) break;
        lo_edge = lambdas[ii];
        any_left = true;
    }
    for (size_t i = 0; i < lambdas.size(); ++i) {
        if (lambdas[i] < lambda0) continue;
        if (!(valid[i] && minsmin[i] > tol)) break;
        hi_edge = lambdas[i];
        any_right = true;
    }
    if (!any_left || !any_right) {
        cert.reason = "no certifiable gap at this grid resolution";
        return cert;
    }
    cert.certified = true;
    cert.gap_lo = lo_edge;
    cert.gap_hi = hi_edge;
    return cert;
}

GapCertificate gap_certificate(const MetricGraph& g0, const VertexConditionSet& cond0,
                               std::shared_ptr<const DtnFunction> dtn, double lambda0, double w,
                               const GapCertificateOptions& opts) {
    std::map<int, std::shared_ptr<const DtnFunction>> dtns;
    for (int v = 0; v < g0.num_vertices(); ++v)
        if (!cond0.is_dirichlet(v)) dtns[v] = dtn;
    return gap_certificate(g0, cond0, dtns, lambda0, w, opts);
}

}  // namespace qgs
