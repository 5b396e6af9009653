#include "qgs/spectrum.hpp"

#include <algorithm>
#include <cmath>

#include "qgs/errors.hpp"

namespace qgs {

namespace {

double lambda_of_tau(double tau) { return tau * std::abs(tau); }
double tau_of_lambda(double lambda) {
    return lambda >= 0.0 ? std::sqrt(lambda) : -std::sqrt(-lambda);
}

// Turns a complex kernel basis of a real symmetric matrix into a real one.
Eigen::MatrixXd realize_kernel(const Eigen::MatrixXcd& kernel) {
    const int n = static_cast<int>(kernel.rows());
    const int m = static_cast<int>(kernel.cols());
    Eigen::MatrixXd stacked(n, 2 * m);
    stacked.leftCols(m) = kernel.real();
    stacked.rightCols(m) = kernel.imag();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv[i] > 1e-8 * sv[0]) ++rank;
    rank = std::min(rank, m);
    return svd.matrixU().leftCols(std::max(rank, 1));
}

bool near_any(double lambda, const std::vector<double>& points, double radius) {
    for (double p : points)
        if (std::abs(lambda - p) < radius) return true;
    return false;
}

}  // namespace

std::vector<ScanRoot> scan_determinant_roots(
    const std::function<std::optional<SecularMatrix::Analysis>(double)>& eval, double lo,
    double hi, const std::vector<double>& masks, const SpectrumOptions& opts,
    std::vector<std::string>* warnings) {
    if (!(lo < hi)) throw InvalidInput("scan: empty window");
    const double step = opts.scan_step > 0.0 ? opts.scan_step : 0.01;
    const double tau_lo = tau_of_lambda(lo);
    const double tau_hi = tau_of_lambda(hi);
    const int nu = std::max(2, static_cast<int>(std::ceil((tau_hi - tau_lo) / step)) + 1);
    std::vector<double> tau(static_cast<size_t>(nu));
    for (int i = 0; i < nu; ++i)
        tau[static_cast<size_t>(i)] = tau_lo + (tau_hi - tau_lo) * i / (nu - 1);

    // geometric refinement toward every mask, so that poles of the
    // determinant at masked points do not hide nearby roots: the sign
    // pattern is resolved down to ~2*delta_d on both sides (masks just
    // outside the window still get their in-window rungs)
    for (double m : masks) {
        const double span = 2.0 * step * (std::abs(tau_of_lambda(m)) + step);
        if (m <= lo - span || m >= hi + span) continue;
        for (int sgn : {-1, 1}) {
            for (double d = 2.0 * opts.delta_d; d < span; d *= 2.0) {
                const double lam = m + sgn * d;
                if (lam > lo && lam < hi) tau.push_back(tau_of_lambda(lam));
            }
        }
    }
    std::sort(tau.begin(), tau.end());
    tau.erase(std::unique(tau.begin(), tau.end()), tau.end());
    const int n = static_cast<int>(tau.size());

    std::vector<std::optional<SecularMatrix::Analysis>> a(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double lam = lambda_of_tau(tau[static_cast<size_t>(i)]);
        if (near_any(lam, masks, 2.0 * opts.delta_d)) continue;
        a[static_cast<size_t>(i)] = eval(lam);
    }

    // a bracket is trusted when no mask sits in or near it
    auto bracket_clear = [&](double t0, double t1) {
        const double la = lambda_of_tau(t0), lb = lambda_of_tau(t1);
        for (double m : masks)
            if (m > la - 2.0 * opts.delta_d && m < lb + 2.0 * opts.delta_d) return false;
        return true;
    };

    // typical magnitude of the largest eigenvalue, the reference for the
    // absolute singularity tolerance (the relative one degenerates when the
    // whole matrix vanishes at a root, e.g. for 1x1 systems)
    std::vector<double> scales;
    for (const auto& ai : a)
        if (ai) scales.push_back(ai->scale);
    if (scales.empty()) return {};
    std::nth_element(scales.begin(), scales.begin() + scales.size() / 2, scales.end());
    const double scale_ref = std::max(scales[scales.size() / 2], 1e-30);
    // absolute singularity tolerance; deliberately NOT scaled by the local
    // matrix norm, which blows up near determinant poles where one
    // eigenvalue vanishes without det M having a root
    auto abs_tol = [&](const SecularMatrix::Analysis& an) {
        (void)an;
        return opts.rank_tol * scale_ref;
    };

    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    auto golden_min_smin = [&](double t0, double t1) {
        auto value = [&](double t) {
            auto r = eval(lambda_of_tau(t));
            return r ? r->smin : std::numeric_limits<double>::infinity();
        };
        double x1 = t1 - gr * (t1 - t0);
        double x2 = t0 + gr * (t1 - t0);
        double f1 = value(x1), f2 = value(x2);
        while (t1 - t0 > opts.refine_tol) {
            if (f1 <= f2) {
                t1 = x2;
                x2 = x1;
                f2 = f1;
                x1 = t1 - gr * (t1 - t0);
                f1 = value(x1);
            } else {
                t0 = x1;
                x1 = x2;
                f1 = f2;
                x2 = t0 + gr * (t1 - t0);
                f2 = value(x2);
            }
        }
        return 0.5 * (t0 + t1);
    };

    std::vector<double> candidates;

    // grid points already inside the singular band, refined by minimization;
    // mask-adjacent ones are dropped (the masked point itself is handled by
    // the caller's resonant solve, and a root strictly between refinement
    // points is caught by bisection)
    for (int i = 0; i < n; ++i) {
        const auto& ai = a[static_cast<size_t>(i)];
        if (!ai || !ai->singular(abs_tol(*ai))) continue;
        const double t0 = tau[static_cast<size_t>(std::max(0, i - 1))];
        const double t1 = tau[static_cast<size_t>(std::min(n - 1, i + 1))];
        if (bracket_clear(t0, t1)) candidates.push_back(golden_min_smin(t0, t1));
    }

    // sign-change bisection on the raw determinant sign
    for (int i = 0; i + 1 < n; ++i) {
        const auto& ai = a[static_cast<size_t>(i)];
        const auto& aj = a[static_cast<size_t>(i + 1)];
        if (!ai || !aj) continue;
        if (ai->raw_sign * aj->raw_sign != -1) continue;
        double t0 = tau[static_cast<size_t>(i)], t1 = tau[static_cast<size_t>(i + 1)];
        if (!bracket_clear(t0, t1)) continue;
        int s0 = ai->raw_sign;
        while (t1 - t0 > opts.refine_tol) {
            const double tm = 0.5 * (t0 + t1);
            auto am = eval(lambda_of_tau(tm));
            if (!am) break;
            if (am->raw_sign == 0) {
                t0 = t1 = tm;
                break;
            }
            if (am->raw_sign == s0)
                t0 = tm;
            else
                t1 = tm;
        }
        candidates.push_back(0.5 * (t0 + t1));
    }

    // local minima of the smallest |eigenvalue| (even multiplicities)
    for (int i = 1; i + 1 < n; ++i) {
        const auto& am = a[static_cast<size_t>(i - 1)];
        const auto& ai = a[static_cast<size_t>(i)];
        const auto& ap = a[static_cast<size_t>(i + 1)];
        if (!am || !ai || !ap) continue;
        if (!(ai->smin <= am->smin && ai->smin <= ap->smin)) continue;
        const double t0 = tau[static_cast<size_t>(i - 1)], t1 = tau[static_cast<size_t>(i + 1)];
        if (!bracket_clear(t0, t1)) continue;
        candidates.push_back(golden_min_smin(t0, t1));
    }

    std::sort(candidates.begin(), candidates.end());
    std::vector<ScanRoot> roots;
    double last_tau = -std::numeric_limits<double>::infinity();
    double last_lambda = -std::numeric_limits<double>::infinity();
    for (double t : candidates) {
        const double lam = lambda_of_tau(t);
        if (t - last_tau < 1e-9 || lam - last_lambda < 1e-9 * (1.0 + std::abs(lam))) continue;
        if (lam < lo - 1e-12 || lam > hi + 1e-12) continue;
        // a candidate this close to a mask is attributed to the masked point
        // itself (the caller resolves it exactly); without this, an
        // eigenvalue sitting exactly on a mask leaks smeared copies into the
        // refinement rungs beside it
        if (near_any(lam, masks, 8.0 * opts.delta_d)) continue;
        auto an = eval(lam);
        if (!an) continue;
        const double tol = abs_tol(*an);
        if (!an->singular(tol)) continue;  // spurious minimum
        last_tau = t;
        last_lambda = lam;
        ScanRoot r;
        r.lambda = lam;
        r.analysis = *an;
        r.kernel_tol = tol;
        roots.push_back(std::move(r));
    }

    if (warnings) {
        for (size_t i = 0; i + 1 < roots.size(); ++i) {
            const double dt = tau_of_lambda(roots[i + 1].lambda) - tau_of_lambda(roots[i].lambda);
            if (dt < 2.0 * step)
                warnings->push_back("grid too coarse: roots separated by less than two scan steps near lambda = " +
                                    std::to_string(roots[i].lambda));
        }
    }
    return roots;
}

std::vector<EdgeWave> eigenfunction_reconstruct(const MetricGraph& g,
                                                const VertexConditionSet& cond, double lambda,
                                                const Eigen::VectorXd& vertex_values,
                                                double delta_d) {
    (void)cond;
    if (vertex_values.size() != g.num_vertices())
        throw InvalidInput("eigenfunction_reconstruct: vertex value vector size mismatch");
    std::vector<EdgeWave> waves;
    waves.reserve(static_cast<size_t>(g.num_edges()));
    for (int e = 0; e < g.num_edges(); ++e) {
        const Edge& ed = g.edge(e);
        if (dirichlet_distance(lambda, ed.length) < delta_d)
            throw SolverError("eigenfunction_reconstruct: lambda too close to the Dirichlet spectrum");
        const BasisValues b = basis_eval(lambda, ed.length);
        EdgeWave w;
        w.edge = e;
        w.lambda = lambda;
        w.a = vertex_values[ed.from];
        w.b = (vertex_values[ed.to] - vertex_values[ed.from] * b.c) / b.s;
        waves.push_back(w);
    }
    return waves;
}

double condition_residual(const MetricGraph& g, const VertexConditionSet& cond,
                          const Eigenfunction& f) {
    double worst = 0.0;
    for (int v = 0; v < g.num_vertices(); ++v) {
        double value0 = 0.0;
        bool first = true;
        double deriv_sum = 0.0;
        for (auto [e, side] : g.incidences(v)) {
            const EdgeWave& w = f.waves[static_cast<size_t>(e)];
            const double l = g.edge(e).length;
            const double val = side == 0 ? w.value(0.0) : w.value(l);
            const double out = side == 0 ? w.derivative(0.0) : -w.derivative(l);
            if (first) {
                value0 = val;
                first = false;
            } else {
                worst = std::max(worst, std::abs(val - value0));
            }
            deriv_sum += out;
        }
        if (cond.is_dirichlet(v)) {
            worst = std::max(worst, std::abs(value0));
        } else {
            const double alpha = cond.alpha(v, f.waves.empty() ? 0.0 : f.waves[0].lambda);
            worst = std::max(worst, std::abs(deriv_sum - alpha * value0));
        }
    }
    return worst;
}

double outgoing_derivative_sum(const MetricGraph& g, const Eigenfunction& f, int v) {
    double sum = 0.0;
    for (auto [e, side] : g.incidences(v)) {
        const EdgeWave& w = f.waves[static_cast<size_t>(e)];
        sum += side == 0 ? w.derivative(0.0) : -w.derivative(g.edge(e).length);
    }
    return sum;
}

void normalize_l2(const MetricGraph& g, Eigenfunction& f) {
    double norm2 = 0.0;
    for (int e = 0; e < g.num_edges(); ++e)
        norm2 += f.waves[static_cast<size_t>(e)].l2_squared(g.edge(e).length);
    if (norm2 <= 0.0) return;
    const double inv = 1.0 / std::sqrt(norm2);
    for (auto& w : f.waves) {
        w.a *= inv;
        w.b *= inv;
    }
    f.vertex_values *= inv;
}

std::vector<Eigenfunction> dirichlet_resonant_states(const MetricGraph& g,
                                                     const VertexConditionSet& cond,
                                                     double lambda, double delta_d) {
    std::vector<int> resonant;
    for (int e = 0; e < g.num_edges(); ++e)
        if (dirichlet_distance(lambda, g.edge(e).length) < delta_d) resonant.push_back(e);
    if (resonant.empty()) return {};

    std::vector<int> col_of(static_cast<size_t>(g.num_edges()), -1);
    for (size_t i = 0; i < resonant.size(); ++i)
        col_of[static_cast<size_t>(resonant[i])] = static_cast<int>(i);

    // derivative-sum condition at every non-Dirichlet vertex touching a
    // resonant edge; continuity holds with value 0 automatically
    std::vector<Eigen::RowVectorXd> rows;
    for (int v = 0; v < g.num_vertices(); ++v) {
        if (cond.is_dirichlet(v)) continue;
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(static_cast<int>(resonant.size()));
        bool touches = false;
        for (auto [e, side] : g.incidences(v)) {
            const int c = col_of[static_cast<size_t>(e)];
            if (c < 0) continue;
            touches = true;
            const BasisValues b = basis_eval(lambda, g.edge(e).length);
            row[c] += side == 0 ? 1.0 : -b.c;
        }
        if (touches) rows.push_back(std::move(row));
    }

    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<int>(rows.size()),
                                              static_cast<int>(resonant.size()));
    for (size_t i = 0; i < rows.size(); ++i) A.row(static_cast<int>(i)) = rows[i];

    Eigen::MatrixXd kernel;
    if (A.rows() == 0) {
        kernel = Eigen::MatrixXd::Identity(static_cast<int>(resonant.size()),
                                           static_cast<int>(resonant.size()));
    } else {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
        const auto& sv = svd.singularValues();
        const double tol = 1e-9 * std::max(1.0, sv.size() > 0 ? sv[0] : 0.0);
        int rank = 0;
        for (int i = 0; i < sv.size(); ++i)
            if (sv[i] > tol) ++rank;
        const int dim = static_cast<int>(resonant.size()) - rank;
        if (dim <= 0) return {};
        kernel = svd.matrixV().rightCols(dim);
    }

    std::vector<Eigenfunction> out;
    for (int c = 0; c < kernel.cols(); ++c) {
        Eigenfunction f;
        f.vertex_values = Eigen::VectorXd::Zero(g.num_vertices());
        f.waves.resize(static_cast<size_t>(g.num_edges()));
        for (int e = 0; e < g.num_edges(); ++e) {
            EdgeWave w;
            w.edge = e;
            w.lambda = lambda;
            w.a = 0.0;
            w.b = col_of[static_cast<size_t>(e)] >= 0 ? kernel(col_of[static_cast<size_t>(e)], c) : 0.0;
            f.waves[static_cast<size_t>(e)] = w;
        }
        normalize_l2(g, f);
        out.push_back(std::move(f));
    }
    return out;
}

std::vector<Eigenfunction> eigenspace_at(const MetricGraph& g, const VertexConditionSet& cond,
                                         double lambda, double rank_tol) {
    const int ne = g.num_edges();
    const int cols = 2 * ne;  // (a_e, b_e)
    std::vector<Eigen::RowVectorXd> rows;
    for (int v = 0; v < g.num_vertices(); ++v) {
        const auto& incs = g.incidences(v);
        auto value_coeffs = [&](int e, int side, Eigen::RowVectorXd& row, double w) {
            const BasisValues b = basis_eval(lambda, g.edge(e).length);
            if (side == 0) {
                row[2 * e] += w;
            } else {
                row[2 * e] += w * b.c;
                row[2 * e + 1] += w * b.s;
            }
        };
        auto outderiv_coeffs = [&](int e, int side, Eigen::RowVectorXd& row) {
            const BasisValues b = basis_eval(lambda, g.edge(e).length);
            if (side == 0) {
                row[2 * e + 1] += 1.0;
            } else {
                row[2 * e] += lambda * b.s;
                row[2 * e + 1] += -b.c;
            }
        };
        if (cond.is_dirichlet(v)) {
            for (auto [e, side] : incs) {
                Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(cols);
                value_coeffs(e, side, row, 1.0);
                rows.push_back(std::move(row));
            }
        } else {
            for (size_t i = 1; i < incs.size(); ++i) {
                Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(cols);
                value_coeffs(incs[i].first, incs[i].second, row, 1.0);
                value_coeffs(incs[0].first, incs[0].second, row, -1.0);
                rows.push_back(std::move(row));
            }
            Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(cols);
            for (auto [e, side] : incs) outderiv_coeffs(e, side, row);
            value_coeffs(incs[0].first, incs[0].second, row, -cond.alpha(v, lambda));
            rows.push_back(std::move(row));
        }
    }

    Eigen::MatrixXd K(static_cast<int>(rows.size()), cols);
    for (size_t i = 0; i < rows.size(); ++i) K.row(static_cast<int>(i)) = rows[i];
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(K, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double tol = rank_tol * std::max(sv.size() > 0 ? sv[0] : 0.0, 1.0);
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv[i] > tol) ++rank;
    const int dim = cols - rank;
    if (dim <= 0) return {};

    std::vector<Eigenfunction> out;
    for (int c = 0; c < dim; ++c) {
        const Eigen::VectorXd x = svd.matrixV().col(cols - 1 - c);
        Eigenfunction f;
        f.waves.resize(static_cast<size_t>(ne));
        for (int e = 0; e < ne; ++e) {
            EdgeWave w;
            w.edge = e;
            w.lambda = lambda;
            w.a = x[2 * e];
            w.b = x[2 * e + 1];
            f.waves[static_cast<size_t>(e)] = w;
        }
        f.vertex_values = Eigen::VectorXd::Zero(g.num_vertices());
        for (int v = 0; v < g.num_vertices(); ++v) {
            const auto [e, side] = g.incidences(v)[0];
            f.vertex_values[v] = side == 0 ? f.waves[static_cast<size_t>(e)].value(0.0)
                                           : f.waves[static_cast<size_t>(e)].value(g.edge(e).length);
        }
        normalize_l2(g, f);
        out.push_back(std::move(f));
    }
    return out;
}

std::vector<EigenResult> solve_spectrum(const MetricGraph& g, const VertexConditionSet& cond,
                                        double lo, double hi, const SpectrumOptions& opts,
                                        std::vector<std::string>* warnings) {
    if (!(lo < hi)) throw InvalidInput("solve_spectrum: empty window");
    if (g.is_periodic()) throw InvalidInput("solve_spectrum: compact graph required (use the Floquet solver)");

    SpectrumOptions o = opts;
    if (o.scan_step <= 0.0) o.scan_step = std::min(0.01, g.min_length() / 20.0);

    std::vector<double> sigma_d;
    if (hi > 0.0) {
        for (const auto& entry : dirichlet_spectrum(g, hi + 1.0, o.delta_d).entries)
            sigma_d.push_back(entry.lambda);
    }
    std::vector<double> masks = sigma_d;
    for (double p : cond.robin_singularities())
        if (p > lo - 1.0 && p < hi + 1.0) masks.push_back(p);

    auto eval = [&](double lam) -> std::optional<SecularMatrix::Analysis> {
        try {
            return assemble_secular(g, cond, lam, {}, o.delta_d).analyze();
        } catch (const SolverError&) {
            return std::nullopt;
        }
    };

    bool any_free = false;
    for (int v = 0; v < g.num_vertices(); ++v) any_free = any_free || !cond.is_dirichlet(v);

    std::vector<EigenResult> results;
    std::vector<ScanRoot> scan_roots;
    if (any_free) scan_roots = scan_determinant_roots(eval, lo, hi, masks, o, warnings);
    for (const ScanRoot& r : scan_roots) {
        EigenResult res;
        res.lambda = r.lambda;
        // a bisection root is genuine even if the band classified no vector
        const double ktol = std::max(r.kernel_tol, r.analysis.smin * (1.0 + 1e-12));
        const Eigen::MatrixXcd kernel = r.analysis.kernel(ktol);
        res.multiplicity = std::max<int>(1, static_cast<int>(kernel.cols()));
        if (o.compute_eigenfunctions && kernel.cols() > 0) {
            const SecularMatrix sm = assemble_secular(g, cond, r.lambda, {}, o.delta_d);
            const Eigen::MatrixXd real_kernel = realize_kernel(kernel);
            for (int c = 0; c < real_kernel.cols(); ++c) {
                Eigen::VectorXd vv = Eigen::VectorXd::Zero(g.num_vertices());
                for (size_t i = 0; i < sm.index_to_vertex.size(); ++i)
                    vv[sm.index_to_vertex[i]] = real_kernel(static_cast<int>(i), c);
                Eigenfunction f;
                f.vertex_values = vv;
                f.waves = eigenfunction_reconstruct(g, cond, r.lambda, vv, o.delta_d);
                normalize_l2(g, f);
                res.eigenfunctions.push_back(std::move(f));
            }
            for (const auto& f : res.eigenfunctions)
                res.residual = std::max(res.residual, condition_residual(g, cond, f));
        }
        results.push_back(std::move(res));
    }

    // Dirichlet-spectrum points: the vertex reduction is singular there, so
    // the full edge-coefficient kernel decides membership and multiplicity.
    for (double mu : sigma_d) {
        if (mu < lo || mu > hi) continue;
        bool skip = false;
        for (double p : cond.robin_singularities())
            if (std::abs(p - mu) < 10.0 * o.delta_d) skip = true;
        if (skip) {
            if (warnings)
                warnings->push_back("Dirichlet-spectrum point coincides with a Robin singularity near lambda = " +
                                    std::to_string(mu) + "; skipped");
            continue;
        }
        auto fs = eigenspace_at(g, cond, mu);
        if (fs.empty()) continue;
        EigenResult res;
        res.lambda = mu;
        res.multiplicity = static_cast<int>(fs.size());
        for (const auto& f : fs) res.residual = std::max(res.residual, condition_residual(g, cond, f));
        if (o.compute_eigenfunctions) res.eigenfunctions = std::move(fs);
        results.push_back(std::move(res));
    }

    std::sort(results.begin(), results.end(),
              [](const EigenResult& x, const EigenResult& y) { return x.lambda < y.lambda; });
    return results;
}

}  // namespace qgs
