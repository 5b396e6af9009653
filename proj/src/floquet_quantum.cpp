#include "qgs/floquet_quantum.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "qgs/dirichlet.hpp"
#include "qgs/edge_basis.hpp"
#include "qgs/errors.hpp"

namespace qgs {

namespace {

Monomial madd(const Monomial& a, const std::vector<int>& b) {
    Monomial out(a.size());
    for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return out;
}

Monomial msub(const Monomial& a, const std::vector<int>& b) {
    Monomial out(a.size());
    for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

std::vector<Monomial> cell_box(int rank, int radius) {
    std::vector<Monomial> out;
    Monomial cur(static_cast<size_t>(rank), -radius);
    if (rank == 0) {
        out.push_back({});
        return out;
    }
    while (true) {
        out.push_back(cur);
        size_t j = 0;
        for (; j < cur.size(); ++j) {
            if (++cur[j] <= radius) break;
            cur[j] = -radius;
        }
        if (j == cur.size()) break;
    }
    return out;
}

}  // namespace

SecularMatrix bloch_secular(const MetricGraph& g, const VertexConditionSet& cond, double lambda,
                            const std::vector<double>& k, double delta_d) {
    if (!g.is_periodic()) throw InvalidInput("bloch_secular: periodic graph required");
    return assemble_secular(g, cond, lambda, k, delta_d);
}

PeriodicDifferenceOperator quantum_vertex_operator(const MetricGraph& g,
                                                   const VertexConditionSet& cond, double lambda,
                                                   double delta_d) {
    if (!g.is_periodic()) throw InvalidInput("quantum_vertex_operator: periodic graph required");
    std::vector<int> index(static_cast<size_t>(g.num_vertices()), -1);
    std::vector<std::string> names;
    for (int v = 0; v < g.num_vertices(); ++v) {
        if (cond.is_dirichlet(v)) continue;
        index[static_cast<size_t>(v)] = static_cast<int>(names.size());
        names.push_back(g.vertex_name(v));
    }
    using Hop = PeriodicDifferenceOperator::Hop;
    std::vector<Hop> hops;
    const Monomial zero(static_cast<size_t>(g.period_rank()), 0);
    for (int e = 0; e < g.num_edges(); ++e) {
        const Edge& ed = g.edge(e);
        if (dirichlet_distance(lambda, ed.length) < delta_d)
            throw SolverError("quantum_vertex_operator: lambda too close to the Dirichlet spectrum");
        const BasisValues b = basis_eval(lambda, ed.length);
        const int iv = index[static_cast<size_t>(ed.from)];
        const int iw = index[static_cast<size_t>(ed.to)];
        Monomial shift(ed.shift.begin(), ed.shift.end());
        Monomial nshift(shift.size());
        for (size_t j = 0; j < shift.size(); ++j) nshift[j] = -shift[j];
        if (iv >= 0) {
            hops.push_back({iv, iv, zero, -b.c / b.s});
            if (iw >= 0) hops.push_back({iv, iw, shift, 1.0 / b.s});
        }
        if (iw >= 0) {
            hops.push_back({iw, iw, zero, -b.c / b.s});
            if (iv >= 0) hops.push_back({iw, iv, nshift, 1.0 / b.s});
        }
    }
    for (int v = 0; v < g.num_vertices(); ++v) {
        const int iv = index[static_cast<size_t>(v)];
        if (iv < 0) continue;
        const double alpha = cond.alpha(v, lambda);
        if (alpha != 0.0) hops.push_back({iv, iv, zero, -alpha});
    }
    return PeriodicDifferenceOperator(g.period_rank(), std::move(names), std::move(hops));
}

// --- resonant (vertex-vanishing) scars ----------------------------------------

std::optional<Scar> resonant_scar(const MetricGraph& g, const VertexConditionSet& cond,
                                  double lambda, int box_radius, double delta_d) {
    if (!g.is_periodic()) throw InvalidInput("resonant_scar: periodic graph required");
    std::vector<int> resonant;
    for (int e = 0; e < g.num_edges(); ++e)
        if (dirichlet_distance(lambda, g.edge(e).length) < delta_d) resonant.push_back(e);
    if (resonant.empty()) return std::nullopt;

    const std::vector<Monomial> cells = cell_box(g.period_rank(), box_radius);
    std::map<std::pair<int, Monomial>, int> col;
    for (int e : resonant)
        for (const Monomial& c : cells) col[{e, c}] = static_cast<int>(col.size());

    // derivative-sum rows over every touched non-Dirichlet vertex instance
    std::map<std::pair<int, Monomial>, std::map<int, double>> rows;
    for (int e : resonant) {
        const Edge& ed = g.edge(e);
        const BasisValues b = basis_eval(lambda, ed.length);
        for (const Monomial& c : cells) {
            const int j = col[{e, c}];
            if (!cond.is_dirichlet(ed.from)) rows[{ed.from, c}][j] += 1.0;
            if (!cond.is_dirichlet(ed.to)) rows[{ed.to, madd(c, ed.shift)}][j] += -b.c;
        }
    }
    if (rows.empty()) return std::nullopt;

    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<int>(rows.size()),
                                              static_cast<int>(col.size()));
    int r = 0;
    for (const auto& [vtx, coeffs] : rows) {
        for (const auto& [j, val] : coeffs) A(r, j) = val;
        ++r;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double tol = 1e-9 * std::max(1.0, sv.size() > 0 ? sv[0] : 0.0);
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv[i] > tol) ++rank;
    if (rank == static_cast<int>(col.size())) return std::nullopt;

    const Eigen::VectorXd x = svd.matrixV().col(static_cast<int>(col.size()) - 1);

    Scar scar;
    scar.lambda = lambda;
    scar.rank = g.period_rank();
    double norm2 = 0.0;
    for (const auto& [key, j] : col) {
        if (std::abs(x[j]) < 1e-12) continue;
        EdgeWave w;
        w.edge = key.first;
        w.lambda = lambda;
        w.a = 0.0;
        w.b = x[j];
        norm2 += w.l2_squared(g.edge(key.first).length);
        scar.waves.push_back({key.first, key.second, 0.0, x[j]});
    }
    if (scar.waves.empty()) return std::nullopt;
    const double inv = 1.0 / std::sqrt(norm2);
    for (auto& w : scar.waves) w.b *= inv;
    scar.residual = (A * x).cwiseAbs().maxCoeff() * inv;
    return scar;
}

// --- flat bands ---------------------------------------------------------------

namespace {

// total translation degree per dimension: a safe bound on the trigonometric
// degree of det M(lambda, .)
std::vector<int> translation_degrees(const MetricGraph& g) {
    std::vector<int> d(static_cast<size_t>(g.period_rank()), 0);
    for (const Edge& e : g.edges())
        for (int j = 0; j < g.period_rank(); ++j)
            d[static_cast<size_t>(j)] += std::abs(e.shift[static_cast<size_t>(j)]);
    return d;
}

// max over the sample grid of log |det M(lambda, k)|; nullopt if assembly
// fails anywhere (lambda excluded)
std::optional<double> max_log_det(const MetricGraph& g, const VertexConditionSet& cond,
                                  double lambda, const std::vector<int>& samples,
                                  double delta_d) {
    double worst = -std::numeric_limits<double>::infinity();
    Monomial idx(samples.size(), 0);
    try {
        while (true) {
            std::vector<double> k(samples.size());
            for (size_t j = 0; j < samples.size(); ++j)
                k[j] = 2.0 * M_PI * (idx[j] + 0.37) / samples[j];
            const auto an = assemble_secular(g, cond, lambda, k, delta_d).analyze();
            worst = std::max(worst, an.log_abs_det);
            size_t j = 0;
            for (; j < idx.size(); ++j) {
                if (++idx[j] < samples[j]) break;
                idx[j] = 0;
            }
            if (j == idx.size()) break;
        }
    } catch (const SolverError&) {
        return std::nullopt;
    }
    return worst;
}

}  // namespace

bool flat_band_test(const MetricGraph& g, const VertexConditionSet& cond, double lambda,
                    double tol, int scar_box) {
    if (!g.is_periodic()) throw InvalidInput("flat_band_test: periodic graph required");
    if (dirichlet_distance(g, lambda) < 1e-6) {
        // resonant route: a flat band on sigma_D means a compactly supported
        // cycle state exists
        for (int box : {0, 1, 2, 4}) {
            if (box > scar_box) break;
            if (resonant_scar(g, cond, lambda, box)) return true;
        }
        return static_cast<bool>(resonant_scar(g, cond, lambda, scar_box));
    }

    const std::vector<int> degs = translation_degrees(g);
    std::vector<int> samples(degs.size());
    for (size_t j = 0; j < degs.size(); ++j) samples[j] = 2 * degs[j] + 1;

    const auto at_lambda = max_log_det(g, cond, lambda, samples, 1e-6);
    if (!at_lambda) throw SolverError("flat_band_test: lambda excluded (Dirichlet spectrum?)");

    // reference scale from nearby regular lambdas
    double log_scale = -std::numeric_limits<double>::infinity();
    bool have_ref = false;
    for (double offset : {0.37, -0.53, 1.11, -1.7, 2.3}) {
        const auto ref = max_log_det(g, cond, lambda + offset * (1.0 + std::abs(lambda)) * 0.1,
                                     samples, 1e-6);
        if (ref) {
            log_scale = std::max(log_scale, *ref);
            have_ref = true;
        }
    }
    if (!have_ref) throw SolverError("flat_band_test: no usable reference lambda");
    return *at_lambda < std::log(tol) + log_scale;
}

// --- quantum scars --------------------------------------------------------------

std::optional<Scar> quantum_scar(const MetricGraph& g, const VertexConditionSet& cond,
                                 double lambda, int degree_bound, double delta_d) {
    if (!g.is_periodic()) throw InvalidInput("quantum_scar: periodic graph required");
    if (dirichlet_distance(g, lambda) < delta_d) {
        for (int box : {0, 1, 2, 4, 8}) {
            if (box > degree_bound) break;
            if (auto s = resonant_scar(g, cond, lambda, box, delta_d)) return s;
        }
        return std::nullopt;
    }

    const PeriodicDifferenceOperator op = quantum_vertex_operator(g, cond, lambda, delta_d);
    std::optional<PolyKernelVector> q;
    for (int d : {0, 1, 2, 4, 8}) {
        if (d > degree_bound) break;
        q = compact_kernel_solution(op, 0.0, d);
        if (q) break;
    }
    if (!q && degree_bound > 8) q = compact_kernel_solution(op, 0.0, degree_bound);
    if (!q) return std::nullopt;

    // vertex values on the unfolded graph (real up to the normalization phase)
    std::vector<int> windex(static_cast<size_t>(g.num_vertices()), -1);
    {
        int next = 0;
        for (int v = 0; v < g.num_vertices(); ++v)
            if (!cond.is_dirichlet(v)) windex[static_cast<size_t>(v)] = next++;
    }
    std::map<std::pair<int, Monomial>, double> values;
    for (int v = 0; v < g.num_vertices(); ++v) {
        const int w = windex[static_cast<size_t>(v)];
        if (w < 0) continue;
        for (const auto& [m, c] : q->components[static_cast<size_t>(w)].terms()) {
            if (std::abs(c.imag()) > 1e-8)
                throw SolverError("quantum_scar: kernel vector is not real after phase alignment");
            if (std::abs(c.real()) > 1e-12) values[{v, m}] = c.real();
        }
    }
    if (values.empty()) return std::nullopt;

    Scar scar;
    scar.lambda = lambda;
    scar.rank = g.period_rank();
    for (const auto& [key, val] : values) scar.vertex_values.push_back({key.first, key.second, val});

    // waves on every unfolded edge touching the support
    auto value_at = [&](int v, const Monomial& cell) {
        auto it = values.find({v, cell});
        return it == values.end() ? 0.0 : it->second;
    };
    std::set<Monomial> touched_cells;
    for (const auto& [key, val] : values) touched_cells.insert(key.second);
    std::set<std::pair<int, Monomial>> wave_keys;
    for (const auto& cell : touched_cells) {
        for (int e = 0; e < g.num_edges(); ++e) {
            const Edge& ed = g.edge(e);
            // edge instances with `from` in this cell, and those with `to` here
            wave_keys.insert({e, cell});
            wave_keys.insert({e, msub(cell, ed.shift)});
        }
    }
    double norm2 = 0.0;
    std::map<std::pair<int, Monomial>, EdgeWave> waves;
    for (const auto& [e, cell] : wave_keys) {
        const Edge& ed = g.edge(e);
        const double u1 = value_at(ed.from, cell);
        const double u2 = value_at(ed.to, madd(cell, ed.shift));
        if (u1 == 0.0 && u2 == 0.0) continue;
        const BasisValues b = basis_eval(lambda, ed.length);
        EdgeWave w;
        w.edge = e;
        w.lambda = lambda;
        w.a = u1;
        w.b = (u2 - u1 * b.c) / b.s;
        waves[{e, cell}] = w;
        norm2 += w.l2_squared(ed.length);
        scar.waves.push_back({e, cell, w.a, w.b});
    }

    // vertex-condition residual on the support and its boundary
    double worst = 0.0;
    std::set<std::pair<int, Monomial>> check;
    for (const auto& [key, w] : waves) {
        const Edge& ed = g.edge(key.first);
        check.insert({ed.from, key.second});
        check.insert({ed.to, madd(key.second, ed.shift)});
    }
    for (const auto& [v, cell] : check) {
        if (cond.is_dirichlet(v)) {
            worst = std::max(worst, std::abs(value_at(v, cell)));
            continue;
        }
        double sum = 0.0;
        for (auto [e, side] : g.incidences(v)) {
            const Edge& ed = g.edge(e);
            const Monomial ecell = side == 0 ? cell : msub(cell, ed.shift);
            auto it = waves.find({e, ecell});
            if (it == waves.end()) continue;
            sum += side == 0 ? it->second.derivative(0.0) : -it->second.derivative(ed.length);
        }
        worst = std::max(worst, std::abs(sum - cond.alpha(v, lambda) * value_at(v, cell)));
    }

    const double inv = 1.0 / std::sqrt(norm2);
    for (auto& w : scar.waves) {
        w.a *= inv;
        w.b *= inv;
    }
    for (auto& vv : scar.vertex_values) vv.value *= inv;
    scar.residual = worst * inv;
    return scar;
}

// --- band structure ---------------------------------------------------------------

BandStructure band_structure(const MetricGraph& g, const VertexConditionSet& cond, int k_points,
                             double lo, double hi, const BandOptions& opts) {
    if (!g.is_periodic()) throw InvalidInput("band_structure: periodic graph required");
    if (k_points < 2) throw InvalidInput("band_structure: need at least two k points");

    SpectrumOptions so = opts.spectrum;
    if (so.scan_step <= 0.0) so.scan_step = std::min(0.01, g.min_length() / 20.0);
    so.compute_eigenfunctions = false;

    std::vector<double> masks;
    std::vector<double> sigma_points;
    if (hi > 0.0) {
        for (const auto& entry : dirichlet_spectrum(g, hi + 1.0, so.delta_d).entries) {
            masks.push_back(entry.lambda);
            if (entry.lambda >= lo && entry.lambda <= hi) sigma_points.push_back(entry.lambda);
        }
    }
    for (double p : cond.robin_singularities())
        if (p > lo - 1.0 && p < hi + 1.0) masks.push_back(p);

    BandStructure out;
    // k grid over the torus (all combinations)
    Monomial idx(static_cast<size_t>(g.period_rank()), 0);
    while (true) {
        std::vector<double> k(static_cast<size_t>(g.period_rank()));
        for (int j = 0; j < g.period_rank(); ++j)
            k[static_cast<size_t>(j)] = 2.0 * M_PI * idx[static_cast<size_t>(j)] / k_points;

        auto eval = [&](double lam) -> std::optional<SecularMatrix::Analysis> {
            try {
                return assemble_secular(g, cond, lam, k, so.delta_d).analyze();
            } catch (const SolverError&) {
                return std::nullopt;
            }
        };
        std::vector<double> roots;
        for (const ScanRoot& r : scan_determinant_roots(eval, lo, hi, masks, so))
            roots.push_back(r.lambda);
        out.kgrid.push_back(std::move(k));
        out.roots.push_back(std::move(roots));

        size_t j = 0;
        for (; j < idx.size(); ++j) {
            if (++idx[j] < k_points) break;
            idx[j] = 0;
        }
        if (j == idx.size()) break;
    }

    // flat bands on the Dirichlet spectrum: compactly supported cycle states
    for (double mu : sigma_points)
        if (resonant_scar(g, cond, mu, opts.scar_box)) out.flat_bands.push_back(mu);

    // grid resolution: the largest per-band lambda step between adjacent
    // quasimomenta (matched by sorted index up to the common count)
    double resolution = 0.0;
    for (size_t i = 0; i + 1 < out.roots.size(); ++i) {
        const size_t nb = std::min(out.roots[i].size(), out.roots[i + 1].size());
        for (size_t b = 0; b < nb; ++b)
            resolution = std::max(resolution, std::abs(out.roots[i + 1][b] - out.roots[i][b]));
    }
    out.gap_resolution = resolution;

    // flat dispersive bands: a root present at every k with zero spread
    if (!out.roots.empty()) {
        size_t nb = std::numeric_limits<size_t>::max();
        for (const auto& roots : out.roots) nb = std::min(nb, roots.size());
        for (size_t b = 0; b < nb; ++b) {
            double bmin = std::numeric_limits<double>::infinity(), bmax = -bmin;
            for (const auto& roots : out.roots) {
                bmin = std::min(bmin, roots[b]);
                bmax = std::max(bmax, roots[b]);
            }
            if (bmax - bmin < 1e-9 * (1.0 + std::abs(bmin)))
                out.flat_bands.push_back(0.5 * (bmin + bmax));
        }
    }
    std::sort(out.flat_bands.begin(), out.flat_bands.end());
    out.flat_bands.erase(std::unique(out.flat_bands.begin(), out.flat_bands.end(),
                                     [](double a, double b) { return std::abs(a - b) < 1e-9; }),
                         out.flat_bands.end());

    // candidate gaps: holes in the sorted union of all roots and flat bands
    std::vector<double> support;
    for (const auto& roots : out.roots) support.insert(support.end(), roots.begin(), roots.end());
    support.insert(support.end(), out.flat_bands.begin(), out.flat_bands.end());
    std::sort(support.begin(), support.end());

    auto holes_of = [&](const std::vector<double>& pts) {
        std::vector<std::pair<double, double>> holes;
        for (size_t i = 0; i + 1 < pts.size(); ++i)
            if (pts[i + 1] - pts[i] > opts.min_gap_width) holes.push_back({pts[i], pts[i + 1]});
        return holes;
    };

    // adaptive k-refinement: a hole crossed by a band acquires roots from a
    // denser k grid and closes; a true gap stays root-free
    std::vector<std::pair<double, double>> holes = holes_of(support);
    int fine = k_points;
    for (int round = 0; round < opts.refine_rounds && !holes.empty(); ++round) {
        fine *= opts.refine_factor;
        if (g.period_rank() != 1) break;  // refinement implemented for rank 1
        for (const auto& [a, b] : holes) {
            for (int i = 0; i < fine; ++i) {
                const double kv = 2.0 * M_PI * i / fine;
                auto eval = [&](double lam) -> std::optional<SecularMatrix::Analysis> {
                    try {
                        return assemble_secular(g, cond, lam, {kv}, so.delta_d).analyze();
                    } catch (const SolverError&) {
                        return std::nullopt;
                    }
                };
                for (const ScanRoot& r : scan_determinant_roots(eval, a, b, masks, so))
                    support.push_back(r.lambda);
            }
        }
        std::sort(support.begin(), support.end());
        holes = holes_of(support);
    }
    out.gaps = holes;
    return out;
}

}  // namespace qgs
