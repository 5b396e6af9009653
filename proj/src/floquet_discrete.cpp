#include "qgs/floquet_discrete.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qgs/errors.hpp"

namespace qgs {

namespace {

Monomial negate(const Monomial& m) {
    Monomial out(m.size());
    for (size_t i = 0; i < m.size(); ++i) out[i] = -m[i];
    return out;
}

Monomial subtract(const Monomial& a, const Monomial& b) {
    Monomial out(a.size());
    for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

Monomial add(const Monomial& a, const Monomial& b) {
    Monomial out(a.size());
    for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return out;
}

// all exponent vectors in the box [lo, hi], lexicographic
std::vector<Monomial> box_monomials(const Monomial& lo, const Monomial& hi) {
    const size_t n = lo.size();
    std::vector<Monomial> out;
    Monomial cur = lo;
    if (n == 0) {
        out.push_back({});
        return out;
    }
    while (true) {
        out.push_back(cur);
        size_t j = 0;
        for (; j < n; ++j) {
            if (++cur[j] <= hi[j]) break;
            cur[j] = lo[j];
        }
        if (j == n) break;
    }
    return out;
}

}  // namespace

// --- operator ----------------------------------------------------------------

PeriodicDifferenceOperator::PeriodicDifferenceOperator(int rank,
                                                       std::vector<std::string> vertex_names,
                                                       std::vector<Hop> hops)
    : rank_(rank), vertex_names_(std::move(vertex_names)) {
    if (rank_ < 0) throw InvalidInput("difference operator: negative rank");
    const int n = num_vertices();
    std::map<std::tuple<int, int, Monomial>, std::complex<double>> merged;
    for (Hop& h : hops) {
        if (h.from < 0 || h.from >= n || h.to < 0 || h.to >= n)
            throw InvalidInput("difference operator: hop endpoint out of range");
        if (h.shift.empty()) h.shift.assign(static_cast<size_t>(rank_), 0);
        if (static_cast<int>(h.shift.size()) != rank_)
            throw InvalidInput("difference operator: hop shift rank mismatch");
        merged[{h.from, h.to, h.shift}] += h.amplitude;
    }
    for (auto& [key, amp] : merged) {
        if (std::abs(amp) == 0.0) continue;
        hops_.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), amp});
    }
}

bool PeriodicDifferenceOperator::is_self_adjoint(double tol) const {
    std::map<std::tuple<int, int, Monomial>, std::complex<double>> table;
    for (const Hop& h : hops_) table[{h.from, h.to, h.shift}] = h.amplitude;
    for (const Hop& h : hops_) {
        auto it = table.find({h.to, h.from, negate(h.shift)});
        const std::complex<double> other = it == table.end() ? 0.0 : it->second;
        if (std::abs(h.amplitude - std::conj(other)) > tol) return false;
    }
    return true;
}

// --- Laurent polynomials -------------------------------------------------------

void LaurentPoly::add(const Monomial& m, std::complex<double> c) {
    auto [it, inserted] = terms_.emplace(m, c);
    if (!inserted) it->second += c;
}

std::complex<double> LaurentPoly::coeff(const Monomial& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? std::complex<double>(0.0) : it->second;
}

std::complex<double> LaurentPoly::eval_k(const std::vector<double>& k) const {
    std::complex<double> acc = 0.0;
    for (const auto& [m, c] : terms_) {
        double phase = 0.0;
        for (size_t j = 0; j < k.size(); ++j) phase += k[j] * m[j];
        acc += c * std::complex<double>(std::cos(phase), std::sin(phase));
    }
    return acc;
}

Eigen::MatrixXcd LaurentMatrix::eval_k(const std::vector<double>& k) const {
    Eigen::MatrixXcd out(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out(i, j) = at(i, j).eval_k(k);
    return out;
}

LaurentMatrix floquet_symbol(const PeriodicDifferenceOperator& op) {
    LaurentMatrix sym;
    sym.rank = op.rank();
    sym.n = op.num_vertices();
    sym.entries.assign(static_cast<size_t>(sym.n * sym.n), {});
    sym.min_deg.assign(static_cast<size_t>(sym.rank), 0);
    sym.max_deg.assign(static_cast<size_t>(sym.rank), 0);
    for (const auto& h : op.hops()) {
        const Monomial m = negate(h.shift);
        sym.at(h.from, h.to).add(m, h.amplitude);
        for (int j = 0; j < sym.rank; ++j) {
            sym.min_deg[static_cast<size_t>(j)] =
                std::min(sym.min_deg[static_cast<size_t>(j)], m[static_cast<size_t>(j)]);
            sym.max_deg[static_cast<size_t>(j)] =
                std::max(sym.max_deg[static_cast<size_t>(j)], m[static_cast<size_t>(j)]);
        }
    }
    return sym;
}

// --- bands ---------------------------------------------------------------------

DiscreteBandStructure discrete_band_structure(const PeriodicDifferenceOperator& op, int k_points,
                                              double flat_tol) {
    if (!op.is_self_adjoint())
        throw InvalidInput("discrete_band_structure: operator is not self-adjoint");
    if (k_points < 1) throw InvalidInput("discrete_band_structure: need at least one k point");
    const LaurentMatrix sym = floquet_symbol(op);

    DiscreteBandStructure out;
    Monomial idx(static_cast<size_t>(op.rank()), 0);
    while (true) {
        std::vector<double> k(static_cast<size_t>(op.rank()));
        for (int j = 0; j < op.rank(); ++j)
            k[static_cast<size_t>(j)] = 2.0 * M_PI * idx[static_cast<size_t>(j)] / k_points;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(sym.eval_k(k));
        std::vector<double> bands(es.eigenvalues().data(),
                                  es.eigenvalues().data() + es.eigenvalues().size());
        out.kgrid.push_back(std::move(k));
        out.bands.push_back(std::move(bands));
        size_t j = 0;
        for (; j < idx.size(); ++j) {
            if (++idx[j] < k_points) break;
            idx[j] = 0;
        }
        if (j == idx.size() && op.rank() > 0) break;
        if (op.rank() == 0) break;
    }

    const size_t nb = out.bands.empty() ? 0 : out.bands[0].size();
    for (size_t b = 0; b < nb; ++b) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const auto& per_k : out.bands) {
            lo = std::min(lo, per_k[b]);
            hi = std::max(hi, per_k[b]);
        }
        out.band_range.push_back({lo, hi});
        if (hi - lo < flat_tol * (1.0 + std::abs(lo))) out.flat_bands.push_back(static_cast<int>(b));
    }
    return out;
}

bool discrete_flat_band_test(const PeriodicDifferenceOperator& op, double lambda, double tol) {
    LaurentMatrix sym = floquet_symbol(op);
    for (int i = 0; i < sym.n; ++i)
        sym.at(i, i).add(Monomial(static_cast<size_t>(sym.rank), 0), -lambda);

    std::vector<int> samples(static_cast<size_t>(sym.rank));
    for (int j = 0; j < sym.rank; ++j) {
        const int spread = sym.max_deg[static_cast<size_t>(j)] - sym.min_deg[static_cast<size_t>(j)];
        samples[static_cast<size_t>(j)] = sym.n * spread + 1;
    }

    double worst = 0.0;
    double scale = 1.0;
    Monomial idx(static_cast<size_t>(sym.rank), 0);
    while (true) {
        std::vector<double> k(static_cast<size_t>(sym.rank));
        for (int j = 0; j < sym.rank; ++j)
            k[static_cast<size_t>(j)] =
                2.0 * M_PI * (idx[static_cast<size_t>(j)] + 0.37) / samples[static_cast<size_t>(j)];
        const Eigen::MatrixXcd m = sym.eval_k(k);
        worst = std::max(worst, std::abs(m.determinant()));
        double hadamard = 1.0;
        for (int r = 0; r < sym.n; ++r) hadamard *= m.row(r).norm();
        scale = std::max(scale, hadamard);
        size_t j = 0;
        for (; j < idx.size(); ++j) {
            if (++idx[j] < samples[j]) break;
            idx[j] = 0;
        }
        if (j == idx.size()) break;
    }
    return worst < tol * scale;
}

// --- polynomial kernel ----------------------------------------------------------

namespace {

struct KernelSystem {
    std::vector<Monomial> unknown_monomials;  // [0,d]^n
    std::vector<Monomial> output_monomials;   // [min, max+d]
    LaurentMatrix sym;                        // A(z) - lambda
};

KernelSystem kernel_system(const PeriodicDifferenceOperator& op, double lambda, int d) {
    KernelSystem ks;
    ks.sym = floquet_symbol(op);
    for (int i = 0; i < ks.sym.n; ++i)
        ks.sym.at(i, i).add(Monomial(static_cast<size_t>(ks.sym.rank), 0), -lambda);
    Monomial zero(static_cast<size_t>(ks.sym.rank), 0);
    Monomial dvec(static_cast<size_t>(ks.sym.rank), d);
    ks.unknown_monomials = box_monomials(zero, dvec);
    Monomial out_hi = ks.sym.max_deg;
    for (size_t j = 0; j < out_hi.size(); ++j) out_hi[j] += d;
    ks.output_monomials = box_monomials(ks.sym.min_deg, out_hi);
    return ks;
}

PolyKernelVector make_vector(const PeriodicDifferenceOperator& op, double lambda, int d,
                             const KernelSystem& ks, const Eigen::VectorXcd& x) {
    // phase/scale normalization: max |coeff| = 1, first significant
    // coefficient positive real
    double maxabs = 0.0;
    for (int i = 0; i < x.size(); ++i) maxabs = std::max(maxabs, std::abs(x[i]));
    std::complex<double> phase = 1.0;
    for (int i = 0; i < x.size(); ++i) {
        if (std::abs(x[i]) > 1e-8 * maxabs) {
            phase = std::conj(x[i]) / std::abs(x[i]);
            break;
        }
    }
    PolyKernelVector q;
    q.lambda = lambda;
    q.degree = d;
    q.rank = op.rank();
    q.components.resize(static_cast<size_t>(op.num_vertices()));
    const int nm = static_cast<int>(ks.unknown_monomials.size());
    for (int w = 0; w < op.num_vertices(); ++w) {
        for (int m = 0; m < nm; ++m) {
            const std::complex<double> c = x[w * nm + m] * phase / maxabs;
            if (std::abs(c) > 1e-14)
                q.components[static_cast<size_t>(w)].add(ks.unknown_monomials[static_cast<size_t>(m)], c);
        }
    }
    return q;
}

}  // namespace

std::vector<PolyKernelVector> compact_kernel_basis(const PeriodicDifferenceOperator& op,
                                                   double lambda, int d) {
    if (d < 0) throw InvalidInput("compact_kernel_solution: negative degree bound");
    const KernelSystem ks = kernel_system(op, lambda, d);
    const int nm = static_cast<int>(ks.unknown_monomials.size());
    const int cols = op.num_vertices() * nm;
    const int rows = op.num_vertices() * static_cast<int>(ks.output_monomials.size());

    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(rows, cols);
    for (int v = 0; v < op.num_vertices(); ++v) {
        for (size_t mu = 0; mu < ks.output_monomials.size(); ++mu) {
            const int row = v * static_cast<int>(ks.output_monomials.size()) + static_cast<int>(mu);
            for (int w = 0; w < op.num_vertices(); ++w) {
                const LaurentPoly& entry = ks.sym.at(v, w);
                if (entry.empty()) continue;
                for (int m = 0; m < nm; ++m) {
                    const std::complex<double> c =
                        entry.coeff(subtract(ks.output_monomials[mu], ks.unknown_monomials[static_cast<size_t>(m)]));
                    if (c != std::complex<double>(0.0)) A(row, w * nm + m) = c;
                }
            }
        }
    }

    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double smax = sv.size() > 0 ? sv[0] : 0.0;
    const double tol = 1e-10 * std::max(smax, 1.0);
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv[i] > tol) ++rank;

    std::vector<PolyKernelVector> out;
    for (int c = rank; c < cols; ++c)
        out.push_back(make_vector(op, lambda, d, ks, svd.matrixV().col(c)));
    return out;
}

std::optional<PolyKernelVector> compact_kernel_solution(const PeriodicDifferenceOperator& op,
                                                        double lambda, int d) {
    auto basis = compact_kernel_basis(op, lambda, d);
    if (basis.empty()) return std::nullopt;
    return basis.front();
}

double poly_kernel_residual(const PeriodicDifferenceOperator& op, double lambda,
                            const PolyKernelVector& q) {
    LaurentMatrix sym = floquet_symbol(op);
    for (int i = 0; i < sym.n; ++i)
        sym.at(i, i).add(Monomial(static_cast<size_t>(sym.rank), 0), -lambda);
    double worst = 0.0;
    for (int v = 0; v < sym.n; ++v) {
        std::map<Monomial, std::complex<double>> acc;
        for (int w = 0; w < sym.n; ++w) {
            for (const auto& [g, a] : sym.at(v, w).terms())
                for (const auto& [m, c] : q.components[static_cast<size_t>(w)].terms())
                    acc[add(g, m)] += a * c;
        }
        for (const auto& [m, c] : acc) worst = std::max(worst, std::abs(c));
    }
    return worst;
}

// --- supported functions ---------------------------------------------------------

std::complex<double> SupportedVertexFunction::value(int v, const Monomial& cell) const {
    for (const auto& [w, c, val] : entries)
        if (w == v && c == cell) return val;
    return 0.0;
}

SupportedVertexFunction inverse_floquet(const PolyKernelVector& q) {
    SupportedVertexFunction u;
    u.rank = q.rank;
    for (size_t w = 0; w < q.components.size(); ++w)
        for (const auto& [m, c] : q.components[w].terms())
            if (std::abs(c) > 0.0) u.entries.push_back({static_cast<int>(w), m, c});
    return u;
}

std::vector<LaurentPoly> floquet_transform(const SupportedVertexFunction& u, int num_vertices) {
    std::vector<LaurentPoly> out(static_cast<size_t>(num_vertices));
    for (const auto& [w, cell, val] : u.entries) out[static_cast<size_t>(w)].add(cell, val);
    return out;
}

SupportedVertexFunction apply_operator(const PeriodicDifferenceOperator& op,
                                       const SupportedVertexFunction& u) {
    std::map<std::pair<int, Monomial>, std::complex<double>> acc;
    for (const auto& h : op.hops()) {
        for (const auto& [w, cell, val] : u.entries) {
            if (w != h.to) continue;
            // (Au)(c.from) picks up u((c+shift).to): contributes at c = cell - shift
            acc[{h.from, subtract(cell, h.shift)}] += h.amplitude * val;
        }
    }
    SupportedVertexFunction out;
    out.rank = u.rank;
    for (const auto& [key, val] : acc)
        if (std::abs(val) > 0.0) out.entries.push_back({key.first, key.second, val});
    return out;
}

// --- rational mode -----------------------------------------------------------------

namespace {

long long checked_mul(long long a, long long b) {
    const __int128 p = static_cast<__int128>(a) * b;
    if (p > std::numeric_limits<long long>::max() || p < std::numeric_limits<long long>::min())
        throw SolverError("rational overflow");
    return static_cast<long long>(p);
}

long long checked_add(long long a, long long b) {
    const __int128 s = static_cast<__int128>(a) + b;
    if (s > std::numeric_limits<long long>::max() || s < std::numeric_limits<long long>::min())
        throw SolverError("rational overflow");
    return static_cast<long long>(s);
}

}  // namespace

Rational::Rational(long long n, long long d) : num(n), den(d) {
    if (den == 0) throw InvalidInput("rational with zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    const long long g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
}

Rational Rational::operator+(const Rational& o) const {
    return Rational(checked_add(checked_mul(num, o.den), checked_mul(o.num, den)),
                    checked_mul(den, o.den));
}
Rational Rational::operator-(const Rational& o) const {
    return Rational(checked_add(checked_mul(num, o.den), -checked_mul(o.num, den)),
                    checked_mul(den, o.den));
}
Rational Rational::operator*(const Rational& o) const {
    return Rational(checked_mul(num, o.num), checked_mul(den, o.den));
}
Rational Rational::operator/(const Rational& o) const {
    if (o.num == 0) throw InvalidInput("rational division by zero");
    return Rational(checked_mul(num, o.den), checked_mul(den, o.num));
}

std::optional<RationalKernelVector> compact_kernel_solution_exact(
    const PeriodicDifferenceOperator& op, const Rational& lambda, int d) {
    if (d < 0) throw InvalidInput("compact_kernel_solution_exact: negative degree bound");
    // integer amplitudes required for exactness
    for (const auto& h : op.hops()) {
        if (h.amplitude.imag() != 0.0 ||
            h.amplitude.real() != std::round(h.amplitude.real()))
            throw InvalidInput("exact mode requires integer amplitudes");
    }

    const int n = op.num_vertices();
    const int rank = op.rank();
    // rational symbol of A(z) - lambda
    std::vector<std::map<Monomial, Rational>> sym(static_cast<size_t>(n * n));
    Monomial lo(static_cast<size_t>(rank), 0), hi(static_cast<size_t>(rank), 0);
    for (const auto& h : op.hops()) {
        const Monomial m = negate(h.shift);
        auto& entry = sym[static_cast<size_t>(h.from * n + h.to)];
        const Rational a(static_cast<long long>(std::llround(h.amplitude.real())));
        auto [it, inserted] = entry.emplace(m, a);
        if (!inserted) it->second = it->second + a;
        for (int j = 0; j < rank; ++j) {
            lo[static_cast<size_t>(j)] = std::min(lo[static_cast<size_t>(j)], m[static_cast<size_t>(j)]);
            hi[static_cast<size_t>(j)] = std::max(hi[static_cast<size_t>(j)], m[static_cast<size_t>(j)]);
        }
    }
    const Monomial zero(static_cast<size_t>(rank), 0);
    for (int i = 0; i < n; ++i) {
        auto& entry = sym[static_cast<size_t>(i * n + i)];
        auto [it, inserted] = entry.emplace(zero, Rational(0) - lambda);
        if (!inserted) it->second = it->second - lambda;
    }

    const std::vector<Monomial> unknowns = box_monomials(zero, Monomial(static_cast<size_t>(rank), d));
    Monomial out_hi = hi;
    for (size_t j = 0; j < out_hi.size(); ++j) out_hi[j] += d;
    const std::vector<Monomial> outputs = box_monomials(lo, out_hi);

    const int nm = static_cast<int>(unknowns.size());
    const int cols = n * nm;
    std::vector<std::vector<Rational>> rows;
    for (int v = 0; v < n; ++v) {
        for (const Monomial& mu : outputs) {
            std::vector<Rational> row(static_cast<size_t>(cols));
            bool nonzero = false;
            for (int w = 0; w < n; ++w) {
                const auto& entry = sym[static_cast<size_t>(v * n + w)];
                for (int m = 0; m < nm; ++m) {
                    auto it = entry.find(subtract(mu, unknowns[static_cast<size_t>(m)]));
                    if (it != entry.end() && !it->second.is_zero()) {
                        row[static_cast<size_t>(w * nm + m)] = it->second;
                        nonzero = true;
                    }
                }
            }
            if (nonzero) rows.push_back(std::move(row));
        }
    }

    // exact Gaussian elimination to row echelon form
    std::vector<int> pivot_col_of_row;
    size_t r = 0;
    std::vector<char> is_pivot(static_cast<size_t>(cols), 0);
    for (int c = 0; c < cols && r < rows.size(); ++c) {
        size_t p = r;
        while (p < rows.size() && rows[p][static_cast<size_t>(c)].is_zero()) ++p;
        if (p == rows.size()) continue;
        std::swap(rows[r], rows[p]);
        const Rational inv = Rational(1) / rows[r][static_cast<size_t>(c)];
        for (int j = c; j < cols; ++j)
            rows[r][static_cast<size_t>(j)] = rows[r][static_cast<size_t>(j)] * inv;
        for (size_t i = 0; i < rows.size(); ++i) {
            if (i == r || rows[i][static_cast<size_t>(c)].is_zero()) continue;
            const Rational f = rows[i][static_cast<size_t>(c)];
            for (int j = c; j < cols; ++j)
                rows[i][static_cast<size_t>(j)] =
                    rows[i][static_cast<size_t>(j)] - f * rows[r][static_cast<size_t>(j)];
        }
        pivot_col_of_row.push_back(c);
        is_pivot[static_cast<size_t>(c)] = 1;
        ++r;
    }

    int free_col = -1;
    for (int c = 0; c < cols; ++c)
        if (!is_pivot[static_cast<size_t>(c)]) {
            free_col = c;
            break;
        }
    if (free_col < 0) return std::nullopt;

    // kernel vector with the free variable set to 1
    std::vector<Rational> x(static_cast<size_t>(cols));
    x[static_cast<size_t>(free_col)] = Rational(1);
    for (size_t i = 0; i < pivot_col_of_row.size(); ++i) {
        const int pc = pivot_col_of_row[i];
        x[static_cast<size_t>(pc)] = Rational(0) - rows[i][static_cast<size_t>(free_col)];
    }
    // normalize: first nonzero coefficient equals 1
    for (const Rational& c : x) {
        if (c.is_zero()) continue;
        const Rational inv = Rational(1) / c;
        for (Rational& y : x) y = y * inv;
        break;
    }

    RationalKernelVector q;
    q.lambda = lambda;
    q.degree = d;
    q.rank = rank;
    q.components.resize(static_cast<size_t>(n));
    for (int w = 0; w < n; ++w)
        for (int m = 0; m < nm; ++m) {
            const Rational& c = x[static_cast<size_t>(w * nm + m)];
            if (!c.is_zero()) q.components[static_cast<size_t>(w)][unknowns[static_cast<size_t>(m)]] = c;
        }
    return q;
}

RationalVertexFunction inverse_floquet_exact(const RationalKernelVector& q) {
    RationalVertexFunction u;
    for (size_t w = 0; w < q.components.size(); ++w)
        for (const auto& [m, c] : q.components[w])
            if (!c.is_zero()) u[{static_cast<int>(w), m}] = c;
    return u;
}

RationalVertexFunction apply_minus_lambda_exact(const PeriodicDifferenceOperator& op,
                                                const Rational& lambda,
                                                const RationalVertexFunction& u) {
    RationalVertexFunction acc;
    for (const auto& h : op.hops()) {
        if (h.amplitude.imag() != 0.0 ||
            h.amplitude.real() != std::round(h.amplitude.real()))
            throw InvalidInput("exact mode requires integer amplitudes");
        const Rational a(static_cast<long long>(std::llround(h.amplitude.real())));
        for (const auto& [key, val] : u) {
            if (key.first != h.to) continue;
            const auto out_key = std::make_pair(h.from, subtract(key.second, h.shift));
            auto [it, inserted] = acc.emplace(out_key, a * val);
            if (!inserted) it->second = it->second + a * val;
        }
    }
    for (const auto& [key, val] : u) {
        auto [it, inserted] = acc.emplace(key, Rational(0) - lambda * val);
        if (!inserted) it->second = it->second - lambda * val;
    }
    // drop exact zeros
    RationalVertexFunction out;
    for (const auto& [key, val] : acc)
        if (!val.is_zero()) out[key] = val;
    return out;
}

}  // namespace qgs
