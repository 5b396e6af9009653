#ifndef QGS_FLOQUET_DISCRETE_HPP
#define QGS_FLOQUET_DISCRETE_HPP

#include <Eigen/Dense>
#include <complex>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace qgs {

using Monomial = std::vector<int>;  // exponent vector in z_1..z_n

// A Z^n-periodic finite-order difference operator on the vertex set of a
// periodic combinatorial graph: hop (v, w, g, a) means the coefficient of
// u(g.w) in (Au)(v) is a, repeated over all translates.
class PeriodicDifferenceOperator {
  public:
    struct Hop {
        int from = 0;
        int to = 0;
        Monomial shift;
        std::complex<double> amplitude;
    };

    PeriodicDifferenceOperator(int rank, std::vector<std::string> vertex_names,
                               std::vector<Hop> hops);

    int rank() const { return rank_; }
    int num_vertices() const { return static_cast<int>(vertex_names_.size()); }
    const std::vector<std::string>& vertex_names() const { return vertex_names_; }
    const std::vector<Hop>& hops() const { return hops_; }

    // amplitude(v,w,g) == conj(amplitude(w,v,-g)) for all hops
    bool is_self_adjoint(double tol = 1e-12) const;

  private:
    int rank_;
    std::vector<std::string> vertex_names_;
    std::vector<Hop> hops_;  // merged: unique (from,to,shift)
};

// Laurent polynomial with complex coefficients, stored sparsely.
class LaurentPoly {
  public:
    void add(const Monomial& m, std::complex<double> c);
    std::complex<double> coeff(const Monomial& m) const;
    const std::map<Monomial, std::complex<double>>& terms() const { return terms_; }
    std::complex<double> eval_k(const std::vector<double>& k) const;  // z = e^{ik}
    bool empty() const { return terms_.empty(); }

  private:
    std::map<Monomial, std::complex<double>> terms_;
};

// |W| x |W| matrix of Laurent polynomials: the Floquet symbol A(z).
struct LaurentMatrix {
    int rank = 0;
    int n = 0;
    std::vector<LaurentPoly> entries;  // row-major
    Monomial min_deg, max_deg;         // exponent box over all entries

    const LaurentPoly& at(int i, int j) const { return entries[static_cast<size_t>(i * n + j)]; }
    LaurentPoly& at(int i, int j) { return entries[static_cast<size_t>(i * n + j)]; }
    Eigen::MatrixXcd eval_k(const std::vector<double>& k) const;
};

// Under the Floquet transform u -> sum_g u(g.v) z^g, the operator becomes
// multiplication by A(z)[v,w] = sum_h amplitude(v,w,h) z^{-h}.
LaurentMatrix floquet_symbol(const PeriodicDifferenceOperator& op);

// Band structure of a self-adjoint operator: eigenvalues of A(e^{ik}) per k.
struct DiscreteBandStructure {
    std::vector<std::vector<double>> kgrid;
    std::vector<std::vector<double>> bands;      // [k index] -> sorted eigenvalues
    std::vector<std::pair<double, double>> band_range;  // per band: [min, max] over k
    std::vector<int> flat_bands;                 // band indices with zero width
};
DiscreteBandStructure discrete_band_structure(const PeriodicDifferenceOperator& op, int k_points,
                                              double flat_tol = 1e-9);

// True iff det(A(z) - lambda) vanishes identically on the torus, tested by
// sampling |W|*(M_j - m_j) + 1 points per dimension (the determinant's
// Laurent degree bound). Works for non-self-adjoint operators.
bool discrete_flat_band_test(const PeriodicDifferenceOperator& op, double lambda,
                             double tol = 1e-10);

// Polynomial solution of (A(z) - lambda) Q(z) = 0 with exponents in [0,d]^n.
struct PolyKernelVector {
    double lambda = 0.0;
    int degree = 0;
    int rank = 0;
    std::vector<LaurentPoly> components;  // size |W|
};

// First kernel basis vector of the exact coefficient system, or nullopt if
// the system has full rank at tolerance 1e-10 * scale (increase d and retry
// in that case). Normalized to max |coefficient| = 1 with the first nonzero
// coefficient positive real.
std::optional<PolyKernelVector> compact_kernel_solution(const PeriodicDifferenceOperator& op,
                                                        double lambda, int degree_bound);
// All kernel basis vectors at this degree (generators up to degree d).
std::vector<PolyKernelVector> compact_kernel_basis(const PeriodicDifferenceOperator& op,
                                                   double lambda, int degree_bound);

// Max |coefficient| of (A(z) - lambda) Q(z): the exact polynomial identity
// residual (zero for a true kernel vector).
double poly_kernel_residual(const PeriodicDifferenceOperator& op, double lambda,
                            const PolyKernelVector& q);

// Finitely supported vertex function on the unfolded graph.
struct SupportedVertexFunction {
    int rank = 0;
    // (vertex index, cell, value), sparse
    std::vector<std::tuple<int, Monomial, std::complex<double>>> entries;

    std::complex<double> value(int v, const Monomial& cell) const;
};

// Coefficient of z^g in component w becomes the value at g.w.
SupportedVertexFunction inverse_floquet(const PolyKernelVector& q);
// Forward transform of a supported function (round-trip inverse).
std::vector<LaurentPoly> floquet_transform(const SupportedVertexFunction& u, int num_vertices);
// (A u) as a supported function; follows hops out of the support.
SupportedVertexFunction apply_operator(const PeriodicDifferenceOperator& op,
                                       const SupportedVertexFunction& u);

// --- exact rational mode -----------------------------------------------------

// Small exact rational type for integer-amplitude operators; throws on
// overflow rather than losing exactness.
struct Rational {
    long long num = 0;
    long long den = 1;

    Rational() = default;
    Rational(long long n) : num(n), den(1) {}
    Rational(long long n, long long d);

    Rational operator+(const Rational& o) const;
    Rational operator-(const Rational& o) const;
    Rational operator*(const Rational& o) const;
    Rational operator/(const Rational& o) const;
    bool operator==(const Rational& o) const { return num == o.num && den == o.den; }
    bool is_zero() const { return num == 0; }
    double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
};

struct RationalKernelVector {
    Rational lambda;
    int degree = 0;
    int rank = 0;
    std::vector<std::map<Monomial, Rational>> components;
};

using RationalVertexFunction = std::map<std::pair<int, Monomial>, Rational>;

// Exact kernel search for operators with (small) integer amplitudes.
// Exact Gaussian elimination over Q; a returned vector is a certificate.
std::optional<RationalKernelVector> compact_kernel_solution_exact(
    const PeriodicDifferenceOperator& op, const Rational& lambda, int degree_bound);

RationalVertexFunction inverse_floquet_exact(const RationalKernelVector& q);

// (A - lambda) u computed exactly; an all-zero result proves Au = lambda u.
RationalVertexFunction apply_minus_lambda_exact(const PeriodicDifferenceOperator& op,
                                                const Rational& lambda,
                                                const RationalVertexFunction& u);

}  // namespace qgs

#endif  // QGS_FLOQUET_DISCRETE_HPP
