#include "qgs/dirichlet.hpp"

#include <algorithm>
#include <cmath>

#include "qgs/edge_basis.hpp"
#include "qgs/errors.hpp"

namespace qgs {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

bool DirichletSpectrum::near(double lambda) const {
    for (const Entry& e : entries)
        if (std::abs(e.lambda - lambda) < delta_d) return true;
    return false;
}

std::vector<double> DirichletSpectrum::values() const {
    std::vector<double> v;
    v.reserve(entries.size());
    for (const Entry& e : entries) v.push_back(e.lambda);
    return v;
}

DirichletSpectrum dirichlet_spectrum(const MetricGraph& g, double lambda_max, double delta_d) {
    if (!(lambda_max > 0.0)) throw InvalidInput("dirichlet_spectrum: lambda_max must be positive");
    std::vector<std::pair<double, std::pair<int, int>>> raw;
    for (int e = 0; e < g.num_edges(); ++e) {
        const double l = g.edge(e).length;
        for (int n = 1;; ++n) {
            const double mu = kPi * kPi * n * n / (l * l);
            if (mu > lambda_max) break;
            raw.push_back({mu, {e, n}});
        }
    }
    std::sort(raw.begin(), raw.end());
    DirichletSpectrum out;
    out.delta_d = delta_d;
    for (const auto& [mu, src] : raw) {
        // merge commensurate values (relative tolerance)
        if (!out.entries.empty() &&
            std::abs(out.entries.back().lambda - mu) < 1e-9 * (1.0 + std::abs(mu))) {
            out.entries.back().sources.push_back(src);
        } else {
            out.entries.push_back({mu, {src}});
        }
    }
    return out;
}

double dirichlet_distance(const MetricGraph& g, double lambda) {
    double best = std::numeric_limits<double>::infinity();
    for (int e = 0; e < g.num_edges(); ++e)
        best = std::min(best, dirichlet_distance(lambda, g.edge(e).length));
    return best;
}

}  // namespace qgs
