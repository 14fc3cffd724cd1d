#include "mmdn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mmdn::metrics {
namespace {

double point_dist(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

}  // namespace

double gd_p(const PointSet& approx, const PointSet& front, double p) {
    if (approx.size() == 0 || front.size() == 0)
        throw ContractViolation("gd_p: empty point set");
    if (!(p >= 1.0)) throw ContractViolation("gd_p: p must be >= 1");
    approx.require_uniform_dim();
    front.require_uniform_dim();
    if (approx.dim() != front.dim()) throw ContractViolation("gd_p: dimension mismatch");

    // summed in sorted order so the value is exactly permutation-invariant
    Vec terms;
    terms.reserve(approx.size());
    for (const auto& a : approx.points) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& f : front.points) best = std::min(best, point_dist(a, f));
        terms.push_back(std::pow(best, p));
    }
    std::sort(terms.begin(), terms.end());
    double acc = 0.0;
    for (double t : terms) acc += t;
    return std::pow(acc / static_cast<double>(approx.size()), 1.0 / p);
}

double igd_p(const PointSet& approx, const PointSet& front, double p) {
    return gd_p(front, approx, p);
}

double delta_p(const PointSet& approx, const PointSet& front, double p) {
    return std::max(gd_p(approx, front, p), igd_p(approx, front, p));
}

double equivalent_evals(const BudgetLedger& ledger) {
    return static_cast<double>(ledger.plain_evals) +
           ledger.jac_cost * static_cast<double>(ledger.jacobian_calls) +
           ledger.hess_cost * static_cast<double>(ledger.hessian_calls);
}

}  // namespace mmdn::metrics
