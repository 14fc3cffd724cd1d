#pragma once

#include <cstddef>

#include "mmdn/errors.hpp"
#include "mmdn/linalg.hpp"

namespace mmdn {

// Ordered set of points in objective space (an approximation set Y or a
// reference set R).
struct PointSet {
    std::vector<Vec> points;

    PointSet() = default;
    explicit PointSet(std::vector<Vec> pts) : points(std::move(pts)) {}

    std::size_t size() const { return points.size(); }
    std::size_t dim() const { return points.empty() ? 0 : points.front().size(); }

    void require_uniform_dim() const {
        for (const auto& p : points)
            if (p.size() != dim()) throw ContractViolation("PointSet: mixed point dimensions");
    }
};

// A set of mu decision vectors flattened into one point of R^{mu*n};
// point i occupies entries [i*n, (i+1)*n).
struct StackedDecision {
    std::size_t mu = 0;
    std::size_t n = 0;
    Vec data;

    StackedDecision() = default;
    StackedDecision(std::size_t mu_, std::size_t n_, Vec d) : mu(mu_), n(n_), data(std::move(d)) {
        if (data.size() != mu * n)
            throw ContractViolation("StackedDecision: data length must be mu*n");
    }

    Vec point(std::size_t i) const {
        return Vec(data.begin() + static_cast<long>(i * n),
                   data.begin() + static_cast<long>((i + 1) * n));
    }

    void set_point(std::size_t i, const Vec& x) {
        for (std::size_t j = 0; j < n; ++j) data[i * n + j] = x[j];
    }
};

// y1 strictly Pareto-dominates y2: componentwise <= and not equal.
inline bool dominates(const Vec& y1, const Vec& y2) {
    bool some_strict = false;
    for (std::size_t i = 0; i < y1.size(); ++i) {
        if (y1[i] > y2[i]) return false;
        if (y1[i] < y2[i]) some_strict = true;
    }
    return some_strict;
}

}  // namespace mmdn
