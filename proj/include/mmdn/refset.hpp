#pragma once

#include <cstdint>

#include "mmdn/types.hpp"

namespace mmdn {

struct ReferenceSetConfig {
    double delta = 0.08;           // utopian shift magnitude
    std::size_t target_size = 0;   // mu
    double dbscan_eps = 0.0;       // <= 0 picks 3 x median nearest-neighbor distance
    std::size_t dbscan_min_pts = 3;
    std::size_t fill_multiplier = 10;  // fill to fill_multiplier * mu points before reduction
    std::size_t kmeans_iters = 50;
    std::uint64_t seed = 1;
};

struct ReferenceSetResult {
    PointSet points;
    bool degenerate = false;  // k-means padding or shift-direction fallback kicked in
};

namespace refset {

// DBSCAN clustering with noise points attached to their nearest cluster.
std::vector<std::vector<std::size_t>> detect_components(const PointSet& y,
                                                        const ReferenceSetConfig& cfg);

// Densify one component to `count` points. k = 2 places points uniformly by
// arc length along the chain of f1-sorted points; k >= 3 Delaunay-triangulates
// the component projected on its principal plane and fills triangles with
// area-proportional uniform samples (barycentric, in the original space).
PointSet fill_component(const PointSet& points, std::size_t count, std::uint64_t seed);

struct ReduceResult {
    PointSet centroids;
    bool padded = false;  // fewer distinct inputs than mu
};

// k-means++ initialization plus Lloyd iterations; deterministic per seed.
ReduceResult reduce_kmeans(const PointSet& points, std::size_t mu, std::size_t iters,
                           std::uint64_t seed);

// Unit shift direction from the QR factorization of the extreme-point matrix
// M = (m^2 - m^1, ..., m^k - m^1). Throws DegenerateGeometryError when the
// extremes are affinely dependent.
Vec shift_direction(const PointSet& y);

// Full pipeline: per-component fill, global k-means reduction to mu, then
// r^i = y^i + delta * eta.
ReferenceSetResult generate_reference_set(const PointSet& y0, const ReferenceSetConfig& cfg);

}  // namespace refset
}  // namespace mmdn
