#include "mmdn/refset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mmdn/rng.hpp"
#include "mmdn/tolerances.hpp"

namespace mmdn::refset {
namespace {

double dist(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<std::size_t> proportional_split(std::size_t count, const std::vector<double>& w) {
    double total = 0.0;
    for (double x : w) total += x;
    std::vector<std::size_t> out(w.size(), 0);
    std::vector<std::pair<double, std::size_t>> rem;
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double exact = static_cast<double>(count) * w[i] / total;
        out[i] = static_cast<std::size_t>(std::floor(exact));
        assigned += out[i];
        rem.emplace_back(exact - std::floor(exact), i);
    }
    std::sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (std::size_t r = 0; assigned < count; ++r, ++assigned) out[rem[r % rem.size()].second]++;
    return out;
}

// ---- Delaunay triangulation (Bowyer-Watson, 2-D) --------------------------

struct Tri {
    std::size_t a, b, c;
};

struct P2 {
    double x, y;
};

bool in_circumcircle(const P2& a, const P2& b, const P2& c, const P2& p) {
    const double ax = a.x - p.x, ay = a.y - p.y;
    const double bx = b.x - p.x, by = b.y - p.y;
    const double cx = c.x - p.x, cy = c.y - p.y;
    const double det = (ax * ax + ay * ay) * (bx * cy - cx * by) -
                       (bx * bx + by * by) * (ax * cy - cx * ay) +
                       (cx * cx + cy * cy) * (ax * by - bx * ay);
    const double orient = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
    return orient >= 0.0 ? det > 0.0 : det < 0.0;
}

std::vector<Tri> delaunay(const std::vector<P2>& pts) {
    double minx = pts[0].x, maxx = pts[0].x, miny = pts[0].y, maxy = pts[0].y;
    for (const auto& p : pts) {
        minx = std::min(minx, p.x);
        maxx = std::max(maxx, p.x);
        miny = std::min(miny, p.y);
        maxy = std::max(maxy, p.y);
    }
    const double dx = maxx - minx, dy = maxy - miny;
    const double dmax = std::max({dx, dy, 1e-9});
    const double midx = 0.5 * (minx + maxx), midy = 0.5 * (miny + maxy);

    std::vector<P2> v = pts;
    const std::size_t s0 = v.size(), s1 = s0 + 1, s2 = s0 + 2;
    v.push_back({midx - 20.0 * dmax, midy - dmax});
    v.push_back({midx, midy + 20.0 * dmax});
    v.push_back({midx + 20.0 * dmax, midy - dmax});

    std::vector<Tri> tris = {{s0, s1, s2}};
    for (std::size_t ip = 0; ip < pts.size(); ++ip) {
        std::vector<Tri> bad, keep;
        for (const auto& t : tris) {
            if (in_circumcircle(v[t.a], v[t.b], v[t.c], v[ip]))
                bad.push_back(t);
            else
                keep.push_back(t);
        }
        // boundary of the cavity: edges not shared by two bad triangles
        std::vector<std::pair<std::size_t, std::size_t>> edges;
        auto add_edge = [&edges](std::size_t a, std::size_t b) {
            const auto e = std::minmax(a, b);
            for (auto it = edges.begin(); it != edges.end(); ++it) {
                if (*it == std::pair<std::size_t, std::size_t>(e.first, e.second)) {
                    edges.erase(it);
                    return;
                }
            }
            edges.emplace_back(e.first, e.second);
        };
        for (const auto& t : bad) {
            add_edge(t.a, t.b);
            add_edge(t.b, t.c);
            add_edge(t.c, t.a);
        }
        tris = std::move(keep);
        for (const auto& e : edges) tris.push_back({e.first, e.second, ip});
    }
    std::vector<Tri> out;
    for (const auto& t : tris)
        if (t.a < s0 && t.b < s0 && t.c < s0) out.push_back(t);
    return out;
}

double tri_area(const P2& a, const P2& b, const P2& c) {
    return 0.5 * std::fabs((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

// Project a component onto its top-2 principal directions; empty result marks
// degenerate (collinear) geometry.
std::vector<P2> principal_plane_projection(const PointSet& pts) {
    const std::size_t n = pts.size(), k = pts.dim();
    Vec mean(k, 0.0);
    for (const auto& p : pts.points)
        for (std::size_t d = 0; d < k; ++d) mean[d] += p[d] / static_cast<double>(n);
    Matrix cov(k, k);
    for (const auto& p : pts.points)
        for (std::size_t a = 0; a < k; ++a)
            for (std::size_t b = 0; b < k; ++b)
                cov(a, b) += (p[a] - mean[a]) * (p[b] - mean[b]) / static_cast<double>(n);
    const auto eig = linalg::sym_eigenvalues(cov);
    const double l1 = eig.eigenvalues[k - 1], l2 = eig.eigenvalues[k - 2];
    if (l2 <= 1e-12 * std::max(l1, 1e-300)) return {};
    std::vector<P2> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        double u = 0.0, w = 0.0;
        for (std::size_t d = 0; d < k; ++d) {
            u += (pts.points[i][d] - mean[d]) * eig.eigenvectors(d, k - 1);
            w += (pts.points[i][d] - mean[d]) * eig.eigenvectors(d, k - 2);
        }
        out[i] = {u, w};
    }
    return out;
}

// Chain fill: `count` points uniformly spaced by arc length along the
// piecewise-linear curve through the points sorted by first objective.
PointSet chain_fill(const PointSet& points, std::size_t count) {
    const std::size_t n = points.size(), k = points.dim();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (points.points[a][0] != points.points[b][0])
            return points.points[a][0] < points.points[b][0];
        return a < b;
    });

    Vec cumulative(n, 0.0);
    for (std::size_t i = 1; i < n; ++i)
        cumulative[i] = cumulative[i - 1] + dist(points.points[order[i - 1]], points.points[order[i]]);
    const double total = cumulative[n - 1];

    PointSet out;
    out.points.reserve(count);
    if (total == 0.0) {
        out.points.assign(count, points.points[order[0]]);
        return out;
    }
    std::size_t seg = 0;
    for (std::size_t i = 0; i < count; ++i) {
        const double target =
            total * static_cast<double>(i) / static_cast<double>(count - 1);
        while (seg + 2 < n && cumulative[seg + 1] < target) ++seg;
        const double lo = cumulative[seg], hi = cumulative[seg + 1];
        const double t = hi > lo ? (target - lo) / (hi - lo) : 0.0;
        const Vec& a = points.points[order[seg]];
        const Vec& b = points.points[order[seg + 1]];
        Vec p(k);
        for (std::size_t d = 0; d < k; ++d) p[d] = a[d] + t * (b[d] - a[d]);
        out.points.push_back(std::move(p));
    }
    return out;
}

double component_fill_area(const PointSet& pts) {
    if (pts.size() < 3 || pts.dim() < 3) return 0.0;
    const auto proj = principal_plane_projection(pts);
    if (proj.empty()) return 0.0;
    double area = 0.0;
    for (const auto& t : delaunay(proj)) area += tri_area(proj[t.a], proj[t.b], proj[t.c]);
    return area;
}

}  // namespace

std::vector<std::vector<std::size_t>> detect_components(const PointSet& y,
                                                        const ReferenceSetConfig& cfg) {
    y.require_uniform_dim();
    const std::size_t n = y.size();
    if (n == 0) throw ContractViolation("detect_components: empty set");
    if (n < cfg.dbscan_min_pts) {
        std::vector<std::size_t> all(n);
        std::iota(all.begin(), all.end(), 0);
        return {all};
    }

    double eps = cfg.dbscan_eps;
    if (eps <= 0.0) {
        std::vector<double> nn(n, std::numeric_limits<double>::infinity());
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j) nn[i] = std::min(nn[i], dist(y.points[i], y.points[j]));
        eps = 3.0 * median(nn);
    }

    std::vector<std::vector<std::size_t>> neigh(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (dist(y.points[i], y.points[j]) <= eps) neigh[i].push_back(j);

    constexpr int kUnvisited = -2, kNoise = -1;
    std::vector<int> label(n, kUnvisited);
    int next_cluster = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (label[i] != kUnvisited) continue;
        if (neigh[i].size() < cfg.dbscan_min_pts) {
            label[i] = kNoise;
            continue;
        }
        const int cid = next_cluster++;
        label[i] = cid;
        std::vector<std::size_t> stack = neigh[i];
        while (!stack.empty()) {
            const std::size_t q = stack.back();
            stack.pop_back();
            if (label[q] == kNoise) label[q] = cid;
            if (label[q] != kUnvisited) continue;
            label[q] = cid;
            if (neigh[q].size() >= cfg.dbscan_min_pts)
                stack.insert(stack.end(), neigh[q].begin(), neigh[q].end());
        }
    }

    if (next_cluster == 0) {
        std::vector<std::size_t> all(n);
        std::iota(all.begin(), all.end(), 0);
        return {all};
    }

    // attach noise to the nearest clustered point
    for (std::size_t i = 0; i < n; ++i) {
        if (label[i] != kNoise) continue;
        double best = std::numeric_limits<double>::infinity();
        int best_label = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (label[j] < 0) continue;
            const double d = dist(y.points[i], y.points[j]);
            if (d < best) {
                best = d;
                best_label = label[j];
            }
        }
        label[i] = best_label;
    }

    std::vector<std::vector<std::size_t>> clusters(next_cluster);
    for (std::size_t i = 0; i < n; ++i) clusters[static_cast<std::size_t>(label[i])].push_back(i);
    return clusters;
}

PointSet fill_component(const PointSet& points, std::size_t count, std::uint64_t seed) {
    points.require_uniform_dim();
    if (points.size() < 2) throw ContractViolation("fill_component: need at least two points");
    if (count < 2) throw ContractViolation("fill_component: count must be >= 2");
    const std::size_t k = points.dim();

    if (k >= 3 && points.size() >= 3) {
        const auto proj = principal_plane_projection(points);
        if (!proj.empty()) {
            const auto tris = delaunay(proj);
            std::vector<double> areas;
            double total = 0.0;
            for (const auto& t : tris) {
                const double a = tri_area(proj[t.a], proj[t.b], proj[t.c]);
                areas.push_back(a);
                total += a;
            }
            if (total > 1e-14) {
                const auto counts = proportional_split(count, areas);
                SplitMix64 rng(seed);
                PointSet out;
                out.points.reserve(count);
                for (std::size_t ti = 0; ti < tris.size(); ++ti) {
                    const Vec& pa = points.points[tris[ti].a];
                    const Vec& pb = points.points[tris[ti].b];
                    const Vec& pc = points.points[tris[ti].c];
                    for (std::size_t s = 0; s < counts[ti]; ++s) {
                        const double su = std::sqrt(rng.uniform());
                        const double v = rng.uniform();
                        Vec p(k);
                        for (std::size_t d = 0; d < k; ++d)
                            p[d] = (1.0 - su) * pa[d] + su * (1.0 - v) * pb[d] + su * v * pc[d];
                        out.points.push_back(std::move(p));
                    }
                }
                return out;
            }
        }
        // collinear geometry falls through to the chain method
    }
    return chain_fill(points, count);
}

ReduceResult reduce_kmeans(const PointSet& points, std::size_t mu, std::size_t iters,
                           std::uint64_t seed) {
    points.require_uniform_dim();
    if (points.size() < mu) throw ContractViolation("reduce_kmeans: fewer points than mu");
    const std::size_t n = points.size(), k = points.dim();

    // distinct points, first occurrence order
    std::vector<std::size_t> distinct;
    for (std::size_t i = 0; i < n; ++i) {
        bool seen = false;
        for (std::size_t j : distinct)
            if (points.points[j] == points.points[i]) {
                seen = true;
                break;
            }
        if (!seen) distinct.push_back(i);
    }
    ReduceResult res;
    if (distinct.size() < mu) {
        res.padded = true;
        for (std::size_t i = 0; i < mu; ++i)
            res.centroids.points.push_back(points.points[distinct[i % distinct.size()]]);
        return res;
    }

    // k-means++ seeding
    SplitMix64 rng(seed);
    std::vector<Vec> centroids;
    centroids.push_back(points.points[rng.below(n)]);
    Vec d2(n);
    while (centroids.size() < mu) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& c : centroids) best = std::min(best, dist(points.points[i], c));
            d2[i] = best * best;
            total += d2[i];
        }
        if (total == 0.0) break;
        double pick = rng.uniform() * total;
        std::size_t chosen = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
            pick -= d2[i];
            if (pick <= 0.0) {
                chosen = i;
                break;
            }
        }
        centroids.push_back(points.points[chosen]);
    }
    while (centroids.size() < mu) centroids.push_back(points.points[rng.below(n)]);

    // Lloyd iterations
    std::vector<std::size_t> assign(n, 0);
    for (std::size_t it = 0; it < iters; ++it) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            std::size_t arg = 0;
            for (std::size_t c = 0; c < mu; ++c) {
                const double d = dist(points.points[i], centroids[c]);
                if (d < best) {
                    best = d;
                    arg = c;
                }
            }
            if (assign[i] != arg) {
                assign[i] = arg;
                changed = true;
            }
        }
        std::vector<Vec> sums(mu, Vec(k, 0.0));
        std::vector<std::size_t> cnt(mu, 0);
        for (std::size_t i = 0; i < n; ++i) {
            cnt[assign[i]]++;
            for (std::size_t d = 0; d < k; ++d) sums[assign[i]][d] += points.points[i][d];
        }
        for (std::size_t c = 0; c < mu; ++c) {
            if (cnt[c] == 0) {
                // adopt the point farthest from its assigned centroid
                double worst = -1.0;
                std::size_t wi = 0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double d = dist(points.points[i], centroids[assign[i]]);
                    if (d > worst) {
                        worst = d;
                        wi = i;
                    }
                }
                centroids[c] = points.points[wi];
                assign[wi] = c;
                changed = true;
                continue;
            }
            for (std::size_t d = 0; d < k; ++d)
                centroids[c][d] = sums[c][d] / static_cast<double>(cnt[c]);
        }
        if (!changed && it > 0) break;
    }
    res.centroids.points = std::move(centroids);
    return res;
}

Vec shift_direction(const PointSet& y) {
    y.require_uniform_dim();
    const std::size_t k = y.dim();
    if (y.size() < 2 || k < 2) throw ContractViolation("shift_direction: need >= 2 points in R^k");

    // m^i: point attaining the minimum of objective i (lowest index on ties)
    std::vector<std::size_t> extreme(k, 0);
    for (std::size_t d = 0; d < k; ++d)
        for (std::size_t i = 1; i < y.size(); ++i)
            if (y.points[i][d] < y.points[extreme[d]][d]) extreme[d] = i;

    Matrix m(k, k - 1);
    for (std::size_t c = 0; c + 1 < k; ++c)
        for (std::size_t d = 0; d < k; ++d)
            m(d, c) = y.points[extreme[c + 1]][d] - y.points[extreme[0]][d];

    const auto f = linalg::qr(m);
    double scale = linalg::max_abs(m);
    for (std::size_t c = 0; c + 1 < k; ++c)
        if (std::fabs(f.r(c, c)) <= tol::kDegenerateQr * std::max(scale, 1.0))
            throw DegenerateGeometryError("shift_direction: extreme points affinely dependent");

    Vec eta(k);
    for (std::size_t d = 0; d < k; ++d) eta[d] = f.q(d, k - 1);
    const double sign = eta[0] >= 0.0 ? 1.0 : -1.0;
    const double nrm = linalg::norm2(eta);
    for (double& v : eta) v *= -sign / nrm;
    return eta;
}

ReferenceSetResult generate_reference_set(const PointSet& y0, const ReferenceSetConfig& cfg) {
    y0.require_uniform_dim();
    if (y0.size() < 2) throw ContractViolation("generate_reference_set: need >= 2 points");
    if (cfg.target_size < 2) throw ContractViolation("generate_reference_set: target size >= 2");
    const std::size_t k = y0.dim();

    const auto clusters = detect_components(y0, cfg);
    std::vector<PointSet> comps;
    for (const auto& idx : clusters) {
        PointSet c;
        for (std::size_t i : idx) c.points.push_back(y0.points[i]);
        comps.push_back(std::move(c));
    }

    // component weights: size (k=2) or triangulated area (k>=3, with size
    // fallback when every component is degenerate)
    std::vector<double> weights;
    for (const auto& c : comps) weights.push_back(static_cast<double>(c.size()));
    if (k >= 3) {
        std::vector<double> areas;
        double total = 0.0;
        for (const auto& c : comps) {
            areas.push_back(component_fill_area(c));
            total += areas.back();
        }
        if (total > 0.0) weights = std::move(areas);
    }

    const std::size_t fill_total = std::max(cfg.fill_multiplier * cfg.target_size,
                                            cfg.target_size);
    auto counts = proportional_split(fill_total, weights);
    PointSet filled;
    for (std::size_t ci = 0; ci < comps.size(); ++ci) {
        std::size_t want = std::max<std::size_t>(counts[ci], 2);
        if (comps[ci].size() < 2) {
            for (std::size_t s = 0; s < want; ++s) filled.points.push_back(comps[ci].points[0]);
            continue;
        }
        const PointSet part = fill_component(comps[ci], want, cfg.seed + 0x9e37 * ci);
        filled.points.insert(filled.points.end(), part.points.begin(), part.points.end());
    }

    auto reduced = reduce_kmeans(filled, cfg.target_size, cfg.kmeans_iters, cfg.seed);
    ReferenceSetResult out;
    out.points = std::move(reduced.centroids);
    out.degenerate = reduced.padded;

    if (cfg.delta > 0.0) {
        Vec eta;
        try {
            eta = shift_direction(y0);
        } catch (const DegenerateGeometryError&) {
            eta.assign(k, -1.0 / std::sqrt(static_cast<double>(k)));
            out.degenerate = true;
        }
        for (auto& p : out.points.points)
            for (std::size_t d = 0; d < k; ++d) p[d] += cfg.delta * eta[d];
    }
    return out;
}

}  // namespace mmdn::refset
