#include "mmdn/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mmdn {

using std::numbers::pi;

Vec ProblemDef::clip(const Vec& x) const {
    Vec y = x;
    for (std::size_t j = 0; j < n; ++j) y[j] = std::clamp(y[j], lower[j], upper[j]);
    return y;
}

bool ProblemDef::inside_box(const Vec& x, double margin) const {
    for (std::size_t j = 0; j < n; ++j)
        if (x[j] < lower[j] + margin || x[j] > upper[j] - margin) return false;
    return true;
}

namespace problems {
namespace {

constexpr double kSingularFloor = 1e-12;  // keeps sqrt/power terms finite on box faces

// deterministic low-discrepancy sequence used by the 2-D front samplers
double halton(std::size_t index, std::size_t base) {
    double f = 1.0, r = 0.0;
    std::size_t i = index;
    while (i > 0) {
        f /= static_cast<double>(base);
        r += f * static_cast<double>(i % base);
        i /= base;
    }
    return r;
}

double bisect(const std::function<double(double)>& fn, double lo, double hi) {
    double flo = fn(lo);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = fn(mid);
        if ((flo <= 0.0) == (fm <= 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

struct Interval {
    double lo, hi;
    double length() const { return hi - lo; }
};

// Split `count` into parts proportional to `weights` (largest remainder).
std::vector<std::size_t> proportional_split(std::size_t count, const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    std::vector<std::size_t> out(weights.size(), 0);
    std::vector<std::pair<double, std::size_t>> rema;
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const double exact = static_cast<double>(count) * weights[i] / total;
        out[i] = static_cast<std::size_t>(std::floor(exact));
        assigned += out[i];
        rema.emplace_back(exact - std::floor(exact), i);
    }
    std::sort(rema.begin(), rema.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (std::size_t r = 0; assigned < count; ++r, ++assigned) out[rema[r % rema.size()].second]++;
    return out;
}

// ---------------------------------------------------------------------------
// ZDT family (k = 2)
// ---------------------------------------------------------------------------

// f2 = g - sqrt(x0*g) pieces shared by zdt1/zdt4 (and zdt3 adds a sine term)
struct SqrtShape {
    // value, d/dx0, d/dg, and second partials of  -sqrt(x0*g)
    static double value(double x0, double g) { return g - std::sqrt(x0 * g); }
    static double dx0(double x0, double g) { return -0.5 * std::sqrt(g / std::max(x0, kSingularFloor)); }
    static double dg(double x0, double g) { return 1.0 - 0.5 * std::sqrt(x0 / g); }
    static double dx0x0(double x0, double g) {
        const double xs = std::max(x0, kSingularFloor);
        return 0.25 * std::sqrt(g) / (xs * std::sqrt(xs));
    }
    static double dx0g(double x0, double g) {
        return -0.25 / std::sqrt(std::max(x0, kSingularFloor) * g);
    }
    static double dgg(double x0, double g) { return 0.25 * std::sqrt(x0) / (g * std::sqrt(g)); }
};

ProblemDef make_zdt(const std::string& name, std::size_t n) {
    ProblemDef p;
    p.name = name;
    p.n = n;
    p.k = 2;
    p.lower = Vec(n, 0.0);
    p.upper = Vec(n, 1.0);
    const double c = 9.0 / static_cast<double>(n - 1);

    if (name == "zdt1" || name == "zdt2" || name == "zdt3") {
        const int variant = name == "zdt1" ? 1 : (name == "zdt2" ? 2 : 3);
        auto gfun = [c](const Vec& x) {
            double s = 0.0;
            for (std::size_t i = 1; i < x.size(); ++i) s += x[i];
            return 1.0 + c * s;
        };
        p.evaluate = [gfun, variant](const Vec& x) {
            const double g = gfun(x);
            double f2 = 0.0;
            if (variant == 1)
                f2 = SqrtShape::value(x[0], g);
            else if (variant == 2)
                f2 = g - x[0] * x[0] / g;
            else
                f2 = SqrtShape::value(x[0], g) - x[0] * std::sin(10.0 * pi * x[0]);
            return Vec{x[0], f2};
        };
        p.jacobian = [gfun, variant, c](const Vec& x) {
            const std::size_t n = x.size();
            const double g = gfun(x);
            Matrix j(2, n);
            j(0, 0) = 1.0;
            double d0 = 0.0, dg = 0.0;
            if (variant == 1) {
                d0 = SqrtShape::dx0(x[0], g);
                dg = SqrtShape::dg(x[0], g);
            } else if (variant == 2) {
                d0 = -2.0 * x[0] / g;
                dg = 1.0 + x[0] * x[0] / (g * g);
            } else {
                const double w = 10.0 * pi;
                d0 = SqrtShape::dx0(x[0], g) - std::sin(w * x[0]) - w * x[0] * std::cos(w * x[0]);
                dg = SqrtShape::dg(x[0], g);
            }
            j(1, 0) = d0;
            for (std::size_t i = 1; i < n; ++i) j(1, i) = dg * c;
            return j;
        };
        p.hessian_tensor = [gfun, variant, c](const Vec& x) {
            const std::size_t n = x.size();
            const double g = gfun(x);
            std::vector<Matrix> h(2, Matrix(n, n));
            double h00 = 0.0, h0g = 0.0, hgg = 0.0;
            if (variant == 1) {
                h00 = SqrtShape::dx0x0(x[0], g);
                h0g = SqrtShape::dx0g(x[0], g);
                hgg = SqrtShape::dgg(x[0], g);
            } else if (variant == 2) {
                h00 = -2.0 / g;
                h0g = 2.0 * x[0] / (g * g);
                hgg = -2.0 * x[0] * x[0] / (g * g * g);
            } else {
                const double w = 10.0 * pi;
                h00 = SqrtShape::dx0x0(x[0], g) - 2.0 * w * std::cos(w * x[0]) +
                      w * w * x[0] * std::sin(w * x[0]);
                h0g = SqrtShape::dx0g(x[0], g);
                hgg = SqrtShape::dgg(x[0], g);
            }
            h[1](0, 0) = h00;
            for (std::size_t i = 1; i < n; ++i) {
                h[1](0, i) = h0g * c;
                h[1](i, 0) = h0g * c;
                for (std::size_t j = 1; j < n; ++j) h[1](i, j) = hgg * c * c;
            }
            return h;
        };
    } else {  // zdt4
        for (std::size_t i = 1; i < n; ++i) {
            p.lower[i] = -5.0;
            p.upper[i] = 5.0;
        }
        const double base = 1.0 + 10.0 * static_cast<double>(n - 1);
        auto gfun = [base](const Vec& x) {
            double s = 0.0;
            for (std::size_t i = 1; i < x.size(); ++i)
                s += x[i] * x[i] - 10.0 * std::cos(4.0 * pi * x[i]);
            return base + s;
        };
        p.evaluate = [gfun](const Vec& x) {
            const double g = gfun(x);
            return Vec{x[0], SqrtShape::value(x[0], g)};
        };
        p.jacobian = [gfun](const Vec& x) {
            const std::size_t n = x.size();
            const double g = gfun(x);
            Matrix j(2, n);
            j(0, 0) = 1.0;
            j(1, 0) = SqrtShape::dx0(x[0], g);
            const double dg = SqrtShape::dg(x[0], g);
            for (std::size_t i = 1; i < n; ++i)
                j(1, i) = dg * (2.0 * x[i] + 40.0 * pi * std::sin(4.0 * pi * x[i]));
            return j;
        };
        p.hessian_tensor = [gfun](const Vec& x) {
            const std::size_t n = x.size();
            const double g = gfun(x);
            std::vector<Matrix> h(2, Matrix(n, n));
            const double h00 = SqrtShape::dx0x0(x[0], g);
            const double h0g = SqrtShape::dx0g(x[0], g);
            const double hgg = SqrtShape::dgg(x[0], g);
            const double dg = SqrtShape::dg(x[0], g);
            Vec gi(n, 0.0), gii(n, 0.0);
            for (std::size_t i = 1; i < n; ++i) {
                gi[i] = 2.0 * x[i] + 40.0 * pi * std::sin(4.0 * pi * x[i]);
                gii[i] = 2.0 + 160.0 * pi * pi * std::cos(4.0 * pi * x[i]);
            }
            h[1](0, 0) = h00;
            for (std::size_t i = 1; i < n; ++i) {
                h[1](0, i) = h0g * gi[i];
                h[1](i, 0) = h0g * gi[i];
                for (std::size_t j = 1; j < n; ++j) h[1](i, j) = hgg * gi[i] * gi[j];
                h[1](i, i) += dg * gii[i];
            }
            return h;
        };
    }
    return p;
}

// Critical points of a smooth 1-D function on (lo, hi), classified by the
// direction of the derivative sign change.
struct Critical {
    double x;
    bool is_min;
};

std::vector<Critical> critical_points(const std::function<double(double)>& deriv, double lo,
                                      double hi) {
    std::vector<Critical> out;
    const int grid = 20000;
    double prev_x = lo, prev_d = deriv(lo);
    for (int i = 1; i <= grid; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / grid;
        const double d = deriv(x);
        if (prev_d < 0.0 && d >= 0.0) out.push_back({bisect(deriv, prev_x, x), true});
        if (prev_d > 0.0 && d <= 0.0) out.push_back({bisect(deriv, prev_x, x), false});
        prev_x = x;
        prev_d = d;
    }
    return out;
}

// Segments of the disconnected ZDT3 front, computed from the curve
// f2(t) = 1 - sqrt(t) - t*sin(10*pi*t) by scanning its running minimum. A
// segment starts where f2 falls through the previous record (searched on the
// descent from the preceding local maximum) and ends at a new record minimum.
std::vector<Interval> zdt3_front_segments() {
    const double w = 10.0 * pi;
    auto f2 = [w](double t) { return 1.0 - std::sqrt(t) - t * std::sin(w * t); };
    auto df2 = [w](double t) {
        return -0.5 / std::sqrt(t) - std::sin(w * t) - w * t * std::cos(w * t);
    };
    const auto crit = critical_points(df2, 1e-9, 1.0);

    std::vector<Interval> segments;
    double record = std::numeric_limits<double>::infinity();
    double last_max = 0.0;
    bool have_max = false;
    for (const auto& c : crit) {
        if (!c.is_min) {
            last_max = c.x;
            have_max = true;
            continue;
        }
        const double fm = f2(c.x);
        if (fm >= record) continue;
        double start = 0.0;
        if (!segments.empty() && have_max) {
            const double rec = record;  // f2(last_max) > rec >= f2(c.x)
            start = bisect([&](double t) { return f2(t) - rec; }, last_max, c.x);
        }
        segments.push_back({start, c.x});
        record = fm;
    }
    return segments;
}

PointSet sample_zdt_front(const std::string& name, std::size_t count) {
    PointSet out;
    out.points.reserve(count);
    if (name == "zdt1" || name == "zdt4") {
        for (std::size_t i = 0; i < count; ++i) {
            const double t = static_cast<double>(i) / static_cast<double>(count - 1);
            out.points.push_back({t * t, 1.0 - t});
        }
    } else if (name == "zdt2") {
        for (std::size_t i = 0; i < count; ++i) {
            const double t = static_cast<double>(i) / static_cast<double>(count - 1);
            out.points.push_back({t, 1.0 - t * t});
        }
    } else {  // zdt3
        static const std::vector<Interval> segs = zdt3_front_segments();
        const double w = 10.0 * pi;
        auto f2 = [w](double t) { return 1.0 - std::sqrt(t) - t * std::sin(w * t); };

        // per-segment arc-length tables; points are spread uniformly by arc
        // length so the discretization density is even along the curve
        const int fine = 1024;
        std::vector<std::vector<double>> arcs(segs.size());
        std::vector<double> lens;
        for (std::size_t s = 0; s < segs.size(); ++s) {
            // open the entry end a hair so consecutive segments stay mutually
            // nondominated (the entry point ties the previous record in f2)
            const double lo = segs[s].lo + (s == 0 ? 0.0 : 1e-7 * segs[s].length());
            const double hi = segs[s].hi;
            auto& cum = arcs[s];
            cum.resize(fine + 1, 0.0);
            double prev_t = lo, prev_f = f2(lo);
            for (int i = 1; i <= fine; ++i) {
                const double t = lo + (hi - lo) * static_cast<double>(i) / fine;
                const double f = f2(t);
                cum[i] = cum[i - 1] + std::hypot(t - prev_t, f - prev_f);
                prev_t = t;
                prev_f = f;
            }
            lens.push_back(cum.back());
        }
        const auto counts = proportional_split(count, lens);
        for (std::size_t s = 0; s < segs.size(); ++s) {
            if (counts[s] == 0) continue;
            const double lo = segs[s].lo + (s == 0 ? 0.0 : 1e-7 * segs[s].length());
            const double hi = segs[s].hi;
            const auto& cum = arcs[s];
            std::size_t pos = 0;
            for (std::size_t i = 0; i < counts[s]; ++i) {
                const double target =
                    counts[s] == 1 ? 0.5 * cum.back()
                                   : cum.back() * static_cast<double>(i) /
                                         static_cast<double>(counts[s] - 1);
                while (pos + 1 < cum.size() - 1 && cum[pos + 1] < target) ++pos;
                const double frac =
                    cum[pos + 1] > cum[pos] ? (target - cum[pos]) / (cum[pos + 1] - cum[pos]) : 0.0;
                const double t = lo + (hi - lo) * (static_cast<double>(pos) + frac) / fine;
                out.points.push_back({t, f2(t)});
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// DTLZ family (k = 3; position variables x0, x1; distance set M = {2..n-1})
// ---------------------------------------------------------------------------

struct GFun {
    std::function<double(const Vec&)> value;
    std::function<double(const Vec&, std::size_t)> deriv;    // dg/dx_j, j in M
    std::function<double(const Vec&, std::size_t)> deriv2;   // d2g/dx_j^2
};

GFun g_sphere() {  // dtlz2/5: sum (x_j - 0.5)^2
    GFun g;
    g.value = [](const Vec& x) {
        double s = 0.0;
        for (std::size_t j = 2; j < x.size(); ++j) s += (x[j] - 0.5) * (x[j] - 0.5);
        return s;
    };
    g.deriv = [](const Vec& x, std::size_t j) { return 2.0 * (x[j] - 0.5); };
    g.deriv2 = [](const Vec&, std::size_t) { return 2.0; };
    return g;
}

GFun g_rastrigin() {  // dtlz1/3
    GFun g;
    g.value = [](const Vec& x) {
        double s = static_cast<double>(x.size() - 2);
        for (std::size_t j = 2; j < x.size(); ++j) {
            const double z = x[j] - 0.5;
            s += z * z - std::cos(20.0 * pi * z);
        }
        return 100.0 * s;
    };
    g.deriv = [](const Vec& x, std::size_t j) {
        const double z = x[j] - 0.5;
        return 100.0 * (2.0 * z + 20.0 * pi * std::sin(20.0 * pi * z));
    };
    g.deriv2 = [](const Vec& x, std::size_t j) {
        const double z = x[j] - 0.5;
        return 100.0 * (2.0 + 400.0 * pi * pi * std::cos(20.0 * pi * z));
    };
    return g;
}

GFun g_power() {  // dtlz6: sum x_j^0.1
    GFun g;
    g.value = [](const Vec& x) {
        double s = 0.0;
        for (std::size_t j = 2; j < x.size(); ++j) s += std::pow(std::max(x[j], 0.0), 0.1);
        return s;
    };
    g.deriv = [](const Vec& x, std::size_t j) {
        return 0.1 * std::pow(std::max(x[j], kSingularFloor), -0.9);
    };
    g.deriv2 = [](const Vec& x, std::size_t j) {
        return -0.09 * std::pow(std::max(x[j], kSingularFloor), -1.9);
    };
    return g;
}

// dtlz1: f = 0.5 * L_i(x0, x1) * (1 + g), L linear in the position variables
ProblemDef make_dtlz1_like(const std::string& name, std::size_t n, const GFun& g) {
    ProblemDef p;
    p.name = name;
    p.n = n;
    p.k = 3;
    p.lower = Vec(n, 0.0);
    p.upper = Vec(n, 1.0);

    // L0 = x0*x1, L1 = x0*(1-x1), L2 = (1-x0)
    auto lval = [](const Vec& x, int i) {
        if (i == 0) return x[0] * x[1];
        if (i == 1) return x[0] * (1.0 - x[1]);
        return 1.0 - x[0];
    };
    auto ld = [](const Vec& x, int i, std::size_t v) -> double {  // dL_i/dx_v, v in {0,1}
        if (i == 0) return v == 0 ? x[1] : x[0];
        if (i == 1) return v == 0 ? 1.0 - x[1] : -x[0];
        return v == 0 ? -1.0 : 0.0;
    };
    auto ldd = [](int i) -> double {  // d2L_i/dx0dx1 (only mixed term nonzero)
        if (i == 0) return 1.0;
        if (i == 1) return -1.0;
        return 0.0;
    };

    p.evaluate = [g, lval](const Vec& x) {
        const double a = 1.0 + g.value(x);
        return Vec{0.5 * lval(x, 0) * a, 0.5 * lval(x, 1) * a, 0.5 * lval(x, 2) * a};
    };
    p.jacobian = [g, lval, ld](const Vec& x) {
        const std::size_t n = x.size();
        const double a = 1.0 + g.value(x);
        Matrix jm(3, n);
        for (int i = 0; i < 3; ++i) {
            jm(i, 0) = 0.5 * ld(x, i, 0) * a;
            jm(i, 1) = 0.5 * ld(x, i, 1) * a;
            for (std::size_t j = 2; j < n; ++j) jm(i, j) = 0.5 * lval(x, i) * g.deriv(x, j);
        }
        return jm;
    };
    p.hessian_tensor = [g, lval, ld, ldd](const Vec& x) {
        const std::size_t n = x.size();
        const double a = 1.0 + g.value(x);
        std::vector<Matrix> h(3, Matrix(n, n));
        for (int i = 0; i < 3; ++i) {
            h[i](0, 1) = 0.5 * ldd(i) * a;
            h[i](1, 0) = h[i](0, 1);
            for (std::size_t j = 2; j < n; ++j) {
                const double gj = g.deriv(x, j);
                h[i](0, j) = 0.5 * ld(x, i, 0) * gj;
                h[i](j, 0) = h[i](0, j);
                h[i](1, j) = 0.5 * ld(x, i, 1) * gj;
                h[i](j, 1) = h[i](1, j);
                h[i](j, j) = 0.5 * lval(x, i) * g.deriv2(x, j);
            }
        }
        return h;
    };
    return p;
}

// dtlz2/3/4: f = (1+g) * S_i(z0, z1), z = x^alpha on position variables
ProblemDef make_dtlz2_like(const std::string& name, std::size_t n, const GFun& g, double alpha) {
    ProblemDef p;
    p.name = name;
    p.n = n;
    p.k = 3;
    p.lower = Vec(n, 0.0);
    p.upper = Vec(n, 1.0);
    const double b = pi / 2.0;

    // S and its derivatives w.r.t. z0, z1
    struct Shape {
        double s[3], dz0[3], dz1[3], dz00[3], dz01[3], dz11[3];
    };
    auto shape = [b](double z0, double z1) {
        Shape sh{};
        const double c0 = std::cos(b * z0), s0 = std::sin(b * z0);
        const double c1 = std::cos(b * z1), s1 = std::sin(b * z1);
        sh.s[0] = c0 * c1;
        sh.s[1] = c0 * s1;
        sh.s[2] = s0;
        sh.dz0[0] = -b * s0 * c1;
        sh.dz0[1] = -b * s0 * s1;
        sh.dz0[2] = b * c0;
        sh.dz1[0] = -b * c0 * s1;
        sh.dz1[1] = b * c0 * c1;
        sh.dz1[2] = 0.0;
        sh.dz00[0] = -b * b * c0 * c1;
        sh.dz00[1] = -b * b * c0 * s1;
        sh.dz00[2] = -b * b * s0;
        sh.dz01[0] = b * b * s0 * s1;
        sh.dz01[1] = -b * b * s0 * c1;
        sh.dz01[2] = 0.0;
        sh.dz11[0] = -b * b * c0 * c1;
        sh.dz11[1] = -b * b * c0 * s1;
        sh.dz11[2] = 0.0;
        return sh;
    };

    p.evaluate = [g, shape, alpha](const Vec& x) {
        const double a = 1.0 + g.value(x);
        const auto sh = shape(std::pow(x[0], alpha), std::pow(x[1], alpha));
        return Vec{a * sh.s[0], a * sh.s[1], a * sh.s[2]};
    };
    p.jacobian = [g, shape, alpha](const Vec& x) {
        const std::size_t n = x.size();
        const double a = 1.0 + g.value(x);
        const double z0 = std::pow(x[0], alpha), z1 = std::pow(x[1], alpha);
        const double dz0 = alpha == 1.0 ? 1.0 : alpha * std::pow(x[0], alpha - 1.0);
        const double dz1 = alpha == 1.0 ? 1.0 : alpha * std::pow(x[1], alpha - 1.0);
        const auto sh = shape(z0, z1);
        Matrix jm(3, n);
        for (int i = 0; i < 3; ++i) {
            jm(i, 0) = a * sh.dz0[i] * dz0;
            jm(i, 1) = a * sh.dz1[i] * dz1;
            for (std::size_t j = 2; j < n; ++j) jm(i, j) = sh.s[i] * g.deriv(x, j);
        }
        return jm;
    };
    p.hessian_tensor = [g, shape, alpha](const Vec& x) {
        const std::size_t n = x.size();
        const double a = 1.0 + g.value(x);
        const double z0 = std::pow(x[0], alpha), z1 = std::pow(x[1], alpha);
        const double dz0 = alpha == 1.0 ? 1.0 : alpha * std::pow(x[0], alpha - 1.0);
        const double dz1 = alpha == 1.0 ? 1.0 : alpha * std::pow(x[1], alpha - 1.0);
        const double ddz0 = alpha == 1.0 ? 0.0 : alpha * (alpha - 1.0) * std::pow(x[0], alpha - 2.0);
        const double ddz1 = alpha == 1.0 ? 0.0 : alpha * (alpha - 1.0) * std::pow(x[1], alpha - 2.0);
        const auto sh = shape(z0, z1);
        std::vector<Matrix> h(3, Matrix(n, n));
        for (int i = 0; i < 3; ++i) {
            h[i](0, 0) = a * (sh.dz00[i] * dz0 * dz0 + sh.dz0[i] * ddz0);
            h[i](1, 1) = a * (sh.dz11[i] * dz1 * dz1 + sh.dz1[i] * ddz1);
            h[i](0, 1) = a * sh.dz01[i] * dz0 * dz1;
            h[i](1, 0) = h[i](0, 1);
            for (std::size_t j = 2; j < n; ++j) {
                const double gj = g.deriv(x, j);
                h[i](0, j) = sh.dz0[i] * dz0 * gj;
                h[i](j, 0) = h[i](0, j);
                h[i](1, j) = sh.dz1[i] * dz1 * gj;
                h[i](j, 1) = h[i](1, j);
                h[i](j, j) = sh.s[i] * g.deriv2(x, j);
            }
        }
        return h;
    };
    return p;
}

// dtlz5/6: angles theta0 = (pi/2) x0, theta1 = (pi/4)(1 + 2 g x1)/(1+g)
ProblemDef make_dtlz5_like(const std::string& name, std::size_t n, const GFun& g) {
    ProblemDef p;
    p.name = name;
    p.n = n;
    p.k = 3;
    p.lower = Vec(n, 0.0);
    p.upper = Vec(n, 1.0);
    const double b = pi / 2.0;

    // f_i = Phi_i(u, v, g) with u = x0, v = x1; partials of Phi returned in
    // one struct, then chained through grad/hess of g below.
    struct Partials {
        double val[3], du[3], dv[3], dg[3];
        double duu[3], duv[3], dug[3], dvv[3], dvg[3], dgg[3];
    };
    auto partials = [b](double u, double v, double gv) {
        Partials q{};
        const double a = 1.0 + gv;
        const double t1 = (pi / 4.0) * (1.0 + 2.0 * gv * v) / a;
        const double t1v = (pi / 2.0) * gv / a;
        const double t1g = (pi / 4.0) * (2.0 * v - 1.0) / (a * a);
        const double t1vg = (pi / 2.0) / (a * a);
        const double t1gg = -(pi / 2.0) * (2.0 * v - 1.0) / (a * a * a);
        const double c0 = std::cos(b * u), s0 = std::sin(b * u);
        const double c1 = std::cos(t1), s1 = std::sin(t1);

        q.val[0] = a * c0 * c1;
        q.du[0] = -a * b * s0 * c1;
        q.dv[0] = -a * c0 * s1 * t1v;
        q.dg[0] = c0 * c1 - a * c0 * s1 * t1g;
        q.duu[0] = -a * b * b * c0 * c1;
        q.duv[0] = a * b * s0 * s1 * t1v;
        q.dug[0] = -b * s0 * c1 + a * b * s0 * s1 * t1g;
        q.dvv[0] = -a * c0 * c1 * t1v * t1v;
        q.dvg[0] = -c0 * s1 * t1v - a * c0 * (c1 * t1g * t1v + s1 * t1vg);
        q.dgg[0] = -2.0 * c0 * s1 * t1g - a * c0 * (c1 * t1g * t1g + s1 * t1gg);

        q.val[1] = a * c0 * s1;
        q.du[1] = -a * b * s0 * s1;
        q.dv[1] = a * c0 * c1 * t1v;
        q.dg[1] = c0 * s1 + a * c0 * c1 * t1g;
        q.duu[1] = -a * b * b * c0 * s1;
        q.duv[1] = -a * b * s0 * c1 * t1v;
        q.dug[1] = -b * s0 * s1 - a * b * s0 * c1 * t1g;
        q.dvv[1] = -a * c0 * s1 * t1v * t1v;
        q.dvg[1] = c0 * c1 * t1v + a * c0 * (-s1 * t1g * t1v + c1 * t1vg);
        q.dgg[1] = 2.0 * c0 * c1 * t1g + a * c0 * (-s1 * t1g * t1g + c1 * t1gg);

        q.val[2] = a * s0;
        q.du[2] = a * b * c0;
        q.dv[2] = 0.0;
        q.dg[2] = s0;
        q.duu[2] = -a * b * b * s0;
        q.duv[2] = 0.0;
        q.dug[2] = b * c0;
        q.dvv[2] = 0.0;
        q.dvg[2] = 0.0;
        q.dgg[2] = 0.0;
        return q;
    };

    p.evaluate = [g, partials](const Vec& x) {
        const auto q = partials(x[0], x[1], g.value(x));
        return Vec{q.val[0], q.val[1], q.val[2]};
    };
    p.jacobian = [g, partials](const Vec& x) {
        const std::size_t n = x.size();
        const auto q = partials(x[0], x[1], g.value(x));
        Matrix jm(3, n);
        for (int i = 0; i < 3; ++i) {
            jm(i, 0) = q.du[i];
            jm(i, 1) = q.dv[i];
            for (std::size_t j = 2; j < n; ++j) jm(i, j) = q.dg[i] * g.deriv(x, j);
        }
        return jm;
    };
    p.hessian_tensor = [g, partials](const Vec& x) {
        const std::size_t n = x.size();
        const auto q = partials(x[0], x[1], g.value(x));
        std::vector<Matrix> h(3, Matrix(n, n));
        for (int i = 0; i < 3; ++i) {
            h[i](0, 0) = q.duu[i];
            h[i](0, 1) = q.duv[i];
            h[i](1, 0) = q.duv[i];
            h[i](1, 1) = q.dvv[i];
            for (std::size_t j = 2; j < n; ++j) {
                const double gj = g.deriv(x, j);
                h[i](0, j) = q.dug[i] * gj;
                h[i](j, 0) = h[i](0, j);
                h[i](1, j) = q.dvg[i] * gj;
                h[i](j, 1) = h[i](1, j);
                for (std::size_t j2 = 2; j2 < n; ++j2)
                    h[i](j, j2) = q.dgg[i] * gj * g.deriv(x, j2);
                h[i](j, j) += q.dg[i] * g.deriv2(x, j);
            }
        }
        return h;
    };
    return p;
}

ProblemDef make_dtlz7(std::size_t n) {
    ProblemDef p;
    p.name = "dtlz7";
    p.n = n;
    p.k = 3;
    p.lower = Vec(n, 0.0);
    p.upper = Vec(n, 1.0);
    const double nm = static_cast<double>(n - 2);
    const double w = 3.0 * pi;

    p.evaluate = [nm, w](const Vec& x) {
        double s = 0.0;
        for (std::size_t j = 2; j < x.size(); ++j) s += x[j];
        const double a = 2.0 + 9.0 / nm * s;  // 1 + g
        double f2 = a * 3.0;
        for (int i = 0; i < 2; ++i) f2 -= x[i] * (1.0 + std::sin(w * x[i]));
        return Vec{x[0], x[1], f2};
    };
    p.jacobian = [nm, w](const Vec& x) {
        const std::size_t n = x.size();
        Matrix jm(3, n);
        jm(0, 0) = 1.0;
        jm(1, 1) = 1.0;
        for (int i = 0; i < 2; ++i)
            jm(2, i) = -(1.0 + std::sin(w * x[i]) + w * x[i] * std::cos(w * x[i]));
        for (std::size_t j = 2; j < n; ++j) jm(2, j) = 3.0 * 9.0 / nm;
        return jm;
    };
    p.hessian_tensor = [w](const Vec& x) {
        const std::size_t n = x.size();
        std::vector<Matrix> h(3, Matrix(n, n));
        for (int i = 0; i < 2; ++i)
            h[2](i, i) = -(2.0 * w * std::cos(w * x[i]) - w * w * x[i] * std::sin(w * x[i]));
        return h;
    };
    return p;
}

// Nondominated intervals of t(x) = x*(1+sin(3*pi*x)) on [0,1]: the strict
// running-maximum set, two intervals for the 3*pi frequency. Re-entry points
// are searched on the ascent from the preceding local minimum.
std::vector<Interval> dtlz7_position_intervals() {
    const double w = 3.0 * pi;
    auto tf = [w](double x) { return x * (1.0 + std::sin(w * x)); };
    auto dtf = [w](double x) { return 1.0 + std::sin(w * x) + w * x * std::cos(w * x); };
    const auto crit = critical_points(dtf, 0.0, 1.0);

    std::vector<Interval> out;
    double record = -std::numeric_limits<double>::infinity();
    double last_min = 0.0;
    bool have_min = false;
    for (const auto& c : crit) {
        if (c.is_min) {
            last_min = c.x;
            have_min = true;
            continue;
        }
        const double tm = tf(c.x);
        if (tm <= record) continue;
        double start = 0.0;
        if (!out.empty() && have_min) {
            const double rec = record;  // tf(last_min) < rec <= tf(c.x)
            start = bisect([&](double x) { return tf(x) - rec; }, last_min, c.x);
        }
        out.push_back({start, c.x});
        record = tm;
    }
    return out;
}

PointSet sample_dtlz_front(const std::string& name, std::size_t count) {
    PointSet out;
    out.points.reserve(count);
    if (name == "dtlz1") {
        for (std::size_t i = 0; i < count; ++i) {
            double u = halton(i + 1, 2), v = halton(i + 1, 3);
            if (u + v > 1.0) {
                u = 1.0 - u;
                v = 1.0 - v;
            }
            out.points.push_back({0.5 * u, 0.5 * v, 0.5 * (1.0 - u - v)});
        }
    } else if (name == "dtlz2" || name == "dtlz3" || name == "dtlz4") {
        const double b = pi / 2.0;
        for (std::size_t i = 0; i < count; ++i) {
            const double t0 = b * halton(i + 1, 2);
            const double t1 = b * halton(i + 1, 3);
            out.points.push_back(
                {std::cos(t0) * std::cos(t1), std::cos(t0) * std::sin(t1), std::sin(t0)});
        }
    } else if (name == "dtlz5" || name == "dtlz6") {
        const double b = pi / 2.0;
        const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
        for (std::size_t i = 0; i < count; ++i) {
            const double t = b * static_cast<double>(i) / static_cast<double>(count - 1);
            out.points.push_back({std::cos(t) * inv_sqrt2, std::cos(t) * inv_sqrt2, std::sin(t)});
        }
    } else {  // dtlz7
        static const std::vector<Interval> iv = dtlz7_position_intervals();
        const double w = 3.0 * pi;
        auto tf = [w](double x) { return x * (1.0 + std::sin(w * x)); };
        std::vector<std::pair<Interval, Interval>> patches;
        std::vector<double> weights;
        for (std::size_t a = 0; a < iv.size(); ++a) {
            for (std::size_t c = 0; c < iv.size(); ++c) {
                Interval ia = iv[a], ic = iv[c];
                // open the re-entry edge: its t-value ties the previous peak
                if (a > 0) ia.lo += 1e-7 * ia.length();
                if (c > 0) ic.lo += 1e-7 * ic.length();
                patches.emplace_back(ia, ic);
                weights.push_back(ia.length() * ic.length());
            }
        }
        const auto counts = proportional_split(count, weights);
        for (std::size_t pidx = 0; pidx < patches.size(); ++pidx) {
            const auto& [ia, ic] = patches[pidx];
            for (std::size_t i = 0; i < counts[pidx]; ++i) {
                const double x0 = ia.lo + ia.length() * halton(i + 1, 2);
                const double x1 = ic.lo + ic.length() * halton(i + 1, 3);
                out.points.push_back({x0, x1, 6.0 - tf(x0) - tf(x1)});
            }
        }
    }
    return out;
}

ProblemDef make_toy_biobj() {
    ProblemDef p;
    p.name = "toy-biobj";
    p.n = 2;
    p.k = 2;
    p.lower = {-2.0, -2.0};
    p.upper = {2.0, 2.0};
    p.evaluate = [](const Vec& x) {
        return Vec{(x[0] - 1.0) * (x[0] - 1.0) + (x[1] - 1.0) * (x[1] - 1.0),
                   (x[0] + 1.0) * (x[0] + 1.0) + (x[1] + 1.0) * (x[1] + 1.0)};
    };
    p.jacobian = [](const Vec& x) {
        Matrix j(2, 2);
        j(0, 0) = 2.0 * (x[0] - 1.0);
        j(0, 1) = 2.0 * (x[1] - 1.0);
        j(1, 0) = 2.0 * (x[0] + 1.0);
        j(1, 1) = 2.0 * (x[1] + 1.0);
        return j;
    };
    p.hessian_tensor = [](const Vec&) {
        std::vector<Matrix> h(2, Matrix(2, 2));
        for (auto& m : h) {
            m(0, 0) = 2.0;
            m(1, 1) = 2.0;
        }
        return h;
    };
    p.front_sampler = [](std::size_t count) {
        PointSet out;
        for (std::size_t i = 0; i < count; ++i) {
            const double t = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(count - 1);
            out.points.push_back({2.0 * (t - 1.0) * (t - 1.0), 2.0 * (t + 1.0) * (t + 1.0)});
        }
        return out;
    };
    return p;
}

}  // namespace

std::vector<ConstraintFn> box_constraints(const ProblemDef& problem) {
    std::vector<ConstraintFn> out;
    const std::size_t n = problem.n;
    for (std::size_t j = 0; j < n; ++j) {
        for (int side = 0; side < 2; ++side) {
            ConstraintFn c;
            c.linear = true;
            const double bound = side == 0 ? problem.lower[j] : problem.upper[j];
            const double sign = side == 0 ? -1.0 : 1.0;
            c.value = [j, bound, sign](const Vec& x) { return sign * (x[j] - bound); };
            c.gradient = [j, sign, n](const Vec&) {
                Vec g(n, 0.0);
                g[j] = sign;
                return g;
            };
            c.hessian = [n](const Vec&) { return Matrix(n, n); };
            out.push_back(std::move(c));
        }
    }
    return out;
}

const std::vector<std::string>& available() {
    static const std::vector<std::string> names = {"zdt1",  "zdt2",  "zdt3",  "zdt4",
                                                   "dtlz1", "dtlz2", "dtlz3", "dtlz4",
                                                   "dtlz5", "dtlz6", "dtlz7", "toy-biobj"};
    return names;
}

ProblemDef make_problem(const std::string& name, std::size_t n) {
    ProblemDef p;
    if (name == "zdt1" || name == "zdt2" || name == "zdt3") {
        p = make_zdt(name, n ? n : 30);
    } else if (name == "zdt4") {
        p = make_zdt(name, n ? n : 10);
    } else if (name == "dtlz1") {
        p = make_dtlz1_like(name, n ? n : 7, g_rastrigin());
    } else if (name == "dtlz2") {
        p = make_dtlz2_like(name, n ? n : 12, g_sphere(), 1.0);
    } else if (name == "dtlz3") {
        p = make_dtlz2_like(name, n ? n : 12, g_rastrigin(), 1.0);
    } else if (name == "dtlz4") {
        p = make_dtlz2_like(name, n ? n : 12, g_sphere(), 100.0);
    } else if (name == "dtlz5") {
        p = make_dtlz5_like(name, n ? n : 12, g_sphere());
    } else if (name == "dtlz6") {
        p = make_dtlz5_like(name, n ? n : 12, g_power());
    } else if (name == "dtlz7") {
        p = make_dtlz7(n ? n : 22);
    } else if (name == "toy-biobj") {
        p = make_toy_biobj();
    } else {
        std::string msg = "unknown problem '" + name + "'; available:";
        for (const auto& s : available()) msg += " " + s;
        throw ContractViolation(msg);
    }
    if (p.n < 2 || (p.k == 3 && p.n < 3))
        throw ContractViolation("make_problem: decision dimension too small for " + p.name);
    if (!p.front_sampler) {
        const std::string nm = p.name;
        p.front_sampler = [nm](std::size_t count) {
            return nm.rfind("zdt", 0) == 0 ? sample_zdt_front(nm, count)
                                           : sample_dtlz_front(nm, count);
        };
    }
    p.inequalities = box_constraints(p);
    return p;
}

PointSet front_sample(const ProblemDef& problem, std::size_t count) {
    if (count < 2) throw ContractViolation("front_sample: count must be >= 2");
    return problem.front_sampler(count);
}

DerivativeReport check_derivatives(const ProblemDef& problem, const Vec& x, double step) {
    DerivativeReport rep;
    const std::size_t n = problem.n, k = problem.k;

    Matrix jfd(k, n);
    for (std::size_t j = 0; j < n; ++j) {
        Vec xp = x, xm = x;
        xp[j] += step;
        xm[j] -= step;
        const Vec fp = problem.evaluate(xp), fm = problem.evaluate(xm);
        for (std::size_t i = 0; i < k; ++i) jfd(i, j) = (fp[i] - fm[i]) / (2.0 * step);
    }
    const Matrix jan = problem.jacobian(x);
    double scale = std::max(1.0, linalg::max_abs(jfd));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < n; ++j)
            rep.jacobian_max_rel =
                std::max(rep.jacobian_max_rel, std::fabs(jan(i, j) - jfd(i, j)) / scale);

    const auto han = problem.hessian_tensor(x);
    std::vector<Matrix> hfd(k, Matrix(n, n));
    for (std::size_t j = 0; j < n; ++j) {
        Vec xp = x, xm = x;
        xp[j] += step;
        xm[j] -= step;
        const Matrix jp = problem.jacobian(xp), jm = problem.jacobian(xm);
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t l = 0; l < n; ++l)
                hfd[i](l, j) = (jp(i, l) - jm(i, l)) / (2.0 * step);
    }
    double hscale = 1.0;
    for (std::size_t i = 0; i < k; ++i) hscale = std::max(hscale, linalg::max_abs(hfd[i]));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t c = 0; c < n; ++c)
                rep.hessian_max_rel =
                    std::max(rep.hessian_max_rel, std::fabs(han[i](a, c) - hfd[i](a, c)) / hscale);
    return rep;
}

}  // namespace problems
}  // namespace mmdn
