#include <doctest.h>

#include <cmath>

#include "mmdn/hybrid.hpp"
#include "mmdn/rng.hpp"
#include "oracles.hpp"

using namespace mmdn;

namespace {

// small, fast configuration used across the integration checks
RunConfig small_cfg(const std::string& problem) {
    RunConfig cfg;
    cfg.problem = problem;
    cfg.mu = 8;
    cfg.n1 = 10;
    cfg.n2 = 2;
    cfg.kernel = "gaussian";
    cfg.theta = 10.0;
    return cfg;
}

std::string record_json_without_wall(const RunRecord& rec) {
    RunRecord r = rec;
    r.wall_ms = 0.0;
    return hybrid::record_to_json(r);
}

}  // namespace

TEST_CASE("select_kernel: returns a grid member, deterministically, matching exhaustion") {
    const auto p = problems::make_problem("zdt1", 6);
    SplitMix64 rng(2);
    const std::size_t mu = 4;
    Vec d(mu * p.n);
    for (auto& v : d) v = rng.uniform(0.05, 0.95);
    const StackedDecision x0(mu, p.n, d);
    PointSet y0;
    for (std::size_t i = 0; i < mu; ++i) y0.points.push_back(p.evaluate(x0.point(i)));
    ReferenceSetConfig rcfg;
    rcfg.target_size = mu;
    rcfg.seed = 3;
    const PointSet r0 = refset::generate_reference_set(y0, rcfg).points;

    const KernelSpec chosen = hybrid::select_kernel(p, x0, r0);
    const double grid[] = {1e-2, 1e-1, 1.0, 10.0, 100.0, 500.0, 1000.0, 5000.0};
    bool on_grid = false;
    for (double t : grid)
        if (chosen.theta == t) on_grid = true;
    CHECK(on_grid);

    const KernelSpec again = hybrid::select_kernel(p, x0, r0);
    CHECK(again.family == chosen.family);
    CHECK(again.theta == chosen.theta);

    // exhaustive oracle over the full grid
    bool found = false;
    KernelFamily best_family = KernelFamily::Gaussian;
    double best_theta = 0.0, best_cond = 0.0;
    for (KernelFamily fam : {KernelFamily::Gaussian, KernelFamily::Laplace}) {
        for (double t : grid) {
            try {
                const KernelSpec cand(fam, t);
                Matrix h = mmd::hess_decision(x0, p, r0, cand);
                const auto pre = newton::precondition(h);
                for (std::size_t i = 0; i < h.rows(); ++i) h(i, i) += pre.tau;
                const double cond = linalg::condition_number(h);
                if (!found || cond < best_cond) {
                    found = true;
                    best_cond = cond;
                    best_family = fam;
                    best_theta = t;
                }
            } catch (...) {
            }
        }
    }
    REQUIRE(found);
    CHECK(chosen.family == best_family);
    CHECK(chosen.theta == best_theta);
}

TEST_CASE("paper-table-3 preset is exposed") {
    const auto k1 = hybrid::paper_table3_kernel("zdt1");
    CHECK(k1.family == KernelFamily::Gaussian);
    CHECK(k1.theta == 2000.0);
    const auto k2 = hybrid::paper_table3_kernel("dtlz4");
    CHECK(k2.family == KernelFamily::Laplace);
    CHECK(k2.theta == 500.0);
    CHECK_THROWS_AS((void)hybrid::paper_table3_kernel("toy-biobj"), ContractViolation);
}

TEST_CASE("run_hybrid with n2=0 equals the moea-alone record") {
    RunConfig cfg = small_cfg("zdt1");
    cfg.n2 = 0;
    const RunRecord hyb = hybrid::run_hybrid(cfg, 5);

    RunConfig alone = cfg;
    alone.mode = RunMode::MoeaAlone;
    const RunRecord base = hybrid::run_single(alone, 5);
    CHECK(hyb.delta2 == base.delta2);
    CHECK(hyb.moea_ledger.plain_evals == base.moea_ledger.plain_evals);
}

TEST_CASE("budget fairness: baseline evals cover the hybrid budget, overshoot < mu") {
    RunConfig cfg = small_cfg("zdt1");
    const auto [hyb, base] = hybrid::run_pair(cfg, 7);
    REQUIRE(!hyb.failed);
    const double hybrid_equiv = metrics::equivalent_evals(hyb.moea_ledger) +
                                metrics::equivalent_evals(hyb.newton_ledger);
    const double base_evals = metrics::equivalent_evals(base.moea_ledger);
    CHECK(base_evals >= hybrid_equiv);
    CHECK(base_evals - hybrid_equiv < static_cast<double>(hyb.mu));

    // ledger arithmetic cross-checked against the recorded trace
    std::size_t evals = 0, jac = 0, hess = 0;
    for (const auto& it : hyb.trace) {
        evals += it.plain_evals;
        jac += it.jacobian_calls;
        hess += it.hessian_calls;
    }
    CHECK(hyb.newton_ledger.plain_evals == evals);
    CHECK(hyb.newton_ledger.hessian_calls == hess);
    // the gradient check of a converged/extra iteration can add one call
    CHECK(hyb.newton_ledger.jacobian_calls >= jac);
}

TEST_CASE("run_baseline_matched reproduces the paired baseline") {
    RunConfig cfg = small_cfg("zdt2");
    const auto [hyb, base] = hybrid::run_pair(cfg, 3);
    const RunRecord again = hybrid::run_baseline_matched(cfg, 3, hyb);
    CHECK(record_json_without_wall(again) == record_json_without_wall(base));
}

TEST_CASE("reproducibility: identical config and seed give identical records") {
    RunConfig cfg = small_cfg("zdt1");
    const RunRecord a = hybrid::run_hybrid(cfg, 11);
    const RunRecord b = hybrid::run_hybrid(cfg, 11);
    CHECK(record_json_without_wall(a) == record_json_without_wall(b));
}

TEST_CASE("records round-trip byte-identically") {
    RunConfig cfg = small_cfg("toy-biobj");
    cfg.n1 = 5;
    const RunRecord rec = hybrid::run_hybrid(cfg, 2);
    const std::string once = hybrid::record_to_json(rec);
    const std::string twice = hybrid::record_to_json(hybrid::record_from_json(once));
    CHECK(once == twice);
}

TEST_CASE("quantiles: pinned example and sorting oracle") {
    std::vector<double> v{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    CHECK(hybrid::quantile(v, 0.5) == doctest::Approx(0.55));
    CHECK(hybrid::quantile(v, 0.1) == doctest::Approx(0.19));
    CHECK(hybrid::quantile(v, 0.9) == doctest::Approx(0.91));

    SplitMix64 rng(8);
    for (int t = 0; t < 50; ++t) {
        std::vector<double> s;
        const std::size_t n = 1 + rng.below(40);
        for (std::size_t i = 0; i < n; ++i) s.push_back(rng.uniform(-5.0, 5.0));
        std::vector<double> sorted = s;
        std::sort(sorted.begin(), sorted.end());
        // oracle: same linear interpolation written independently
        const double q = rng.uniform();
        const double h = q * static_cast<double>(n - 1);
        const std::size_t lo = static_cast<std::size_t>(h);
        const double want = lo + 1 < n ? sorted[lo] + (h - static_cast<double>(lo)) *
                                                          (sorted[lo + 1] - sorted[lo])
                                       : sorted.back();
        CHECK(hybrid::quantile(s, q) == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("aggregate + stats_csv produce the summary layout") {
    std::vector<RunRecord> recs;
    for (int s = 0; s < 5; ++s) {
        RunRecord r;
        r.problem = "zdt1";
        r.mode = "hybrid";
        r.seed = static_cast<std::uint64_t>(s);
        r.delta2 = 0.1 * (s + 1);
        r.moea_ledger.plain_evals = 100;
        recs.push_back(r);
    }
    const auto rows = hybrid::aggregate(recs);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].count == 5);
    CHECK(rows[0].median_d2 == doctest::Approx(0.3));
    const std::string csv = hybrid::stats_csv(rows);
    CHECK(csv.rfind("problem,mode,seed-count,median_d2,q10_d2,q90_d2,median_budget", 0) == 0);
}

TEST_CASE("config parsing: defaults, overrides, and validation") {
    const RunConfig cfg = hybrid::config_from_json(
        R"({"problem":"dtlz2","mode":"hybrid","mu":12,"n1":50,"n2":3,
            "kernel":"laplace","theta":2.5,
            "refset":{"delta":0.05,"fill_multiplier":6},
            "moea":{"crossover_prob":0.8},
            "seeds":[4,5,6],"out":"outdir"})");
    CHECK(cfg.problem == "dtlz2");
    CHECK(cfg.mu == 12);
    CHECK(cfg.theta == 2.5);
    CHECK(cfg.refset.delta == 0.05);
    CHECK(cfg.refset.fill_multiplier == 6);
    CHECK(cfg.moea.crossover_prob == 0.8);
    CHECK(cfg.seeds == std::vector<std::uint64_t>{4, 5, 6});
    CHECK(cfg.out_dir == "outdir");

    CHECK_THROWS_AS((void)hybrid::config_from_json(R"({"mode":"nonsense"})"), ContractViolation);
}

TEST_CASE("mmdn-only mode runs end to end") {
    RunConfig cfg = small_cfg("toy-biobj");
    cfg.mode = RunMode::MmdnOnly;
    cfg.n2 = 3;
    cfg.kernel = "gaussian";
    cfg.theta = 0.5;
    const RunRecord rec = hybrid::run_single(cfg, 4);
    CHECK(!rec.failed);
    CHECK(rec.mode == "mmdn-only");
    CHECK(rec.newton_ledger.plain_evals >= rec.mu);
    CHECK(rec.delta2 >= 0.0);
}
