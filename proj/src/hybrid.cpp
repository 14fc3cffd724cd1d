#include "mmdn/hybrid.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>

#include <json.hpp>

#include "mmdn/rng.hpp"
#include "mmdn/tolerances.hpp"

namespace mmdn {

using nlohmann::json;

std::string to_string(RunMode mode) {
    switch (mode) {
        case RunMode::Hybrid: return "hybrid";
        case RunMode::MoeaAlone: return "moea-alone";
        case RunMode::MmdnOnly: return "mmdn-only";
    }
    return "hybrid";
}

RunMode run_mode_from_string(const std::string& s) {
    if (s == "hybrid") return RunMode::Hybrid;
    if (s == "moea-alone") return RunMode::MoeaAlone;
    if (s == "mmdn-only") return RunMode::MmdnOnly;
    throw ContractViolation("unknown mode '" + s + "' (hybrid | moea-alone | mmdn-only)");
}

std::string RunConfig::canonical_string() const {
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "problem=%s mode=%s mu=%zu n1=%zu n2=%zu eps=%.17g kernel=%s theta=%.17g "
                  "bounds=%d margin=%.17g delta=%.17g minpts=%zu fillx=%zu kmiters=%zu "
                  "cx=%.17g cxeta=%.17g pm=%.17g pmeta=%.17g f2d=%zu f3d=%zu",
                  problem.c_str(), to_string(mode).c_str(), mu, n1, n2, eps, kernel.c_str(), theta,
                  bounds_mode == BoundsMode::ActiveSet ? 0 : 1, boundary_margin, refset.delta,
                  refset.dbscan_min_pts, refset.fill_multiplier, refset.kmeans_iters,
                  moea.crossover_prob, moea.crossover_eta, moea.mutation_prob, moea.mutation_eta,
                  front_points_2d, front_points_3d);
    return buf;
}

namespace hybrid {
namespace {

std::string fnv1a_hex(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string stop_reason_string(StopReason r) {
    switch (r) {
        case StopReason::Converged: return "converged";
        case StopReason::MaxIterations: return "max-iterations";
        case StopReason::Stalled: return "stalled";
        case StopReason::SolveFailure: return "solve-failure";
        case StopReason::NonFinite: return "non-finite";
    }
    return "max-iterations";
}

PointSet metric_front(const ProblemDef& problem, const RunConfig& cfg) {
    return problems::front_sample(problem,
                                  problem.k == 2 ? cfg.front_points_2d : cfg.front_points_3d);
}

PointSet nondominated_subset(const PointSet& y) {
    PointSet out;
    for (std::size_t i = 0; i < y.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < y.size() && !dominated; ++j)
            if (j != i && dominates(y.points[j], y.points[i])) dominated = true;
        if (!dominated) out.points.push_back(y.points[i]);
    }
    return out;
}

PointSet population_objectives(const Population& pop) {
    PointSet y;
    for (const auto& ind : pop.individuals) y.points.push_back(ind.f);
    return y;
}

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();
    }
};

MoeaConfig resolved_moea(const RunConfig& cfg, std::size_t mu, std::uint64_t seed) {
    MoeaConfig m = cfg.moea;
    m.pop_size = mu;
    m.seed = seed;
    return m;
}

ReferenceSetConfig resolved_refset(const RunConfig& cfg, std::size_t mu, std::uint64_t seed) {
    ReferenceSetConfig r = cfg.refset;
    r.target_size = mu;
    r.seed = seed ^ 0x9e3779b97f4a7c15ULL;
    return r;
}

RunRecord base_record(const RunConfig& cfg, std::uint64_t seed, std::size_t mu) {
    RunRecord rec;
    rec.config_hash = fnv1a_hex(cfg.canonical_string());
    rec.problem = cfg.problem;
    rec.mode = to_string(cfg.mode);
    rec.seed = seed;
    rec.mu = mu;
    rec.n1 = cfg.n1;
    rec.n2 = cfg.n2;
    return rec;
}

KernelSpec resolve_kernel(const RunConfig& cfg, const ProblemDef& problem,
                          const StackedDecision& x0, const PointSet& r0, std::string& how) {
    if (cfg.kernel == "auto") {
        how = "auto";
        return select_kernel(problem, x0, r0);
    }
    if (cfg.kernel == "paper-table-3") {
        how = "paper-table-3";
        return paper_table3_kernel(cfg.problem);
    }
    how = "fixed";
    if (cfg.kernel == "gaussian") return {KernelFamily::Gaussian, cfg.theta};
    if (cfg.kernel == "laplace") return {KernelFamily::Laplace, cfg.theta};
    throw ContractViolation("unknown kernel '" + cfg.kernel +
                            "' (auto | gaussian | laplace | paper-table-3)");
}

// Newton phase shared by hybrid and mmdn-only arms; fills the record in place.
void newton_phase(RunRecord& rec, const RunConfig& cfg, const ProblemDef& problem,
                  const Population& pop, std::uint64_t seed) {
    const std::size_t mu = pop.individuals.size();
    StackedDecision x0(mu, problem.n, [&] {
        Vec d(mu * problem.n);
        for (std::size_t i = 0; i < mu; ++i)
            for (std::size_t j = 0; j < problem.n; ++j)
                d[i * problem.n + j] = pop.individuals[i].x[j];
        return d;
    }());
    PointSet y0 = population_objectives(pop);

    const auto ref = refset::generate_reference_set(y0, resolved_refset(cfg, mu, seed));
    std::string how;
    const KernelSpec kernel = resolve_kernel(cfg, problem, x0, ref.points, how);
    rec.kernel_family = kernel.family == KernelFamily::Gaussian ? "gaussian" : "laplace";
    rec.kernel_theta = kernel.theta;
    rec.kernel_selected_by = how;

    NewtonOptions opts;
    opts.max_iter = cfg.n2;
    opts.eps = cfg.eps;
    opts.mode = cfg.bounds_mode;
    opts.boundary_margin = cfg.boundary_margin;
    const auto [state, trace] = newton::mmdn_run(x0, problem, ref.points, kernel, opts);

    rec.newton_ledger.plain_evals = trace.plain_evals;
    rec.newton_ledger.jacobian_calls = trace.jacobian_calls;
    rec.newton_ledger.hessian_calls = trace.hessian_calls;
    rec.trace = trace.iterations;
    rec.stop_reason = stop_reason_string(trace.stop);
    rec.final_mmd2 = trace.final_mmd_sq;
    if (trace.stop == StopReason::NonFinite || trace.stop == StopReason::SolveFailure) {
        rec.failed = true;
        rec.fail_reason = rec.stop_reason;
    }

    PointSet y_final;
    for (std::size_t i = 0; i < mu; ++i) y_final.points.push_back(problem.evaluate(state.x.point(i)));
    rec.delta2 = metrics::delta_p(nondominated_subset(y_final), metric_front(problem, cfg), 2.0);
}

}  // namespace

KernelSpec select_kernel(const ProblemDef& problem, const StackedDecision& x0, const PointSet& r0) {
    if (r0.size() == 0 || x0.mu == 0) throw ContractViolation("select_kernel: empty inputs");
    static const double grid[] = {1e-2, 1e-1, 1.0, 10.0, 100.0, 500.0, 1000.0, 5000.0};
    bool found = false;
    KernelSpec best;
    double best_cond = 0.0;
    for (KernelFamily family : {KernelFamily::Gaussian, KernelFamily::Laplace}) {
        for (double theta : grid) {
            const KernelSpec cand(family, theta);
            try {
                Matrix h = mmd::hess_decision(x0, problem, r0, cand);
                const auto pre = newton::precondition(h);
                for (std::size_t i = 0; i < h.rows(); ++i) h(i, i) += pre.tau;
                const double cond = linalg::condition_number(h);
                if (!std::isfinite(cond)) continue;
                if (!found || cond < best_cond) {
                    found = true;
                    best = cand;
                    best_cond = cond;
                }
            } catch (const PreconditionFailure&) {
            } catch (const ContractViolation&) {
            }
        }
    }
    if (!found) throw PreconditionFailure("select_kernel: every grid pair failed preconditioning");
    return best;
}

KernelSpec paper_table3_kernel(const std::string& problem) {
    static const std::map<std::string, KernelSpec> table = {
        {"zdt1", {KernelFamily::Gaussian, 2000.0}}, {"zdt2", {KernelFamily::Gaussian, 2000.0}},
        {"zdt3", {KernelFamily::Gaussian, 2000.0}}, {"zdt4", {KernelFamily::Laplace, 1.0}},
        {"dtlz1", {KernelFamily::Laplace, 500.0}},  {"dtlz2", {KernelFamily::Laplace, 500.0}},
        {"dtlz3", {KernelFamily::Laplace, 500.0}},  {"dtlz4", {KernelFamily::Laplace, 500.0}},
        {"dtlz5", {KernelFamily::Laplace, 500.0}},  {"dtlz6", {KernelFamily::Laplace, 500.0}},
        {"dtlz7", {KernelFamily::Laplace, 500.0}},
    };
    const auto it = table.find(problem);
    if (it == table.end())
        throw ContractViolation("no paper-table-3 preset for problem '" + problem + "'");
    return it->second;
}

RunRecord run_hybrid(const RunConfig& cfg, std::uint64_t seed) {
    Timer timer;
    const ProblemDef problem = problems::make_problem(cfg.problem);
    const std::size_t mu = cfg.resolved_mu(problem.k);
    RunRecord rec = base_record(cfg, seed, mu);
    rec.mode = "hybrid";

    const Population pop = moea::nsga2_run(problem, resolved_moea(cfg, mu, seed), cfg.n1);
    rec.moea_ledger.plain_evals = pop.eval_count;

    if (cfg.n2 == 0) {
        rec.delta2 = metrics::delta_p(nondominated_subset(population_objectives(pop)),
                                      metric_front(problem, cfg), 2.0);
        rec.stop_reason = "no-newton-phase";
    } else {
        newton_phase(rec, cfg, problem, pop, seed);
    }
    rec.wall_ms = timer.ms();
    return rec;
}

RunRecord run_baseline_matched(const RunConfig& cfg, std::uint64_t seed,
                               const RunRecord& hybrid_record) {
    Timer timer;
    const ProblemDef problem = problems::make_problem(cfg.problem);
    const std::size_t mu = cfg.resolved_mu(problem.k);
    Population pop = moea::nsga2_run(problem, resolved_moea(cfg, mu, seed), cfg.n1);

    const double extra_equiv = metrics::equivalent_evals(hybrid_record.newton_ledger);
    const std::size_t extra_gens =
        static_cast<std::size_t>(std::ceil(extra_equiv / static_cast<double>(mu)));
    if (extra_gens > 0)
        pop = moea::nsga2_continue(std::move(pop), problem, resolved_moea(cfg, mu, seed),
                                   extra_gens);

    RunRecord rec = base_record(cfg, seed, mu);
    rec.mode = "baseline-matched";
    rec.moea_ledger.plain_evals = pop.eval_count;
    rec.delta2 = metrics::delta_p(nondominated_subset(population_objectives(pop)),
                                  metric_front(problem, cfg), 2.0);
    rec.stop_reason = "budget-matched";
    rec.wall_ms = timer.ms();
    return rec;
}

std::pair<RunRecord, RunRecord> run_pair(const RunConfig& cfg, std::uint64_t seed) {
    Timer timer;
    const ProblemDef problem = problems::make_problem(cfg.problem);
    const std::size_t mu = cfg.resolved_mu(problem.k);
    RunRecord hyb = base_record(cfg, seed, mu);
    hyb.mode = "hybrid";

    Population pop = moea::nsga2_run(problem, resolved_moea(cfg, mu, seed), cfg.n1);
    hyb.moea_ledger.plain_evals = pop.eval_count;
    if (cfg.n2 == 0) {
        hyb.delta2 = metrics::delta_p(nondominated_subset(population_objectives(pop)),
                                      metric_front(problem, cfg), 2.0);
        hyb.stop_reason = "no-newton-phase";
    } else {
        newton_phase(hyb, cfg, problem, pop, seed);
    }
    hyb.wall_ms = timer.ms();

    Timer timer2;
    const double extra_equiv = metrics::equivalent_evals(hyb.newton_ledger);
    const std::size_t extra_gens =
        static_cast<std::size_t>(std::ceil(extra_equiv / static_cast<double>(mu)));
    if (extra_gens > 0)
        pop = moea::nsga2_continue(std::move(pop), problem, resolved_moea(cfg, mu, seed),
                                   extra_gens);
    RunRecord base = base_record(cfg, seed, mu);
    base.mode = "baseline-matched";
    base.moea_ledger.plain_evals = pop.eval_count;
    base.delta2 = metrics::delta_p(nondominated_subset(population_objectives(pop)),
                                   metric_front(problem, cfg), 2.0);
    base.stop_reason = "budget-matched";
    base.wall_ms = timer2.ms();
    return {std::move(hyb), std::move(base)};
}

RunRecord run_single(const RunConfig& cfg, std::uint64_t seed) {
    if (cfg.mode == RunMode::Hybrid) return run_hybrid(cfg, seed);
    Timer timer;
    const ProblemDef problem = problems::make_problem(cfg.problem);
    const std::size_t mu = cfg.resolved_mu(problem.k);
    RunRecord rec = base_record(cfg, seed, mu);

    if (cfg.mode == RunMode::MoeaAlone) {
        const Population pop = moea::nsga2_run(problem, resolved_moea(cfg, mu, seed), cfg.n1);
        rec.moea_ledger.plain_evals = pop.eval_count;
        rec.delta2 = metrics::delta_p(nondominated_subset(population_objectives(pop)),
                                      metric_front(problem, cfg), 2.0);
        rec.stop_reason = "moea-alone";
    } else {
        // mmdn-only: uniform random start in the box; the initial whole-set
        // evaluation is real work here, so it is counted
        SplitMix64 rng(seed);
        Population pop;
        for (std::size_t i = 0; i < mu; ++i) {
            Vec x(problem.n);
            for (std::size_t j = 0; j < problem.n; ++j)
                x[j] = rng.uniform(problem.lower[j], problem.upper[j]);
            Individual ind;
            ind.f = problem.evaluate(x);
            ind.x = std::move(x);
            pop.individuals.push_back(std::move(ind));
        }
        newton_phase(rec, cfg, problem, pop, seed);
        rec.newton_ledger.plain_evals += mu;
    }
    rec.wall_ms = timer.ms();
    return rec;
}

std::string record_to_json(const RunRecord& rec) {
    json j;
    j["config_hash"] = rec.config_hash;
    j["problem"] = rec.problem;
    j["mode"] = rec.mode;
    j["seed"] = rec.seed;
    j["mu"] = rec.mu;
    j["n1"] = rec.n1;
    j["n2"] = rec.n2;
    j["kernel"] = {{"family", rec.kernel_family},
                   {"theta", rec.kernel_theta},
                   {"selected_by", rec.kernel_selected_by}};
    j["ledger"] = {{"moea",
                    {{"plain", rec.moea_ledger.plain_evals},
                     {"jac", rec.moea_ledger.jacobian_calls},
                     {"hess", rec.moea_ledger.hessian_calls}}},
                   {"newton",
                    {{"plain", rec.newton_ledger.plain_evals},
                     {"jac", rec.newton_ledger.jacobian_calls},
                     {"hess", rec.newton_ledger.hessian_calls}}}};
    j["delta2"] = rec.delta2;
    j["final_mmd2"] = rec.final_mmd2;
    j["stop"] = rec.stop_reason;
    json tr = json::array();
    for (const auto& it : rec.trace)
        tr.push_back({{"iter", it.iteration},
                      {"mmd2", it.mmd_sq},
                      {"grad_norm", it.grad_norm},
                      {"step", it.step},
                      {"tau", it.tau},
                      {"jac", it.jacobian_calls},
                      {"hess", it.hessian_calls},
                      {"evals", it.plain_evals}});
    j["trace"] = tr;
    j["wall_ms"] = rec.wall_ms;
    j["failed"] = rec.failed;
    j["fail_reason"] = rec.fail_reason;
    return j.dump();
}

RunRecord record_from_json(const std::string& line) {
    const json j = json::parse(line);
    RunRecord rec;
    rec.config_hash = j.at("config_hash").get<std::string>();
    rec.problem = j.at("problem").get<std::string>();
    rec.mode = j.at("mode").get<std::string>();
    rec.seed = j.at("seed").get<std::uint64_t>();
    rec.mu = j.at("mu").get<std::size_t>();
    rec.n1 = j.at("n1").get<std::size_t>();
    rec.n2 = j.at("n2").get<std::size_t>();
    rec.kernel_family = j.at("kernel").at("family").get<std::string>();
    rec.kernel_theta = j.at("kernel").at("theta").get<double>();
    rec.kernel_selected_by = j.at("kernel").at("selected_by").get<std::string>();
    rec.moea_ledger.plain_evals = j.at("ledger").at("moea").at("plain").get<std::size_t>();
    rec.moea_ledger.jacobian_calls = j.at("ledger").at("moea").at("jac").get<std::size_t>();
    rec.moea_ledger.hessian_calls = j.at("ledger").at("moea").at("hess").get<std::size_t>();
    rec.newton_ledger.plain_evals = j.at("ledger").at("newton").at("plain").get<std::size_t>();
    rec.newton_ledger.jacobian_calls = j.at("ledger").at("newton").at("jac").get<std::size_t>();
    rec.newton_ledger.hessian_calls = j.at("ledger").at("newton").at("hess").get<std::size_t>();
    rec.delta2 = j.at("delta2").get<double>();
    rec.final_mmd2 = j.at("final_mmd2").get<double>();
    rec.stop_reason = j.at("stop").get<std::string>();
    for (const auto& t : j.at("trace")) {
        IterationRecord it;
        it.iteration = t.at("iter").get<std::size_t>();
        it.mmd_sq = t.at("mmd2").get<double>();
        it.grad_norm = t.at("grad_norm").get<double>();
        it.step = t.at("step").get<double>();
        it.tau = t.at("tau").get<double>();
        it.jacobian_calls = t.at("jac").get<std::size_t>();
        it.hessian_calls = t.at("hess").get<std::size_t>();
        it.plain_evals = t.at("evals").get<std::size_t>();
        rec.trace.push_back(it);
    }
    rec.wall_ms = j.at("wall_ms").get<double>();
    rec.failed = j.at("failed").get<bool>();
    rec.fail_reason = j.at("fail_reason").get<std::string>();
    return rec;
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw ContractViolation("quantile: empty sample");
    std::sort(values.begin(), values.end());
    const double h = q * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= values.size()) return values.back();
    return values[lo] + (h - std::floor(h)) * (values[lo + 1] - values[lo]);
}

std::vector<StatsRow> aggregate(const std::vector<RunRecord>& records) {
    std::map<std::pair<std::string, std::string>, std::vector<const RunRecord*>> groups;
    for (const auto& r : records)
        if (!r.failed) groups[{r.problem, r.mode}].push_back(&r);
    std::vector<StatsRow> rows;
    for (const auto& [key, recs] : groups) {
        StatsRow row;
        row.problem = key.first;
        row.mode = key.second;
        row.count = recs.size();
        std::vector<double> d2, budget;
        for (const auto* r : recs) {
            d2.push_back(r->delta2);
            budget.push_back(metrics::equivalent_evals(r->moea_ledger) +
                             metrics::equivalent_evals(r->newton_ledger));
        }
        row.median_d2 = quantile(d2, 0.5);
        row.q10_d2 = quantile(d2, 0.1);
        row.q90_d2 = quantile(d2, 0.9);
        row.median_budget = quantile(budget, 0.5);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string stats_csv(const std::vector<StatsRow>& rows) {
    std::string out = "problem,mode,seed-count,median_d2,q10_d2,q90_d2,median_budget\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%s,%s,%zu,%.8g,%.8g,%.8g,%.8g\n", r.problem.c_str(),
                      r.mode.c_str(), r.count, r.median_d2, r.q10_d2, r.q90_d2, r.median_budget);
        out += buf;
    }
    return out;
}

RunConfig config_from_json(const std::string& text) {
    const json j = json::parse(text);
    RunConfig cfg;
    if (j.contains("problem")) cfg.problem = j.at("problem").get<std::string>();
    if (j.contains("mode")) cfg.mode = run_mode_from_string(j.at("mode").get<std::string>());
    if (j.contains("mu")) cfg.mu = j.at("mu").get<std::size_t>();
    if (j.contains("n1")) cfg.n1 = j.at("n1").get<std::size_t>();
    if (j.contains("n2")) cfg.n2 = j.at("n2").get<std::size_t>();
    if (j.contains("eps")) cfg.eps = j.at("eps").get<double>();
    if (j.contains("kernel")) cfg.kernel = j.at("kernel").get<std::string>();
    if (j.contains("theta")) cfg.theta = j.at("theta").get<double>();
    if (j.contains("bounds_mode")) {
        const auto s = j.at("bounds_mode").get<std::string>();
        if (s == "active-set") cfg.bounds_mode = BoundsMode::ActiveSet;
        else if (s == "clip") cfg.bounds_mode = BoundsMode::Clip;
        else throw ContractViolation("bounds_mode must be 'active-set' or 'clip'");
    }
    if (j.contains("boundary_margin")) cfg.boundary_margin = j.at("boundary_margin").get<double>();
    if (j.contains("refset")) {
        const auto& r = j.at("refset");
        if (r.contains("delta")) cfg.refset.delta = r.at("delta").get<double>();
        if (r.contains("dbscan_eps")) cfg.refset.dbscan_eps = r.at("dbscan_eps").get<double>();
        if (r.contains("dbscan_min_pts"))
            cfg.refset.dbscan_min_pts = r.at("dbscan_min_pts").get<std::size_t>();
        if (r.contains("fill_multiplier"))
            cfg.refset.fill_multiplier = r.at("fill_multiplier").get<std::size_t>();
        if (r.contains("kmeans_iters"))
            cfg.refset.kmeans_iters = r.at("kmeans_iters").get<std::size_t>();
    }
    if (j.contains("moea")) {
        const auto& m = j.at("moea");
        if (m.contains("crossover_prob"))
            cfg.moea.crossover_prob = m.at("crossover_prob").get<double>();
        if (m.contains("crossover_eta")) cfg.moea.crossover_eta = m.at("crossover_eta").get<double>();
        if (m.contains("mutation_prob")) cfg.moea.mutation_prob = m.at("mutation_prob").get<double>();
        if (m.contains("mutation_eta")) cfg.moea.mutation_eta = m.at("mutation_eta").get<double>();
    }
    if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (j.contains("out")) cfg.out_dir = j.at("out").get<std::string>();
    if (j.contains("front_points_2d"))
        cfg.front_points_2d = j.at("front_points_2d").get<std::size_t>();
    if (j.contains("front_points_3d"))
        cfg.front_points_3d = j.at("front_points_3d").get<std::size_t>();
    if (j.contains("paired_baseline")) cfg.paired_baseline = j.at("paired_baseline").get<bool>();
    return cfg;
}

}  // namespace hybrid
}  // namespace mmdn
