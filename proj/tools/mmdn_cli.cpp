// Command-line driver: single runs, multi-seed benchmarks, record
// aggregation, and a quick self-check battery.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <thread>

#include "mmdn/hybrid.hpp"
#include "mmdn/rng.hpp"
#include "mmdn/tolerances.hpp"

namespace fs = std::filesystem;
using namespace mmdn;

namespace {

struct CliOverrides {
    std::string problem, mode, kernel, bounds, out;
    std::size_t mu = 0, n1 = 0, n2 = 0, jobs = 0;
    double theta = 0.0, eps = 0.0;
    std::string seeds_csv;
    std::string config_path;
};

std::vector<std::uint64_t> parse_seeds(const std::string& csv) {
    std::vector<std::uint64_t> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) out.push_back(std::stoull(tok));
    }
    if (out.empty()) throw ContractViolation("--seeds: no seeds parsed");
    return out;
}

RunConfig build_config(const CliOverrides& o, const CLI::App* cmd) {
    RunConfig cfg;
    if (!o.config_path.empty()) {
        std::ifstream in(o.config_path);
        if (!in) throw ContractViolation("cannot open config file " + o.config_path);
        std::stringstream buf;
        buf << in.rdbuf();
        cfg = hybrid::config_from_json(buf.str());
    }
    if (cmd->count("--problem")) cfg.problem = o.problem;
    if (cmd->count("--mode")) cfg.mode = run_mode_from_string(o.mode);
    if (cmd->count("--mu")) cfg.mu = o.mu;
    if (cmd->count("--n1")) cfg.n1 = o.n1;
    if (cmd->count("--n2")) cfg.n2 = o.n2;
    if (cmd->count("--kernel")) cfg.kernel = o.kernel;
    if (cmd->count("--theta")) cfg.theta = o.theta;
    if (cmd->count("--eps")) cfg.eps = o.eps;
    if (cmd->count("--bounds")) {
        if (o.bounds == "active-set") cfg.bounds_mode = BoundsMode::ActiveSet;
        else if (o.bounds == "clip") cfg.bounds_mode = BoundsMode::Clip;
        else throw ContractViolation("--bounds must be 'active-set' or 'clip'");
    }
    if (cmd->count("--seeds")) cfg.seeds = parse_seeds(o.seeds_csv);
    if (cmd->count("--out")) cfg.out_dir = o.out;
    return cfg;
}

void add_common_flags(CLI::App* cmd, CliOverrides& o) {
    cmd->add_option("--problem", o.problem, "benchmark problem name");
    cmd->add_option("--mode", o.mode, "hybrid | moea-alone | mmdn-only");
    cmd->add_option("--mu", o.mu, "approximation set size");
    cmd->add_option("--n1", o.n1, "MOEA generations");
    cmd->add_option("--n2", o.n2, "Newton iterations");
    cmd->add_option("--kernel", o.kernel, "auto | gaussian | laplace | paper-table-3");
    cmd->add_option("--theta", o.theta, "kernel length-scale (with an explicit family)");
    cmd->add_option("--eps", o.eps, "gradient-norm stopping threshold");
    cmd->add_option("--bounds", o.bounds, "active-set | clip");
    cmd->add_option("--seeds", o.seeds_csv, "comma-separated seed list");
    cmd->add_option("--out", o.out, "output directory");
    cmd->add_option("--config", o.config_path, "JSON config file");
}

std::vector<RunRecord> execute_seed(const RunConfig& cfg, std::uint64_t seed) {
    std::vector<RunRecord> out;
    if (cfg.mode == RunMode::Hybrid && cfg.paired_baseline) {
        auto [hyb, base] = hybrid::run_pair(cfg, seed);
        out.push_back(std::move(hyb));
        out.push_back(std::move(base));
    } else {
        out.push_back(hybrid::run_single(cfg, seed));
    }
    return out;
}

void append_records(const fs::path& file, const std::vector<RunRecord>& recs) {
    std::ofstream out(file, std::ios::app);
    for (const auto& r : recs) out << hybrid::record_to_json(r) << "\n";
}

int cmd_run(const RunConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    const std::uint64_t seed = cfg.seeds.front();
    const auto recs = execute_seed(cfg, seed);
    append_records(fs::path(cfg.out_dir) / "records.jsonl", recs);
    for (const auto& r : recs)
        std::printf("%-10s %-18s seed=%llu delta2=%.6g budget=%.1f %s\n", r.problem.c_str(),
                    r.mode.c_str(), static_cast<unsigned long long>(r.seed), r.delta2,
                    metrics::equivalent_evals(r.moea_ledger) +
                        metrics::equivalent_evals(r.newton_ledger),
                    r.failed ? ("FAILED: " + r.fail_reason).c_str() : "");
    return 0;
}

int cmd_bench(const RunConfig& cfg, std::size_t jobs) {
    fs::create_directories(cfg.out_dir);
    if (jobs == 0) jobs = std::max<std::size_t>(1, std::thread::hardware_concurrency());

    // each worker writes its own temp file; merged in seed order afterwards
    std::vector<fs::path> temp_files(cfg.seeds.size());
    std::vector<std::future<bool>> futures(cfg.seeds.size());
    std::size_t next = 0, running = 0, failures = 0;
    std::vector<std::size_t> in_flight;

    auto launch = [&](std::size_t idx) {
        const std::uint64_t seed = cfg.seeds[idx];
        temp_files[idx] = fs::path(cfg.out_dir) /
                          ("records.seed" + std::to_string(seed) + ".tmp");
        futures[idx] = std::async(std::launch::async, [&cfg, seed, file = temp_files[idx]] {
            try {
                const auto recs = execute_seed(cfg, seed);
                std::ofstream out(file);
                bool ok = true;
                for (const auto& r : recs) {
                    out << hybrid::record_to_json(r) << "\n";
                    ok = ok && !r.failed;
                }
                return ok;
            } catch (const std::exception& e) {
                std::fprintf(stderr, "seed %llu failed: %s\n",
                             static_cast<unsigned long long>(seed), e.what());
                return false;
            }
        });
    };

    while (next < cfg.seeds.size() || running > 0) {
        while (next < cfg.seeds.size() && running < jobs) {
            launch(next);
            in_flight.push_back(next);
            ++next;
            ++running;
        }
        const std::size_t idx = in_flight.front();
        in_flight.erase(in_flight.begin());
        const bool ok = futures[idx].get();
        --running;
        if (!ok) ++failures;
        std::printf("seed %llu %s\n", static_cast<unsigned long long>(cfg.seeds[idx]),
                    ok ? "done" : "FAILED");
        std::fflush(stdout);
    }

    std::ofstream merged(fs::path(cfg.out_dir) / "records.jsonl", std::ios::app);
    for (const auto& f : temp_files) {
        std::ifstream in(f);
        merged << in.rdbuf();
        std::error_code ec;
        fs::remove(f, ec);
    }
    std::printf("bench complete: %zu seeds, %zu failed\n", cfg.seeds.size(), failures);
    return failures == 0 ? 0 : 1;
}

int cmd_stats(const std::string& records_path, const std::string& out_dir) {
    std::ifstream in(records_path);
    if (!in) {
        std::fprintf(stderr, "cannot open %s\n", records_path.c_str());
        return 1;
    }
    std::vector<RunRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        records.push_back(hybrid::record_from_json(line));
    }
    const auto rows = hybrid::aggregate(records);
    const std::string csv = hybrid::stats_csv(rows);
    fs::create_directories(out_dir);
    std::ofstream out(fs::path(out_dir) / "summary.csv");
    out << csv;
    std::fputs(csv.c_str(), stdout);

    // win/loss by median: hybrid vs the budget-matched baseline
    std::size_t wins = 0, losses = 0, ties = 0;
    for (const auto& h : rows) {
        if (h.mode != "hybrid") continue;
        for (const auto& b : rows) {
            if (b.mode != "baseline-matched" || b.problem != h.problem) continue;
            if (h.median_d2 < b.median_d2) ++wins;
            else if (h.median_d2 > b.median_d2) ++losses;
            else ++ties;
        }
    }
    if (wins + losses + ties > 0)
        std::printf("hybrid vs baseline-matched medians: %zu wins / %zu ties / %zu losses\n", wins,
                    ties, losses);
    return 0;
}

// ---- quick self-check battery --------------------------------------------

int g_check_failures = 0;

void report(const std::string& name, bool ok, const std::string& detail = "") {
    std::printf("[%s] %s%s%s\n", ok ? "ok" : "FAIL", name.c_str(), detail.empty() ? "" : ": ",
                detail.c_str());
    if (!ok) ++g_check_failures;
}

void check_battery() {
    {
        Matrix a(2, 2);
        a(0, 0) = -1.0;
        a(1, 1) = 2.0;
        const auto pre = newton::precondition(a);
        report("precondition diag(-1,2) trace",
               pre.attempts == 2 && pre.tau == 1.0 + tol::kPrecondBeta);
    }
    {
        const KernelSpec spec(KernelFamily::Gaussian, 1.0);
        const Vec a{1.0, 0.0}, b{0.0, 0.0};
        const Vec g = kernels::grad(spec, a, b);
        const double h = 1e-6;
        Vec bp = b, bm = b;
        bp[0] += h;
        bm[0] -= h;
        const double fd = (kernels::value(spec, a, bp) - kernels::value(spec, a, bm)) / (2.0 * h);
        report("gaussian kernel gradient vs finite difference", std::fabs(g[0] - fd) < 1e-6);
    }
    {
        const auto m = kernels::spectral_moments(KernelSpec(KernelFamily::Gaussian, 1.0), 2);
        report("gaussian spectral m2 = 2*theta*k", m.m2 == 4.0 && m.m4 == 32.0);
    }
    {
        bool ok = true;
        std::string detail;
        SplitMix64 rng(7);
        for (const auto& name : problems::available()) {
            const auto p = problems::make_problem(name);
            Vec x(p.n);
            for (std::size_t j = 0; j < p.n; ++j)
                x[j] = p.lower[j] + (0.2 + 0.6 * rng.uniform()) * (p.upper[j] - p.lower[j]);
            const auto rep = problems::check_derivatives(p, x, 1e-6);
            if (rep.jacobian_max_rel > 1e-5 || rep.hessian_max_rel > 1e-4) {
                ok = false;
                detail += name + " ";
            }
        }
        report("analytic derivatives vs finite differences (all problems)", ok, detail);
    }
    {
        PointSet y{{{0.0, 0.0}, {1.0, 0.0}, {-1.0, 0.0}}};
        PointSet r{{{0.0, 1.0}, {0.0, -1.0}}};
        const auto rows = mmd::grad_objective(y, r, KernelSpec(KernelFamily::Gaussian, 1.0));
        report("symmetric configuration is stationary",
               std::fabs(rows[0][0]) <= 1e-12 && std::fabs(rows[0][1]) <= 1e-12);
    }
    {
        const auto p = problems::make_problem("zdt3");
        const auto front = problems::front_sample(p, 100);
        ReferenceSetConfig cfg;
        cfg.target_size = 20;
        const auto comps = refset::detect_components(front, cfg);
        report("zdt3 front has 5 components", comps.size() == 5,
               "got " + std::to_string(comps.size()));
    }
    {
        PointSet y{{{0.0, 1.0}, {1.0, 0.0}}};
        const Vec eta = refset::shift_direction(y);
        const double e = 1.0 / std::sqrt(2.0);
        report("shift direction of (0,1),(1,0)",
               std::fabs(eta[0] + e) < 1e-10 && std::fabs(eta[1] + e) < 1e-10);
    }
    {
        BudgetLedger ledger;
        ledger.jacobian_calls = 10;
        ledger.hessian_calls = 10;
        report("equivalent evals ledger", std::fabs(metrics::equivalent_evals(ledger) - 33.6) < 1e-12);
    }
    {
        std::vector<double> v{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
        const bool ok = std::fabs(hybrid::quantile(v, 0.5) - 0.55) < 1e-12 &&
                        std::fabs(hybrid::quantile(v, 0.1) - 0.19) < 1e-12 &&
                        std::fabs(hybrid::quantile(v, 0.9) - 0.91) < 1e-12;
        report("linear-interpolation quantiles", ok);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"MMD-Newton multi-objective optimization toolkit"};
    app.require_subcommand(1);

    CliOverrides run_o, bench_o;
    auto* run_cmd = app.add_subcommand("run", "execute one configuration for one seed");
    add_common_flags(run_cmd, run_o);
    auto* bench_cmd = app.add_subcommand("bench", "execute a config file across a seed list");
    add_common_flags(bench_cmd, bench_o);
    std::size_t jobs = 0;
    bench_cmd->add_option("--jobs", jobs, "parallel seed workers (default: hardware)");

    std::string records_path = "results/records.jsonl", stats_out = "results";
    auto* stats_cmd = app.add_subcommand("stats", "aggregate records into summary.csv");
    stats_cmd->add_option("--records", records_path, "records.jsonl path");
    stats_cmd->add_option("--out", stats_out, "output directory");

    app.add_subcommand("check", "run the quick invariant/oracle battery");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) return cmd_run(build_config(run_o, run_cmd));
        if (bench_cmd->parsed()) return cmd_bench(build_config(bench_o, bench_cmd), jobs);
        if (stats_cmd->parsed()) return cmd_stats(records_path, stats_out);
        check_battery();
        std::printf("%d failure(s)\n", g_check_failures);
        return g_check_failures == 0 ? 0 : 1;
    } catch (const ContractViolation& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
