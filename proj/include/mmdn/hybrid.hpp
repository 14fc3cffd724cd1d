#pragma once

#include <cstdint>
#include <string>

#include "mmdn/metrics.hpp"
#include "mmdn/moea.hpp"
#include "mmdn/newton.hpp"
#include "mmdn/refset.hpp"

namespace mmdn {

enum class RunMode { Hybrid, MoeaAlone, MmdnOnly };

std::string to_string(RunMode mode);
RunMode run_mode_from_string(const std::string& s);

// One benchmark run: which problem, which algorithm arm, budgets, kernel
// choice and sub-component configurations.
struct RunConfig {
    std::string problem = "zdt1";
    RunMode mode = RunMode::Hybrid;
    std::size_t mu = 0;  // 0 = 40 for bi-objective, 91 for three-objective
    std::size_t n1 = 300;
    std::size_t n2 = 5;
    double eps = 1e-6;
    std::string kernel = "auto";  // auto | gaussian | laplace | paper-table-3
    double theta = 1.0;           // used with an explicit family
    BoundsMode bounds_mode = BoundsMode::ActiveSet;
    double boundary_margin = 1e-9;
    ReferenceSetConfig refset;
    MoeaConfig moea;
    std::vector<std::uint64_t> seeds = {1};
    std::string out_dir = "results";
    std::size_t front_points_2d = 1000;
    std::size_t front_points_3d = 5000;
    bool paired_baseline = true;  // hybrid runs also emit a budget-matched baseline

    std::size_t resolved_mu(std::size_t k) const { return mu ? mu : (k == 2 ? 40 : 91); }
    std::string canonical_string() const;  // seed-independent, for hashing
};

struct RunRecord {
    std::string config_hash;
    std::string problem;
    std::string mode;  // hybrid | moea-alone | mmdn-only | baseline-matched
    std::uint64_t seed = 0;
    std::size_t mu = 0, n1 = 0, n2 = 0;
    std::string kernel_family;  // empty when no Newton phase ran
    double kernel_theta = 0.0;
    std::string kernel_selected_by;
    BudgetLedger moea_ledger;
    BudgetLedger newton_ledger;
    double delta2 = 0.0;
    double final_mmd2 = 0.0;
    std::string stop_reason;
    std::vector<IterationRecord> trace;
    double wall_ms = 0.0;
    bool failed = false;
    std::string fail_reason;
};

namespace hybrid {

// Grid search over {Gaussian, Laplace} x {1e-2 ... 5000}: pick the pair whose
// preconditioned decision-space Hessian at the warm start has the smallest
// condition number. Ties go to Gaussian, then to the smaller theta.
KernelSpec select_kernel(const ProblemDef& problem, const StackedDecision& x0, const PointSet& r0);

// Kernel/length-scale presets reported by the reference experiments.
KernelSpec paper_table3_kernel(const std::string& problem);

RunRecord run_hybrid(const RunConfig& cfg, std::uint64_t seed);
RunRecord run_baseline_matched(const RunConfig& cfg, std::uint64_t seed,
                               const RunRecord& hybrid_record);

// Hybrid plus its budget-matched baseline sharing one MOEA phase.
std::pair<RunRecord, RunRecord> run_pair(const RunConfig& cfg, std::uint64_t seed);

// moea-alone / mmdn-only arms.
RunRecord run_single(const RunConfig& cfg, std::uint64_t seed);

std::string record_to_json(const RunRecord& rec);
RunRecord record_from_json(const std::string& line);

// Linear-interpolation quantile of a sample (q in [0,1]).
double quantile(std::vector<double> values, double q);

struct StatsRow {
    std::string problem, mode;
    std::size_t count = 0;
    double median_d2 = 0.0, q10_d2 = 0.0, q90_d2 = 0.0;
    double median_budget = 0.0;
};

std::vector<StatsRow> aggregate(const std::vector<RunRecord>& records);
std::string stats_csv(const std::vector<StatsRow>& rows);

RunConfig config_from_json(const std::string& text);

}  // namespace hybrid
}  // namespace mmdn
