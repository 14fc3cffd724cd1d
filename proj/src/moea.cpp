#include "mmdn/moea.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "mmdn/rng.hpp"
#include "mmdn/types.hpp"

namespace mmdn::moea {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Deb's bounded simulated binary crossover, one variable.
void sbx_variable(double p1, double p2, double lo, double hi, double eta, double rand,
                  double& c1, double& c2) {
    const double y1 = std::min(p1, p2), y2 = std::max(p1, p2);
    const double span = y2 - y1;

    double beta = 1.0 + 2.0 * (y1 - lo) / span;
    double alpha = 2.0 - std::pow(beta, -(eta + 1.0));
    double betaq = rand <= 1.0 / alpha
                       ? std::pow(rand * alpha, 1.0 / (eta + 1.0))
                       : std::pow(1.0 / (2.0 - rand * alpha), 1.0 / (eta + 1.0));
    c1 = 0.5 * ((y1 + y2) - betaq * span);

    beta = 1.0 + 2.0 * (hi - y2) / span;
    alpha = 2.0 - std::pow(beta, -(eta + 1.0));
    betaq = rand <= 1.0 / alpha ? std::pow(rand * alpha, 1.0 / (eta + 1.0))
                                : std::pow(1.0 / (2.0 - rand * alpha), 1.0 / (eta + 1.0));
    c2 = 0.5 * ((y1 + y2) + betaq * span);

    c1 = std::clamp(c1, lo, hi);
    c2 = std::clamp(c2, lo, hi);
}

// Deb's bounded polynomial mutation, in place.
void polynomial_mutation(Vec& x, const ProblemDef& problem, double pm, double eta,
                         SplitMix64& rng) {
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (rng.uniform() > pm) continue;
        const double lo = problem.lower[j], hi = problem.upper[j];
        const double span = hi - lo;
        const double y = x[j];
        const double d1 = (y - lo) / span, d2 = (hi - y) / span;
        const double rnd = rng.uniform();
        const double mpow = 1.0 / (eta + 1.0);
        double deltaq = 0.0;
        if (rnd <= 0.5) {
            const double xy = 1.0 - d1;
            const double val = 2.0 * rnd + (1.0 - 2.0 * rnd) * std::pow(xy, eta + 1.0);
            deltaq = std::pow(val, mpow) - 1.0;
        } else {
            const double xy = 1.0 - d2;
            const double val = 2.0 * (1.0 - rnd) + 2.0 * (rnd - 0.5) * std::pow(xy, eta + 1.0);
            deltaq = 1.0 - std::pow(val, mpow);
        }
        x[j] = std::clamp(y + deltaq * span, lo, hi);
    }
}

// binary tournament on (rank, crowding, index)
std::size_t tournament(const Population& pop, SplitMix64& rng) {
    const std::size_t a = rng.below(pop.individuals.size());
    const std::size_t b = rng.below(pop.individuals.size());
    const auto& ia = pop.individuals[a];
    const auto& ib = pop.individuals[b];
    if (ia.rank != ib.rank) return ia.rank < ib.rank ? a : b;
    if (ia.crowding != ib.crowding) return ia.crowding > ib.crowding ? a : b;
    return std::min(a, b);
}

// assign ranks and per-front crowding to every individual
void evaluate_fitness(std::vector<Individual>& inds) {
    std::vector<Vec> objs;
    objs.reserve(inds.size());
    for (const auto& i : inds) objs.push_back(i.f);
    const auto fronts = nondominated_sort(objs);
    for (std::size_t fi = 0; fi < fronts.size(); ++fi) {
        std::vector<Vec> fobjs;
        for (std::size_t idx : fronts[fi]) fobjs.push_back(objs[idx]);
        const Vec dist = crowding_distance(fobjs);
        for (std::size_t p = 0; p < fronts[fi].size(); ++p) {
            inds[fronts[fi][p]].rank = fi;
            inds[fronts[fi][p]].crowding = dist[p];
        }
    }
}

// (mu+mu) environmental selection
std::vector<Individual> select_mu(std::vector<Individual> combined, std::size_t mu) {
    std::vector<Vec> objs;
    objs.reserve(combined.size());
    for (const auto& i : combined) objs.push_back(i.f);
    const auto fronts = nondominated_sort(objs);

    std::vector<Individual> next;
    next.reserve(mu);
    for (std::size_t fi = 0; fi < fronts.size() && next.size() < mu; ++fi) {
        std::vector<Vec> fobjs;
        for (std::size_t idx : fronts[fi]) fobjs.push_back(objs[idx]);
        const Vec dist = crowding_distance(fobjs);
        std::vector<std::size_t> order(fronts[fi].size());
        std::iota(order.begin(), order.end(), 0);
        if (next.size() + fronts[fi].size() > mu) {
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                if (dist[a] != dist[b]) return dist[a] > dist[b];
                return fronts[fi][a] < fronts[fi][b];
            });
        }
        for (std::size_t p : order) {
            if (next.size() == mu) break;
            Individual ind = combined[fronts[fi][p]];
            ind.rank = fi;
            ind.crowding = dist[p];
            next.push_back(std::move(ind));
        }
    }
    return next;
}

void advance_generation(Population& pop, const ProblemDef& problem, const MoeaConfig& cfg,
                        SplitMix64& rng) {
    const std::size_t mu = cfg.pop_size;
    const double pm = cfg.mutation_prob > 0.0 ? cfg.mutation_prob
                                              : 1.0 / static_cast<double>(problem.n);
    std::vector<Individual> offspring;
    offspring.reserve(mu);
    while (offspring.size() < mu) {
        const auto& p1 = pop.individuals[tournament(pop, rng)];
        const auto& p2 = pop.individuals[tournament(pop, rng)];
        Vec c1 = p1.x, c2 = p2.x;
        if (rng.uniform() <= cfg.crossover_prob) {
            for (std::size_t j = 0; j < problem.n; ++j) {
                if (rng.uniform() > 0.5) continue;
                if (std::fabs(c1[j] - c2[j]) < 1e-14) continue;
                double a = 0.0, b = 0.0;
                sbx_variable(c1[j], c2[j], problem.lower[j], problem.upper[j],
                             cfg.crossover_eta, rng.uniform(), a, b);
                if (rng.uniform() <= 0.5) std::swap(a, b);
                c1[j] = a;
                c2[j] = b;
            }
        }
        polynomial_mutation(c1, problem, pm, cfg.mutation_eta, rng);
        polynomial_mutation(c2, problem, pm, cfg.mutation_eta, rng);
        offspring.push_back({std::move(c1), {}, 0, 0.0});
        if (offspring.size() < mu) offspring.push_back({std::move(c2), {}, 0, 0.0});
    }
    for (auto& o : offspring) o.f = problem.evaluate(o.x);
    pop.eval_count += offspring.size();

    std::vector<Individual> combined = pop.individuals;
    combined.insert(combined.end(), std::make_move_iterator(offspring.begin()),
                    std::make_move_iterator(offspring.end()));
    pop.individuals = select_mu(std::move(combined), mu);
    pop.generation++;
}

}  // namespace

std::vector<std::vector<std::size_t>> nondominated_sort(const std::vector<Vec>& objectives) {
    const std::size_t n = objectives.size();
    if (n == 0) throw ContractViolation("nondominated_sort: empty input");
    std::vector<std::size_t> dom_count(n, 0);
    std::vector<std::vector<std::size_t>> dominated(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            if (dominates(objectives[i], objectives[j])) dominated[i].push_back(j);
            else if (dominates(objectives[j], objectives[i])) dom_count[i]++;
        }
    std::vector<std::vector<std::size_t>> fronts;
    std::vector<std::size_t> current;
    for (std::size_t i = 0; i < n; ++i)
        if (dom_count[i] == 0) current.push_back(i);
    while (!current.empty()) {
        fronts.push_back(current);
        std::vector<std::size_t> next;
        for (std::size_t i : current)
            for (std::size_t j : dominated[i])
                if (--dom_count[j] == 0) next.push_back(j);
        std::sort(next.begin(), next.end());
        current = std::move(next);
    }
    return fronts;
}

Vec crowding_distance(const std::vector<Vec>& front) {
    const std::size_t n = front.size();
    if (n == 0) throw ContractViolation("crowding_distance: empty front");
    Vec dist(n, 0.0);
    if (n <= 2) {
        std::fill(dist.begin(), dist.end(), kInf);
        return dist;
    }
    const std::size_t k = front.front().size();
    std::vector<std::size_t> order(n);
    for (std::size_t d = 0; d < k; ++d) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return front[a][d] < front[b][d];
        });
        dist[order.front()] = kInf;
        dist[order.back()] = kInf;
        const double range = front[order.back()][d] - front[order.front()][d];
        if (range <= 0.0) continue;  // degenerate objective: contributes nothing
        for (std::size_t p = 1; p + 1 < n; ++p) {
            if (dist[order[p]] == kInf) continue;
            dist[order[p]] += (front[order[p + 1]][d] - front[order[p - 1]][d]) / range;
        }
    }
    return dist;
}

Population nsga2_run(const ProblemDef& problem, const MoeaConfig& cfg, std::size_t generations) {
    if (cfg.pop_size < 2) throw ContractViolation("nsga2_run: population size must be >= 2");
    SplitMix64 rng(cfg.seed);
    Population pop;
    pop.individuals.reserve(cfg.pop_size);
    for (std::size_t i = 0; i < cfg.pop_size; ++i) {
        Vec x(problem.n);
        for (std::size_t j = 0; j < problem.n; ++j)
            x[j] = rng.uniform(problem.lower[j], problem.upper[j]);
        Individual ind;
        ind.f = problem.evaluate(x);
        ind.x = std::move(x);
        pop.individuals.push_back(std::move(ind));
    }
    pop.eval_count = cfg.pop_size;
    evaluate_fitness(pop.individuals);

    for (std::size_t g = 0; g < generations; ++g) advance_generation(pop, problem, cfg, rng);
    pop.rng_state = rng.state();
    return pop;
}

Population nsga2_continue(Population pop, const ProblemDef& problem, const MoeaConfig& cfg,
                          std::size_t extra_generations) {
    SplitMix64 rng(0);
    rng.set_state(pop.rng_state);
    for (std::size_t g = 0; g < extra_generations; ++g)
        advance_generation(pop, problem, cfg, rng);
    pop.rng_state = rng.state();
    return pop;
}

std::string population_csv(const Population& pop) {
    std::string out;
    if (pop.individuals.empty()) return out;
    const std::size_t n = pop.individuals.front().x.size();
    const std::size_t k = pop.individuals.front().f.size();
    for (std::size_t j = 0; j < n; ++j) out += "x" + std::to_string(j) + ",";
    for (std::size_t j = 0; j < k; ++j) out += "f" + std::to_string(j) + ",";
    out += "rank,crowding\n";
    char buf[64];
    for (const auto& ind : pop.individuals) {
        for (double v : ind.x) {
            std::snprintf(buf, sizeof(buf), "%.17g,", v);
            out += buf;
        }
        for (double v : ind.f) {
            std::snprintf(buf, sizeof(buf), "%.17g,", v);
            out += buf;
        }
        std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", ind.rank, ind.crowding);
        out += buf;
    }
    return out;
}

}  // namespace mmdn::moea
