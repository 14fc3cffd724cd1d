#include <doctest.h>

#include <cmath>

#include "mmdn/moea.hpp"
#include "mmdn/rng.hpp"
#include "oracles.hpp"

using namespace mmdn;

TEST_CASE("nondominated_sort: pinned cases") {
    const auto fronts = moea::nondominated_sort({{0.0, 1.0}, {1.0, 0.0}, {1.0, 1.0}});
    REQUIRE(fronts.size() == 2);
    CHECK(fronts[0] == std::vector<std::size_t>{0, 1});
    CHECK(fronts[1] == std::vector<std::size_t>{2});

    const auto same = moea::nondominated_sort({{1.0, 2.0}, {1.0, 2.0}, {1.0, 2.0}});
    REQUIRE(same.size() == 1);
    CHECK(same[0].size() == 3);
}

TEST_CASE("nondominated_sort: agrees with brute force on random instances") {
    SplitMix64 rng(1);
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = 2 + rng.below(59);
        std::vector<Vec> objs;
        for (std::size_t i = 0; i < n; ++i)
            objs.push_back({rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)});
        const auto got = moea::nondominated_sort(objs);
        const auto want = oracle::brute_fronts(objs);
        REQUIRE(got.size() == want.size());
        for (std::size_t f = 0; f < got.size(); ++f) {
            auto a = got[f];
            auto b = want[f];
            std::sort(a.begin(), a.end());
            std::sort(b.begin(), b.end());
            CHECK(a == b);
        }
    }
}

TEST_CASE("crowding_distance: boundaries, middle gap, degenerate range") {
    const Vec two = moea::crowding_distance({{0.0, 1.0}, {1.0, 0.0}});
    CHECK(std::isinf(two[0]));
    CHECK(std::isinf(two[1]));

    const Vec three = moea::crowding_distance({{0.0, 2.0}, {1.0, 1.0}, {2.0, 0.0}});
    CHECK(std::isinf(three[0]));
    CHECK(three[1] == doctest::Approx(2.0));
    CHECK(std::isinf(three[2]));

    const Vec flat = moea::crowding_distance({{0.0, 5.0}, {1.0, 5.0}, {2.0, 5.0}});
    CHECK(flat[1] == doctest::Approx(1.0));  // only the varying objective contributes
    CHECK(std::isfinite(flat[1]));
}

TEST_CASE("nsga2_run: zero generations returns the evaluated random population") {
    const auto p = problems::make_problem("zdt1");
    MoeaConfig cfg;
    cfg.pop_size = 12;
    cfg.seed = 5;
    const auto pop = moea::nsga2_run(p, cfg, 0);
    CHECK(pop.individuals.size() == 12);
    CHECK(pop.eval_count == 12);
    CHECK(pop.generation == 0);
    for (const auto& ind : pop.individuals) {
        CHECK(ind.f == p.evaluate(ind.x));
        for (std::size_t j = 0; j < p.n; ++j) {
            CHECK(ind.x[j] >= p.lower[j]);
            CHECK(ind.x[j] <= p.upper[j]);
        }
    }
}

TEST_CASE("nsga2_run: determinism and eval accounting") {
    const auto p = problems::make_problem("zdt1", 8);
    MoeaConfig cfg;
    cfg.pop_size = 16;
    cfg.seed = 77;
    const auto a = moea::nsga2_run(p, cfg, 25);
    const auto b = moea::nsga2_run(p, cfg, 25);
    CHECK(a.eval_count == 16 * 26);
    CHECK(moea::population_csv(a) == moea::population_csv(b));

    // all decision variables clamped inside the box after mutation
    for (const auto& ind : a.individuals)
        for (std::size_t j = 0; j < p.n; ++j) {
            CHECK(ind.x[j] >= p.lower[j]);
            CHECK(ind.x[j] <= p.upper[j]);
        }
}

TEST_CASE("nsga2_run: reaches the zdt1 front region") {
    const auto p = problems::make_problem("zdt1");
    MoeaConfig cfg;
    cfg.pop_size = 40;
    cfg.seed = 3;
    const auto pop = moea::nsga2_run(p, cfg, 100);

    const auto front = problems::front_sample(p, 500);
    double f1min = 1e9, f1max = -1e9;
    std::vector<double> dists;
    for (const auto& ind : pop.individuals) {
        f1min = std::min(f1min, ind.f[0]);
        f1max = std::max(f1max, ind.f[0]);
        double best = 1e300;
        for (const auto& f : front.points) {
            double d = 0.0;
            for (int c = 0; c < 2; ++c) d += (ind.f[c] - f[c]) * (ind.f[c] - f[c]);
            best = std::min(best, d);
        }
        dists.push_back(std::sqrt(best));
    }
    CHECK(f1max - f1min >= 0.8);
    std::sort(dists.begin(), dists.end());
    CHECK(dists[dists.size() / 2] < 0.1);
}

TEST_CASE("nsga2: elitism never regresses the nondominated set") {
    const auto p = problems::make_problem("zdt1", 10);
    MoeaConfig cfg;
    cfg.pop_size = 20;
    cfg.seed = 11;
    Population pop = moea::nsga2_run(p, cfg, 0);
    for (int g = 0; g < 30; ++g) {
        std::vector<Vec> prev_objs;
        for (const auto& ind : pop.individuals) prev_objs.push_back(ind.f);
        const auto prev_fronts = oracle::brute_fronts(prev_objs);

        pop = moea::nsga2_continue(std::move(pop), p, cfg, 1);
        std::vector<Vec> objs;
        for (const auto& ind : pop.individuals) objs.push_back(ind.f);
        const auto fronts = oracle::brute_fronts(objs);
        for (std::size_t i : fronts[0])
            for (std::size_t j : prev_fronts[0])
                CHECK(!oracle::brute_dominates(prev_objs[j], objs[i]));
    }
    CHECK(pop.eval_count == 20 * 31);
}

TEST_CASE("nsga2_continue matches a longer run with the same seed") {
    const auto p = problems::make_problem("zdt2", 8);
    MoeaConfig cfg;
    cfg.pop_size = 14;
    cfg.seed = 21;
    const auto full = moea::nsga2_run(p, cfg, 30);
    auto part = moea::nsga2_run(p, cfg, 18);
    part = moea::nsga2_continue(std::move(part), p, cfg, 12);
    CHECK(moea::population_csv(full) == moea::population_csv(part));
    CHECK(full.eval_count == part.eval_count);
}

TEST_CASE("population_csv shape") {
    const auto p = problems::make_problem("toy-biobj");
    MoeaConfig cfg;
    cfg.pop_size = 6;
    cfg.seed = 1;
    const auto pop = moea::nsga2_run(p, cfg, 2);
    const std::string csv = moea::population_csv(pop);
    std::size_t lines = 0;
    for (char c : csv)
        if (c == '\n') ++lines;
    CHECK(lines == 7);  // header + 6 rows
    CHECK(csv.rfind("x0,x1,f0,f1,rank,crowding", 0) == 0);
}
