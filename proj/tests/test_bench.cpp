#include <catch2/catch_amalgamated.hpp>

#include "idgp/bench.hpp"
#include "idgp/gen.hpp"

using namespace idgp;

namespace {

BenchPlan small_plan() {
    BenchPlan plan;
    for (std::uint64_t seed : {101, 102}) {
        FeasibleInstanceConfig cfg;
        cfg.n = 8;
        cfg.K = 2;
        cfg.seed = seed;
        plan.instances.push_back(random_feasible_instance(cfg));
        plan.instance_names.push_back("rand" + std::to_string(seed));
    }
    plan.combos = {{"ms", "idgp1"}, {"vns", "idgp3"}};
    plan.seeds = {7};
    plan.time_limit_s = 0.5;
    plan.max_restarts = 8;
    return plan;
}

} // namespace

TEST_CASE("bench plan validation") {
    BenchPlan plan = small_plan();
    plan.combos.push_back({"mwu", "idgp3"}); // infeasible pairing
    CHECK_THROWS_AS(plan.validate(), DomainError);

    plan = small_plan();
    plan.combos.push_back({"ms", "imwu"}); // pointwise needs MWU
    CHECK_THROWS_AS(plan.validate(), DomainError);

    plan = small_plan();
    plan.seeds.clear();
    CHECK_THROWS_AS(plan.validate(), DomainError);

    CHECK(combo_supported({"mwu", "imwu"}));
    CHECK(supported_combinations().size() == 15);
}

TEST_CASE("bench grid shape and averages") {
    const BenchReport report = run_bench(small_plan());
    CHECK(report.rows.size() == 4); // 2 instances x 2 combos x 1 seed
    CHECK(report.averages.size() == 2);

    // Averages must recompute exactly from the rows.
    for (const auto& avg : report.averages) {
        double phi_sum = 0.0;
        int count = 0;
        for (const auto& r : report.rows)
            if (r.ok && r.solver == avg.combo.solver && r.formulation == avg.combo.formulation) {
                phi_sum += r.phi;
                ++count;
            }
        REQUIRE(count == avg.cells);
        CHECK(avg.phi == Catch::Approx(phi_sum / count).margin(1e-12));
    }

    for (const auto& r : report.rows) {
        CHECK(r.ok);
        CHECK(r.phi <= r.psi + 1e-15);
    }

    // CSV: header + 4 rows + 2 average lines.
    const std::string csv = bench_csv(report);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 4 + 2);
    CHECK(csv.rfind("instance,solver,formulation,seed,phi,psi,demi,cpu_s,status\n", 0) == 0);
}

TEST_CASE("bench determinism in serial and parallel modes") {
    BenchPlan serial = small_plan();
    const std::string csv1 = bench_csv(run_bench(serial));
    const std::string csv2 = bench_csv(run_bench(serial));
    CHECK(csv1 == csv2);

    BenchPlan parallel = small_plan();
    parallel.workers = 4;
    const std::string csv3 = bench_csv(run_bench(parallel));
    const std::string csv4 = bench_csv(run_bench(parallel));
    CHECK(csv3 == csv4);
    CHECK(csv1 == csv3); // worker count never changes the report
}

TEST_CASE("classification is a pure function of the rows") {
    const BenchReport report = run_bench(small_plan());
    const auto again = classify_hard(report.rows, {{"ms", "idgp1"}, {"vns", "idgp3"}});
    CHECK(again == report.hard);

    // Hand-built rows: one instance solved fast by both combos, one by none.
    std::vector<BenchRow> rows(4);
    rows[0] = {"easy1", "ms", "idgp1", 1, 1e-9, 1e-8, std::nullopt, 0.01, "solved", true};
    rows[1] = {"easy1", "vns", "idgp3", 1, 1e-9, 1e-8, std::nullopt, 0.02, "solved", true};
    rows[2] = {"hard1", "ms", "idgp1", 1, 0.5, 2.0, std::nullopt, 0.5, "budget", true};
    rows[3] = {"hard1", "vns", "idgp3", 1, 1e-9, 1e-8, std::nullopt, 30.0, "budget", true};
    const auto cls = classify_hard(rows, {{"ms", "idgp1"}, {"vns", "idgp3"}});
    CHECK_FALSE(cls.at("easy1"));
    CHECK(cls.at("hard1")); // fast enough solves: zero of two combinations
}

TEST_CASE("ranking is sorted by average phi") {
    const BenchReport report = run_bench(small_plan());
    REQUIRE(report.ranking.size() == 2);
    CHECK(report.ranking[0].phi <= report.ranking[1].phi);
    CHECK_FALSE(ranking_table(report).empty());

    const nlohmann::json j = bench_json(report);
    CHECK(j["rows"].size() == 4);
    CHECK(j["ranking"].size() == 2);
    CHECK(j["classification"].size() == 2);
}

TEST_CASE("per-cell failures are recorded, not fatal") {
    BenchPlan plan = small_plan();
    // An instance with an empty edge set makes phi throw inside the cell.
    plan.instances.push_back(IdgpInstance(3, 2, {}));
    plan.instance_names.push_back("empty");
    const BenchReport report = run_bench(plan);
    int errors = 0;
    for (const auto& r : report.rows)
        if (!r.ok) {
            ++errors;
            CHECK(r.status.rfind("error:", 0) == 0);
        }
    CHECK(errors == 2); // one per combination on the degenerate instance
}
