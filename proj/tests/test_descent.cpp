#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "idgp/descent.hpp"
#include "idgp/gen.hpp"
#include "idgp/measures.hpp"
#include "test_util.hpp"

using namespace idgp;

TEST_CASE("descent leaves a valid realization in place") {
    FeasibleInstanceConfig cfg;
    cfg.n = 10;
    cfg.K = 3;
    cfg.seed = 8;
    const IdgpInstance inst = random_feasible_instance(cfg);
    auto merit = build_penalty_merit(inst, PenaltyVariant::Base);
    const Realization start = inst.reference()->centered();

    const DescentResult r = local_descent(*merit, merit->init_vars(start), {}, default_box(inst));
    CHECK(r.converged);
    CHECK(r.iterations == 0);
    CHECK(merit->extract(r.vars).points().isApprox(start.points(), 1e-12));
}

TEST_CASE("two-point instance converges to the closed-form distance") {
    IdgpInstance inst(2, 3, {{1, 2, 1.0, 1.0}});
    auto merit = build_penalty_merit(inst, PenaltyVariant::Base);
    Eigen::MatrixXd p(2, 3);
    p << -1.0, 0, 0, 1.0, 0, 0; // distance 2 along an axis
    const DescentResult r =
        local_descent(*merit, merit->init_vars(Realization(p)), {}, default_box(inst));
    CHECK(r.converged);
    const Realization sol = merit->extract(r.vars);
    CHECK(sol.distance(1, 2) == Catch::Approx(1.0).margin(1e-6));
    CHECK(sol.centroid().norm() < 1e-10);
}

TEST_CASE("merit trace is non-increasing") {
    FeasibleInstanceConfig cfg;
    cfg.n = 12;
    cfg.K = 2;
    cfg.seed = 9;
    const IdgpInstance inst = random_feasible_instance(cfg);
    auto merit = build_penalty_merit(inst, PenaltyVariant::Base);
    std::mt19937_64 rng(10);
    const Realization start = idgp_test::random_points(12, 2, rng, 3.0);

    const DescentResult r = local_descent(*merit, merit->init_vars(start), {}, default_box(inst));
    REQUIRE(r.trace.size() >= 2);
    for (std::size_t i = 1; i < r.trace.size(); ++i)
        CHECK(r.trace[i] <= r.trace[i - 1] + 1e-12 * (1.0 + std::abs(r.trace[i - 1])));
    CHECK(r.value <= r.trace.front());
}

TEST_CASE("non-finite start is rejected") {
    IdgpInstance inst(2, 2, {{1, 2, 1.0, 1.0}});
    auto merit = build_penalty_merit(inst, PenaltyVariant::Base);
    Eigen::VectorXd bad = Eigen::VectorXd::Zero(merit->dim());
    bad[0] = std::numeric_limits<double>::quiet_NaN();
    // NaN survives the box clamp and is caught by the finiteness check.
    CHECK_THROWS_AS(local_descent(*merit, bad, {}, BoxBounds{-10, 10}), Error);
}

TEST_CASE("virtual budget stops the descent") {
    FeasibleInstanceConfig cfg;
    cfg.n = 20;
    cfg.K = 3;
    cfg.seed = 12;
    const IdgpInstance inst = random_feasible_instance(cfg);
    auto merit = build_penalty_merit(inst, PenaltyVariant::Base);
    std::mt19937_64 rng(13);
    SolveBudget budget;
    budget.virtual_s = 1e-9; // a handful of evaluations at most
    const DescentResult r = local_descent(
        *merit, merit->init_vars(idgp_test::random_points(20, 3, rng, 3.0)), {},
        default_box(inst), &budget);
    CHECK(r.status == "time-limit");
    CHECK(budget.meter.terms() > 0);
}

TEST_CASE("pointwise convex solve reaches tight KKT residuals") {
    // theta = 0: the subproblem reduces to min sum s st s_e >= lo2_e, whose
    // optimum is s = lo2 componentwise.
    FeasibleInstanceConfig cfg;
    cfg.n = 6;
    cfg.K = 2;
    cfg.seed = 14;
    const IdgpInstance inst = random_feasible_instance(cfg);
    auto merit = build_pointwise(inst, Eigen::MatrixXd::Zero(inst.m(), inst.K()));

    LocalSolveConfig deep;
    deep.mu_rounds = 8; // mu up to 1e7
    deep.gradient_tolerance = 2.5e-7;
    deep.max_iterations = 800;
    std::mt19937_64 rng(15);
    const DescentResult r = local_descent(
        *merit, merit->init_vars(idgp_test::random_points(6, 2, rng)), deep, default_box(inst));
    REQUIRE(r.converged);

    double worst_feas = 0.0;
    for (int e = 0; e < inst.m(); ++e) {
        const Edge& ed = inst.edges()[e];
        const double s = r.vars[merit->coord_dim() + e];
        worst_feas = std::max(worst_feas, std::abs(s - ed.lo * ed.lo));
    }
    // KKT at the penalized optimum: stationarity equals the projected
    // gradient (<= 1e-7 by convergence); primal feasibility follows from s
    // matching its analytic optimum.
    CHECK(worst_feas <= 1e-6);
}
