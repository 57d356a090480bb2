#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "idgp/descent.hpp"
#include "idgp/formulations.hpp"
#include "idgp/io.hpp"
#include "idgp/measures.hpp"

namespace idgp {

/// Average-error threshold below which a run is declared solved.
inline constexpr double kSolvedPhi = 1e-6;

struct SolveReport {
    std::string solver;
    std::string formulation;
    std::uint64_t seed = 0;
    double phi = std::numeric_limits<double>::infinity();
    double psi = std::numeric_limits<double>::infinity();
    std::optional<double> demi;
    double cpu_s = 0.0;           // deterministic virtual seconds (WorkMeter)
    double wall_s = 0.0;          // measured wall clock, informational
    double subsolver_wall_s = 0.0; // wall clock spent inside local descents
    long long iterations = 0;
    long long restarts = 0;
    std::string status; // "solved" | "budget"
    Realization best;
};

inline nlohmann::json solve_report_to_json(const SolveReport& r) {
    nlohmann::json j;
    j["solver"] = r.solver;
    j["formulation"] = r.formulation;
    j["seed"] = r.seed;
    j["phi"] = r.phi;
    j["psi"] = r.psi;
    j["demi"] = r.demi ? nlohmann::json(*r.demi) : nlohmann::json(nullptr);
    j["cpu_s"] = r.cpu_s;
    j["wall_s"] = r.wall_s;
    j["subsolver_wall_s"] = r.subsolver_wall_s;
    j["iterations"] = r.iterations;
    j["restarts"] = r.restarts;
    j["status"] = r.status;
    j["realization"] = detail::realization_to_json(r.best);
    return j;
}

namespace detail {

inline Realization sample_uniform(const IdgpInstance& inst, const BoxBounds& box,
                                  std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(box.lo, box.hi);
    Eigen::MatrixXd p(inst.n(), inst.K());
    for (int v = 0; v < inst.n(); ++v)
        for (int k = 0; k < inst.K(); ++k) p(v, k) = u(rng);
    Realization r(std::move(p));
    return r.centered();
}

inline Realization sample_in_rectangle(const Realization& center, double radius,
                                       const BoxBounds& box, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-radius, radius);
    Eigen::MatrixXd p = center.points();
    for (int v = 0; v < p.rows(); ++v)
        for (int k = 0; k < p.cols(); ++k)
            p(v, k) = std::clamp(p(v, k) + u(rng), box.lo, box.hi);
    return Realization(std::move(p)).centered();
}

struct ScoredPoint {
    Realization x;
    double phi = std::numeric_limits<double>::infinity();
    double psi = std::numeric_limits<double>::infinity();
};

inline ScoredPoint descend_and_score(const IdgpInstance& inst, Merit& merit,
                                     const Realization& start, const LocalSolveConfig& cfg,
                                     const BoxBounds& box, SolveBudget& budget,
                                     long long& iterations, double& subsolver_wall_s) {
    const auto t0 = std::chrono::steady_clock::now();
    DescentResult d = local_descent(merit, merit.init_vars(start), cfg, box, &budget);
    subsolver_wall_s += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    iterations += d.iterations;
    ScoredPoint sp;
    sp.x = merit.extract(d.vars);
    sp.phi = phi(inst, sp.x);
    sp.psi = psi(inst, sp.x);
    return sp;
}

} // namespace detail

/// MultiStart: local descents from uniform samples in the coordinate box,
/// keeping the best average error. Restart r draws from an independent RNG
/// stream derived from (seed, r), so any execution schedule agrees.
inline SolveReport multistart(const IdgpInstance& inst, Merit& merit, SolveBudget budget,
                              std::uint64_t seed, const LocalSolveConfig& cfg = {}) {
    const auto wall0 = std::chrono::steady_clock::now();
    const BoxBounds box = default_box(inst);
    SolveReport rep;
    rep.solver = "ms";
    rep.formulation = merit.id();
    rep.seed = seed;
    rep.status = "budget";

    for (long long r = 0; budget.max_restarts == 0 || r < budget.max_restarts; ++r) {
        if (r > 0 && budget.exhausted()) break;
        std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
        auto sp = detail::descend_and_score(inst, merit, detail::sample_uniform(inst, box, rng),
                                            cfg, box, budget, rep.iterations,
                                            rep.subsolver_wall_s);
        ++rep.restarts;
        if (sp.phi < rep.phi) {
            rep.phi = sp.phi;
            rep.psi = sp.psi;
            rep.best = sp.x;
        }
        if (rep.phi < kSolvedPhi) {
            rep.status = "solved";
            break;
        }
    }
    rep.cpu_s = budget.meter.seconds();
    rep.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
    return rep;
}

/// Variable Neighbourhood Search with five hyperrectangle neighbourhoods of
/// radius (k/5) * half box width and at most five descents per
/// neighbourhood; improvement resets k, failure grows it (cyclically).
inline SolveReport vns(const IdgpInstance& inst, Merit& merit, SolveBudget budget,
                       std::uint64_t seed, const LocalSolveConfig& cfg = {}) {
    constexpr int kMaxNeighbourhood = 5;
    constexpr int kSearchesPerNeighbourhood = 5;
    const auto wall0 = std::chrono::steady_clock::now();
    const BoxBounds box = default_box(inst);
    SolveReport rep;
    rep.solver = "vns";
    rep.formulation = merit.id();
    rep.seed = seed;
    rep.status = "budget";

    std::uint64_t stream = 0;
    auto next_rng = [&]() { return std::mt19937_64(derive_seed(seed, stream++)); };

    {
        auto rng = next_rng();
        auto sp = detail::descend_and_score(inst, merit, detail::sample_uniform(inst, box, rng),
                                            cfg, box, budget, rep.iterations,
                                            rep.subsolver_wall_s);
        ++rep.restarts;
        rep.phi = sp.phi;
        rep.psi = sp.psi;
        rep.best = sp.x;
    }

    int k = 1;
    while (rep.phi >= kSolvedPhi && !budget.exhausted() &&
           (budget.max_restarts == 0 || rep.restarts < budget.max_restarts)) {
        const double radius = (static_cast<double>(k) / kMaxNeighbourhood) * 0.5 * box.width();
        bool improved = false;
        for (int probe = 0; probe < kSearchesPerNeighbourhood; ++probe) {
            if (budget.exhausted() ||
                (budget.max_restarts != 0 && rep.restarts >= budget.max_restarts))
                break;
            auto rng = next_rng();
            auto sp = detail::descend_and_score(
                inst, merit, detail::sample_in_rectangle(rep.best, radius, box, rng), cfg, box,
                budget, rep.iterations, rep.subsolver_wall_s);
            ++rep.restarts;
            if (sp.phi < rep.phi) {
                rep.phi = sp.phi;
                rep.psi = sp.psi;
                rep.best = sp.x;
                improved = true;
                break;
            }
        }
        k = improved ? 1 : (k % kMaxNeighbourhood) + 1;
    }
    if (rep.phi < kSolvedPhi) rep.status = "solved";
    rep.cpu_s = budget.meter.seconds();
    rep.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
    return rep;
}

enum class ThetaRule { Figure, Text };

/// Samples the linearization parameters: each component is uniform on the
/// interval between 0 and the endpoint omega_e [* psi_e] (x_uk - x_vk),
/// which may be negative. Drawn as u * endpoint with u ~ U[0,1).
inline ThetaParameters theta_sample(const Realization& x, const IdgpInstance& inst,
                                    const Eigen::VectorXd& omega, const Eigen::VectorXd& psi_vec,
                                    ThetaRule rule, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    ThetaParameters theta(inst.m(), inst.K());
    for (int e = 0; e < inst.m(); ++e) {
        const Edge& ed = inst.edges()[e];
        const double scale = rule == ThetaRule::Figure ? omega[e] * psi_vec[e] : omega[e];
        for (int k = 0; k < inst.K(); ++k) {
            const double endpoint =
                scale * (x.points()(ed.u - 1, k) - x.points()(ed.v - 1, k));
            theta(e, k) = u01(rng) * endpoint;
        }
    }
    return theta;
}

/// Multiplicative-weights rule omega' = omega * (1 - eta * psi), applied
/// componentwise; stays positive for psi in [0,1] and eta <= 1/2.
inline Eigen::VectorXd weight_update(const Eigen::VectorXd& omega, const Eigen::VectorXd& psi_vec,
                                     double eta) {
    return omega.array() * (1.0 - eta * psi_vec.array());
}

struct MwuConfig {
    double eta = 0.5;
    int T = 50;
    ThetaRule theta_rule = ThetaRule::Figure;
    LocalSolveConfig refine;    // penalty refinement (Alg. line 7)
    LocalSolveConfig pointwise; // convex subproblem; deep mu schedule
    MwuConfig() {
        // The subproblem only seeds the penalty refinement, so moderate
        // constraint enforcement and stationarity are enough; stiff mu
        // schedules stall a quasi-Newton on the active-set ridges.
        pointwise.mu_rounds = 3;
        pointwise.gradient_tolerance = 1e-3;
        pointwise.max_iterations = 1500;
        pointwise.lbfgs_memory = 16;
        refine.max_iterations = 2500;
    }
};

struct MwuState {
    double eta = 0.5;
    int iterations = 0; // completed MWU iterations
    Eigen::VectorXd omega;
    std::vector<Eigen::VectorXd> psi_trace;
    std::vector<double> omega_avg_trace; // Omega^t = psi^t . rho^t
    double incumbent_omega = std::numeric_limits<double>::infinity();
    int skipped = 0; // pointwise subproblems that failed to converge
};

/// Regret-bound sides: min_t Omega^t and
/// (1/T)(ln m / eta + (1+eta) min_e sum_t psi^t_e).
inline std::pair<double, double> mwu_regret_bound(const MwuState& st, int m) {
    const int T = st.iterations;
    double lhs = std::numeric_limits<double>::infinity();
    for (double o : st.omega_avg_trace) lhs = std::min(lhs, o);
    Eigen::VectorXd cum = Eigen::VectorXd::Zero(m);
    for (const auto& p : st.psi_trace) cum += p;
    const double rhs = (std::log(static_cast<double>(m)) / st.eta +
                        (1.0 + st.eta) * cum.minCoeff()) /
                       std::max(1, T);
    return {lhs, rhs};
}

struct MwuResult {
    SolveReport report;
    MwuState state;
};

/// Multiplicative Weights Update over the pointwise reformulation: each
/// iteration samples theta from the incoming iterate, solves the convex
/// subproblem warm-started from it, refines on the base penalty merit, and
/// reweights edges by their scaled errors. The incumbent is kept by the
/// weighted average error Omega^t.
inline MwuResult mwu(const IdgpInstance& inst, MwuConfig cfg, SolveBudget budget,
                     std::uint64_t seed) {
    if (cfg.eta <= 0.0 || cfg.eta > 0.5) throw DomainError("mwu requires 0 < eta <= 1/2");
    if (cfg.T < 1) throw DomainError("mwu requires a horizon T >= 1");
    const auto wall0 = std::chrono::steady_clock::now();
    const BoxBounds box = default_box(inst);
    const int m = inst.m();

    MwuResult out;
    SolveReport& rep = out.report;
    MwuState& st = out.state;
    rep.solver = "mwu";
    rep.formulation = "imwu";
    rep.seed = seed;
    rep.status = "budget";
    st.eta = cfg.eta;

    auto penalty = build_penalty_merit(inst, PenaltyVariant::Base);

    // Initial iterate: one local descent on the penalty merit.
    std::mt19937_64 rng0(derive_seed(seed, 0));
    Realization x = detail::sample_uniform(inst, box, rng0);
    auto timed_descent = [&](Merit& merit, const Eigen::VectorXd& start,
                             const LocalSolveConfig& dcfg) {
        const auto t0 = std::chrono::steady_clock::now();
        DescentResult d = local_descent(merit, start, dcfg, box, &budget);
        rep.subsolver_wall_s +=
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        rep.iterations += d.iterations;
        return d;
    };
    {
        DescentResult d = timed_descent(*penalty, penalty->init_vars(x), cfg.refine);
        x = penalty->extract(d.vars);
    }

    auto record_best = [&](const Realization& cand) {
        rep.best = cand;
        rep.phi = phi(inst, cand);
        rep.psi = psi(inst, cand);
    };
    record_best(x);

    std::vector<double> errs = edge_errors(inst, x);
    double maxerr = *std::max_element(errs.begin(), errs.end());
    if (rep.phi < kSolvedPhi || maxerr == 0.0) {
        rep.status = "solved";
        rep.cpu_s = budget.meter.seconds();
        rep.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
        st.omega = Eigen::VectorXd::Ones(m);
        return out;
    }

    Eigen::VectorXd psi_cur =
        Eigen::Map<Eigen::VectorXd>(errs.data(), m) / maxerr; // psi of the incoming iterate
    Eigen::VectorXd omega = Eigen::VectorXd::Ones(m);

    for (int t = 1; t <= cfg.T; ++t) {
        if (budget.exhausted()) break;
        const Eigen::VectorXd rho = omega / omega.sum();

        std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
        ThetaParameters theta = theta_sample(x, inst, omega, psi_cur, cfg.theta_rule, rng);

        Realization cand = x;
        bool subproblem_ok = false;
        {
            auto ptw = build_pointwise(inst, std::move(theta));
            DescentResult d = timed_descent(*ptw, ptw->init_vars(x), cfg.pointwise);
            subproblem_ok = d.converged;
            if (subproblem_ok) {
                const Realization xbar = ptw->extract(d.vars);
                DescentResult rd = timed_descent(*penalty, penalty->init_vars(xbar), cfg.refine);
                cand = penalty->extract(rd.vars);
            }
        }
        if (!subproblem_ok) ++st.skipped; // iteration skipped, psi carried from current x

        errs = edge_errors(inst, cand);
        maxerr = *std::max_element(errs.begin(), errs.end());
        if (maxerr == 0.0) {
            record_best(cand);
            rep.status = "solved";
            break;
        }
        const Eigen::VectorXd psi_t = Eigen::Map<Eigen::VectorXd>(errs.data(), m) / maxerr;
        const double omega_avg = psi_t.dot(rho);

        st.psi_trace.push_back(psi_t);
        st.omega_avg_trace.push_back(omega_avg);
        ++st.iterations;
        if (omega_avg < st.incumbent_omega) {
            st.incumbent_omega = omega_avg;
            record_best(cand);
        }

        omega = weight_update(omega, psi_t, cfg.eta);
        psi_cur = psi_t;
        x = cand;
        if (phi(inst, cand) < kSolvedPhi) {
            record_best(cand);
            rep.status = "solved";
            break;
        }
    }

    st.omega = omega;
    if (st.iterations > 0) {
        const auto [lhs, rhs] = mwu_regret_bound(st, m);
        if (!(lhs <= rhs + 1e-9))
            throw Error("multiplicative-weights regret bound violated: " + std::to_string(lhs) +
                        " > " + std::to_string(rhs));
    }
    rep.cpu_s = budget.meter.seconds();
    rep.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
    return out;
}

} // namespace idgp
