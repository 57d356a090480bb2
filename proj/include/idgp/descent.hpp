#pragma once

#include <chrono>
#include <cmath>
#include <deque>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "idgp/common.hpp"
#include "idgp/formulations.hpp"

namespace idgp {

struct LocalSolveConfig {
    int max_iterations = 1500; // per penalty round
    double gradient_tolerance = 1e-6;
    double time_limit_s = 20.0; // wall clock per descent call; 0 disables
    int lbfgs_memory = 8;
    double armijo_c = 1e-4;
    double backtrack = 0.5;
    int max_line_search = 40;
    // Quadratic-penalty schedule for merits with constraint terms.
    double mu0 = 1.0;
    double mu_factor = 10.0;
    int mu_rounds = 5;

    void validate() const {
        if (max_iterations <= 0 || gradient_tolerance <= 0.0 || time_limit_s < 0.0 ||
            lbfgs_memory <= 0 || armijo_c <= 0.0 || backtrack <= 0.0 || backtrack >= 1.0 ||
            max_line_search <= 0 || mu0 <= 0.0 || mu_factor <= 0.0 || mu_rounds <= 0)
            throw DomainError("local solve parameters must be positive");
    }
};

/// Shared work budget for a solver run. Wall and virtual limits are both
/// optional; the virtual limit is deterministic (see WorkMeter).
struct SolveBudget {
    long long max_restarts = 0; // 0 disables
    double wall_s = 0.0;        // 0 disables
    double virtual_s = 0.0;     // 0 disables

    std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();
    WorkMeter meter;

    double wall_elapsed() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    }
    bool exhausted() const {
        if (wall_s > 0.0 && wall_elapsed() >= wall_s) return true;
        if (virtual_s > 0.0 && meter.seconds() >= virtual_s) return true;
        return false;
    }
};

struct DescentResult {
    Eigen::VectorXd vars;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
    std::string status;
    std::vector<double> trace; // accepted merit values, restarted per penalty round
};

namespace detail {

// Slack blocks are sign-constrained by their merits' own penalty terms;
// the box keeps every variable finite either way.
inline void clamp_vars(const BoxBounds& box, Eigen::VectorXd& v) {
    for (int i = 0; i < v.size(); ++i) v[i] = std::clamp(v[i], box.lo, box.hi);
}

inline void recenter_coords(const Merit& merit, Eigen::VectorXd& v) {
    const int n = merit.instance().n();
    const int K = merit.instance().K();
    for (int k = 0; k < K; ++k) {
        double mean = 0.0;
        for (int vx = 0; vx < n; ++vx) mean += v[vx * K + k];
        mean /= n;
        for (int vx = 0; vx < n; ++vx) v[vx * K + k] -= mean;
    }
}

/// Gradient with box-active components zeroed, for the stopping test.
inline double projected_gradient_norm(const Eigen::VectorXd& x, const Eigen::VectorXd& g,
                                      const BoxBounds& box) {
    double nrm = 0.0;
    for (int i = 0; i < x.size(); ++i) {
        if ((x[i] <= box.lo && g[i] > 0.0) || (x[i] >= box.hi && g[i] < 0.0)) continue;
        nrm = std::max(nrm, std::abs(g[i]));
    }
    return nrm;
}

} // namespace detail

/// Quasi-Newton local descent on a merit function: L-BFGS directions,
/// Armijo backtracking, gradient projection onto the zero-centroid gauge,
/// and clamping to the coordinate box. Merits with penalty terms are run
/// through the mu schedule with warm starts. The returned coordinates are
/// recentered; the merit value never exceeds the starting value within a
/// penalty round.
inline DescentResult local_descent(Merit& merit, const Eigen::VectorXd& x0,
                                   const LocalSolveConfig& cfg, const BoxBounds& box,
                                   SolveBudget* budget = nullptr) {
    cfg.validate();
    const auto wall_start = std::chrono::steady_clock::now();
    auto out_of_time = [&]() {
        if (budget && budget->exhausted()) return true;
        if (cfg.time_limit_s <= 0.0) return false;
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start)
                   .count() >= cfg.time_limit_s;
    };
    auto charge = [&]() {
        if (budget) budget->meter.charge(merit.term_cost());
    };

    DescentResult res;
    res.vars = x0;
    if (!res.vars.allFinite()) throw Error("starting point has non-finite coordinates");
    detail::clamp_vars(box, res.vars);

    const int rounds = merit.has_penalty() ? cfg.mu_rounds : 1;
    Eigen::VectorXd g(merit.dim()), gnew(merit.dim());
    res.status = "iteration-budget";

    for (int round = 0; round < rounds; ++round) {
        merit.set_mu(cfg.mu0 * std::pow(cfg.mu_factor, round));
        res.trace.clear();

        double f = merit.value_and_grad(res.vars, g);
        charge();
        if (!std::isfinite(f))
            throw Error("merit is not finite at the starting point");
        merit.project_gradient(g);
        res.trace.push_back(f);

        std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>> mem; // (s, y)
        res.converged = false;

        for (int it = 0; it < cfg.max_iterations; ++it) {
            if (detail::projected_gradient_norm(res.vars, g, box) <= cfg.gradient_tolerance) {
                res.converged = true;
                break;
            }
            if (out_of_time()) {
                res.status = "time-limit";
                res.value = f;
                detail::recenter_coords(merit, res.vars);
                return res;
            }

            // Two-loop recursion.
            Eigen::VectorXd d = -g;
            std::vector<double> alpha(mem.size());
            for (int i = static_cast<int>(mem.size()) - 1; i >= 0; --i) {
                const auto& [s, y] = mem[i];
                alpha[i] = s.dot(d) / y.dot(s);
                d -= alpha[i] * y;
            }
            if (!mem.empty()) {
                const auto& [s, y] = mem.back();
                d *= y.dot(s) / y.dot(y);
            }
            for (std::size_t i = 0; i < mem.size(); ++i) {
                const auto& [s, y] = mem[i];
                const double beta = y.dot(d) / y.dot(s);
                d += (alpha[i] - beta) * s;
            }
            double slope = g.dot(d);
            if (!(slope < 0.0)) { // fall back to steepest descent
                d = -g;
                slope = g.dot(d);
                if (!(slope < 0.0)) {
                    res.converged = true; // zero projected gradient
                    break;
                }
            }

            // Armijo with a floor for fp noise in f; progress near the
            // optimum would otherwise be unverifiable for stiff penalties.
            const double noise = 1e-13 * (1.0 + std::abs(f));
            double step = 1.0;
            double fnew = f;
            Eigen::VectorXd xnew;
            bool accepted = false;
            for (int ls = 0; ls < cfg.max_line_search; ++ls) {
                xnew = res.vars + step * d;
                fnew = merit.value(xnew);
                charge();
                if (std::isfinite(fnew) && fnew <= f + cfg.armijo_c * step * slope + noise) {
                    accepted = true;
                    break;
                }
                step *= cfg.backtrack;
            }
            if (!accepted) {
                if (mem.empty()) break; // flat to machine precision
                mem.clear();            // stale curvature pairs: restart
                continue;
            }

            bool touched_box = false;
            for (int i = 0; i < xnew.size(); ++i)
                if (xnew[i] < box.lo || xnew[i] > box.hi) touched_box = true;
            if (touched_box) {
                detail::clamp_vars(box, xnew);
                detail::recenter_coords(merit, xnew);
                const double fc = merit.value(xnew);
                charge();
                if (!(fc <= f)) break; // cannot make progress inside the box
                fnew = fc;
            }

            fnew = merit.value_and_grad(xnew, gnew);
            charge();
            merit.project_gradient(gnew);

            Eigen::VectorXd s = xnew - res.vars;
            Eigen::VectorXd y = gnew - g;
            const double sy = s.dot(y);
            if (sy > 1e-12 * s.norm() * y.norm()) {
                mem.emplace_back(std::move(s), std::move(y));
                if (static_cast<int>(mem.size()) > cfg.lbfgs_memory) mem.pop_front();
            }

            res.vars = std::move(xnew);
            f = fnew;
            g = gnew;
            res.trace.push_back(f);
            ++res.iterations;
        }
        res.value = f;
    }

    res.status = res.converged ? "converged" : "iteration-budget";
    detail::recenter_coords(merit, res.vars);
    return res;
}

} // namespace idgp
