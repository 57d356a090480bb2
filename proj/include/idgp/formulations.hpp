#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "idgp/instance.hpp"
#include "idgp/measures.hpp"

namespace idgp {

/// A formulation compiled to a smooth objective with analytic gradient over
/// a flattened variable vector: the coordinate block (x_vk at (v-1)*K + k)
/// followed by any auxiliary blocks. Constraint terms are weighted by the
/// penalty weight mu; the owning solver raises mu between outer rounds, and
/// is the only writer once descent starts.
class Merit {
  public:
    explicit Merit(const IdgpInstance& inst, std::string id)
        : inst_(&inst), id_(std::move(id)) {}
    virtual ~Merit() = default;

    const std::string& id() const { return id_; }
    const IdgpInstance& instance() const { return *inst_; }
    int coord_dim() const { return inst_->n() * inst_->K(); }
    virtual int dim() const { return coord_dim(); }

    virtual double value(const Eigen::VectorXd& vars) const = 0;
    virtual double value_and_grad(const Eigen::VectorXd& vars, Eigen::VectorXd& grad) const = 0;

    /// Unsmoothed aggregate where the smoothed objective approximates one
    /// (the soft-max variant); defaults to value().
    virtual double exact_value(const Eigen::VectorXd& vars) const { return value(vars); }

    /// True when the merit carries mu-weighted constraint terms.
    virtual bool has_penalty() const { return false; }
    double mu() const { return mu_; }
    void set_mu(double mu) { mu_ = mu; }

    /// Per-evaluation work in edge-term units, for deterministic budgets.
    virtual std::uint64_t term_cost() const { return static_cast<std::uint64_t>(inst_->m()); }

    /// Translation gauge fixing: removes the per-axis mean from the
    /// coordinate block of the gradient, preserving sum_v x_vk = 0.
    void project_gradient(Eigen::VectorXd& grad) const {
        const int n = inst_->n();
        const int K = inst_->K();
        for (int k = 0; k < K; ++k) {
            double mean = 0.0;
            for (int v = 0; v < n; ++v) mean += grad[v * K + k];
            mean /= n;
            for (int v = 0; v < n; ++v) grad[v * K + k] -= mean;
        }
    }

    /// Packs a starting realization (and formulation-specific auxiliaries)
    /// into a full variable vector.
    virtual Eigen::VectorXd init_vars(const Realization& x0) const {
        Eigen::VectorXd v(dim());
        pack_coords(x0, v);
        return v;
    }

    Realization extract(const Eigen::VectorXd& vars) const {
        const int n = inst_->n();
        const int K = inst_->K();
        Eigen::MatrixXd p(n, K);
        for (int v = 0; v < n; ++v)
            for (int k = 0; k < K; ++k) p(v, k) = vars[v * K + k];
        return Realization(std::move(p));
    }

  protected:
    void pack_coords(const Realization& x, Eigen::VectorXd& vars) const {
        const int n = inst_->n();
        const int K = inst_->K();
        for (int v = 0; v < n; ++v)
            for (int k = 0; k < K; ++k) vars[v * K + k] = x.points()(v, k);
    }

    const IdgpInstance* inst_;
    std::string id_;
    double mu_ = 1.0;
};

namespace detail {

inline double hinge(double t) { return t > 0.0 ? t : 0.0; }

struct EdgeTerm {
    int u, v;       // 0-based
    double lo, hi;  // bounds
    double lo2, hi2;
    double w = 1.0;
};

inline std::vector<EdgeTerm> edge_terms(const IdgpInstance& inst,
                                        const std::vector<double>& weights) {
    std::vector<EdgeTerm> ts;
    ts.reserve(inst.m());
    for (int i = 0; i < inst.m(); ++i) {
        const Edge& e = inst.edges()[i];
        EdgeTerm t{e.u - 1, e.v - 1, e.lo, e.hi, e.lo * e.lo, e.hi * e.hi,
                   weights.empty() ? 1.0 : weights[i]};
        ts.push_back(t);
    }
    return ts;
}

} // namespace detail

/// Slack-eliminated penalty minimization family. The per-edge penalty is
/// the squared hinge distance of the (squared) edge length to the (squared)
/// interval; at most one hinge is active since lo <= hi. Aggregation and
/// weighting distinguish the variants:
///   base / split: plain sum (the split-slack optimum collapses to it),
///   softmax:      log-sum-exp with temperature 1e-2 * max term,
///   weighted:     positively weighted sum, default w_e = 1/hi_e^2.
/// The square-root flavour penalizes plain lengths against unsquared
/// bounds, guarding sqrt with a 1e-10 shift.
class PenaltyMerit : public Merit {
  public:
    enum class Aggregate { Sum, SoftMax, WeightedSum };

    PenaltyMerit(const IdgpInstance& inst, std::string id, Aggregate agg,
                 std::vector<double> weights = {}, bool use_sqrt = false)
        : Merit(inst, std::move(id)), agg_(agg), use_sqrt_(use_sqrt) {
        if (agg_ == Aggregate::WeightedSum) {
            if (weights.empty()) {
                for (const Edge& e : inst.edges()) {
                    if (e.hi <= 0.0)
                        throw DomainError("default weight 1/U^2 undefined for edge with U = 0");
                    weights.push_back(1.0 / (e.hi * e.hi));
                }
            }
            for (double w : weights)
                if (w <= 0.0) throw DomainError("penalty weights must be positive");
        }
        terms_ = detail::edge_terms(inst, weights);
    }

    double value(const Eigen::VectorXd& vars) const override {
        return eval(vars, nullptr);
    }
    double value_and_grad(const Eigen::VectorXd& vars, Eigen::VectorXd& grad) const override {
        grad.setZero(dim());
        return eval(vars, &grad);
    }
    double exact_value(const Eigen::VectorXd& vars) const override {
        if (agg_ != Aggregate::SoftMax) return value(vars);
        double mx = 0.0;
        for (const auto& t : terms_) mx = std::max(mx, edge_penalty(vars, t, nullptr, 0.0));
        return mx;
    }

  private:
    // Squared-hinge penalty of one edge; optionally accumulates
    // scale * d(penalty)/dx into grad.
    double edge_penalty(const Eigen::VectorXd& x, const detail::EdgeTerm& t,
                        Eigen::VectorXd* grad, double scale) const {
        const int K = inst_->K();
        double d2 = 0.0;
        for (int k = 0; k < K; ++k) {
            const double dk = x[t.u * K + k] - x[t.v * K + k];
            d2 += dk * dk;
        }
        double a, b, dcoef; // penalty = a^2 + b^2 with d(a)/d(d2) = -dcoef, d(b)/d(d2) = +dcoef
        if (use_sqrt_) {
            const double s = std::sqrt(d2 + kSqrtShift);
            a = detail::hinge(t.lo - s);
            b = detail::hinge(s - t.hi);
            dcoef = 0.5 / s;
        } else {
            a = detail::hinge(t.lo2 - d2);
            b = detail::hinge(d2 - t.hi2);
            dcoef = 1.0;
        }
        const double pen = a * a + b * b;
        if (grad && (a > 0.0 || b > 0.0)) {
            const double dpen_dd2 = 2.0 * (b - a) * dcoef;
            const double c = scale * dpen_dd2 * 2.0;
            for (int k = 0; k < K; ++k) {
                const double dk = x[t.u * K + k] - x[t.v * K + k];
                (*grad)[t.u * K + k] += c * dk;
                (*grad)[t.v * K + k] -= c * dk;
            }
        }
        return pen;
    }

    double eval(const Eigen::VectorXd& x, Eigen::VectorXd* grad) const {
        if (agg_ != Aggregate::SoftMax) {
            double sum = 0.0;
            for (const auto& t : terms_) sum += t.w * edge_penalty(x, t, grad, t.w);
            return sum;
        }
        // Soft-max aggregation: f = p_max + tau * ln sum exp((p_e - p_max)/tau)
        // with tau = 1e-2 * p_max; the gradient keeps the d(tau) term so it
        // matches finite differences wherever the argmax is unique.
        std::vector<double> p(terms_.size());
        double pmax = 0.0;
        std::size_t imax = 0;
        for (std::size_t i = 0; i < terms_.size(); ++i) {
            p[i] = edge_penalty(x, terms_[i], nullptr, 0.0);
            if (p[i] > pmax) {
                pmax = p[i];
                imax = i;
            }
        }
        if (pmax <= 0.0) return 0.0;
        const double tau = kSoftMaxTemp * pmax;
        double expsum = 0.0;
        for (double pe : p) expsum += std::exp((pe - pmax) / tau);
        const double lse = std::log(expsum);
        const double f = pmax + tau * lse;
        if (grad) {
            double wp = 0.0; // sum_e softmax_e * p_e
            for (std::size_t i = 0; i < terms_.size(); ++i) {
                const double we = std::exp((p[i] - pmax) / tau) / expsum;
                if (we > 0.0) edge_penalty(x, terms_[i], grad, we);
                wp += we * p[i];
            }
            // d(tau) contribution through the argmax edge.
            const double tcoef = kSoftMaxTemp * (lse + (pmax - wp) / tau);
            if (tcoef != 0.0) edge_penalty(x, terms_[imax], grad, tcoef);
        }
        return f;
    }

    static constexpr double kSqrtShift = 1e-10;
    static constexpr double kSoftMaxTemp = 1e-2;

    Aggregate agg_;
    bool use_sqrt_;
    std::vector<detail::EdgeTerm> terms_;
};

/// Square factoring: auxiliary vectors sigma, tau per edge with
/// sigma ~ coordinate differences and sigma . tau playing the role of the
/// squared length. Layout: [x (nK) | sigma (mK) | tau (mK)].
class SquareFactoringMerit : public Merit {
  public:
    explicit SquareFactoringMerit(const IdgpInstance& inst)
        : Merit(inst, "idgp3"), terms_(detail::edge_terms(inst, {})) {}

    int dim() const override { return coord_dim() + 2 * inst_->m() * inst_->K(); }
    bool has_penalty() const override { return true; }
    std::uint64_t term_cost() const override { return 3ull * inst_->m(); }

    Eigen::VectorXd init_vars(const Realization& x0) const override {
        Eigen::VectorXd v(dim());
        pack_coords(x0, v);
        const int K = inst_->K();
        for (int e = 0; e < inst_->m(); ++e) {
            const auto& t = terms_[e];
            for (int k = 0; k < K; ++k) {
                const double dk = x0.points()(t.u, k) - x0.points()(t.v, k);
                v[sigma0() + e * K + k] = dk;
                v[tau0() + e * K + k] = dk;
            }
        }
        return v;
    }

    double value(const Eigen::VectorXd& vars) const override { return eval(vars, nullptr); }
    double value_and_grad(const Eigen::VectorXd& vars, Eigen::VectorXd& grad) const override {
        grad.setZero(dim());
        return eval(vars, &grad);
    }

  private:
    int sigma0() const { return coord_dim(); }
    int tau0() const { return coord_dim() + inst_->m() * inst_->K(); }

    double eval(const Eigen::VectorXd& v, Eigen::VectorXd* grad) const {
        const int K = inst_->K();
        double f = 0.0;
        for (int e = 0; e < inst_->m(); ++e) {
            const auto& t = terms_[e];
            double st = 0.0;
            for (int k = 0; k < K; ++k) {
                const double sig = v[sigma0() + e * K + k];
                const double tau = v[tau0() + e * K + k];
                const double diff = sig - tau;
                const double link = v[t.u * K + k] - v[t.v * K + k] - sig;
                f += diff * diff + mu_ * link * link;
                st += sig * tau;
                if (grad) {
                    (*grad)[sigma0() + e * K + k] += 2.0 * diff - 2.0 * mu_ * link;
                    (*grad)[tau0() + e * K + k] += -2.0 * diff;
                    (*grad)[t.u * K + k] += 2.0 * mu_ * link;
                    (*grad)[t.v * K + k] -= 2.0 * mu_ * link;
                }
            }
            const double a = detail::hinge(t.lo2 - st);
            const double b = detail::hinge(st - t.hi2);
            f += mu_ * (a * a + b * b);
            if (grad && (a > 0.0 || b > 0.0)) {
                const double dst = 2.0 * mu_ * (b - a);
                for (int k = 0; k < K; ++k) {
                    (*grad)[sigma0() + e * K + k] += dst * v[tau0() + e * K + k];
                    (*grad)[tau0() + e * K + k] += dst * v[sigma0() + e * K + k];
                }
            }
        }
        return f;
    }

    std::vector<detail::EdgeTerm> terms_;
};

/// Convexity/concavity relaxation: pull adjacent vertices apart subject to
/// upper bounds, encoded as minimizing the negated objective plus a
/// mu-weighted squared hinge on each upper bound.
class ConvConcMerit : public Merit {
  public:
    ConvConcMerit(const IdgpInstance& inst, std::string id, std::vector<double> weights)
        : Merit(inst, std::move(id)) {
        for (double w : weights)
            if (w <= 0.0) throw DomainError("objective weights must be positive");
        terms_ = detail::edge_terms(inst, weights);
    }

    bool has_penalty() const override { return true; }

    double value(const Eigen::VectorXd& vars) const override { return eval(vars, nullptr); }
    double value_and_grad(const Eigen::VectorXd& vars, Eigen::VectorXd& grad) const override {
        grad.setZero(dim());
        return eval(vars, &grad);
    }

  private:
    double eval(const Eigen::VectorXd& x, Eigen::VectorXd* grad) const {
        const int K = inst_->K();
        double f = 0.0;
        for (const auto& t : terms_) {
            double d2 = 0.0;
            for (int k = 0; k < K; ++k) {
                const double dk = x[t.u * K + k] - x[t.v * K + k];
                d2 += dk * dk;
            }
            const double b = detail::hinge(d2 - t.hi2);
            f += -t.w * d2 + mu_ * b * b;
            if (grad) {
                const double c = 2.0 * (-t.w + 2.0 * mu_ * b);
                for (int k = 0; k < K; ++k) {
                    const double dk = x[t.u * K + k] - x[t.v * K + k];
                    (*grad)[t.u * K + k] += c * dk;
                    (*grad)[t.v * K + k] -= c * dk;
                }
            }
        }
        return f;
    }

    std::vector<detail::EdgeTerm> terms_;
};

using ThetaParameters = Eigen::MatrixXd; // m x K

/// Always-feasible pointwise reformulation: linearized edge terms with
/// elastic slacks, as a penalized concave maximization (written as a convex
/// minimization). Layout: [x (nK) | s (m)].
class PointwiseMerit : public Merit {
  public:
    PointwiseMerit(const IdgpInstance& inst, ThetaParameters theta)
        : Merit(inst, "imwu"), theta_(std::move(theta)), terms_(detail::edge_terms(inst, {})) {
        if (theta_.rows() != inst.m() || theta_.cols() != inst.K())
            throw DomainError("theta must be an m x K array");
        if (!theta_.allFinite()) throw DomainError("theta entries must be finite");
    }

    int dim() const override { return coord_dim() + inst_->m(); }
    bool has_penalty() const override { return true; }
    std::uint64_t term_cost() const override { return 2ull * inst_->m(); }
    const ThetaParameters& theta() const { return theta_; }

    Eigen::VectorXd init_vars(const Realization& x0) const override {
        Eigen::VectorXd v(dim());
        pack_coords(x0, v);
        const int K = inst_->K();
        for (int e = 0; e < inst_->m(); ++e) {
            const auto& t = terms_[e];
            double lin = 0.0;
            for (int k = 0; k < K; ++k)
                lin += theta_(e, k) * (x0.points()(t.u, k) - x0.points()(t.v, k));
            v[coord_dim() + e] = detail::hinge(t.lo2 - lin);
        }
        return v;
    }

    double value(const Eigen::VectorXd& vars) const override { return eval(vars, nullptr); }
    double value_and_grad(const Eigen::VectorXd& vars, Eigen::VectorXd& grad) const override {
        grad.setZero(dim());
        return eval(vars, &grad);
    }

  private:
    double eval(const Eigen::VectorXd& v, Eigen::VectorXd* grad) const {
        const int K = inst_->K();
        double f = 0.0;
        for (int e = 0; e < inst_->m(); ++e) {
            const auto& t = terms_[e];
            const double s = v[coord_dim() + e];
            double d2 = 0.0, lin = 0.0;
            for (int k = 0; k < K; ++k) {
                const double dk = v[t.u * K + k] - v[t.v * K + k];
                d2 += dk * dk;
                lin += theta_(e, k) * dk;
            }
            const double bu = detail::hinge(d2 - t.hi2);      // upper ball
            const double bl = detail::hinge(t.lo2 - s - lin); // elastic lower cut
            const double bs = detail::hinge(-s);              // slack sign
            f += -(lin - s) + mu_ * (bu * bu + bl * bl + bs * bs);
            if (grad) {
                const double cu = 4.0 * mu_ * bu;
                const double cl = 2.0 * mu_ * bl;
                for (int k = 0; k < K; ++k) {
                    const double dk = v[t.u * K + k] - v[t.v * K + k];
                    const double g = -theta_(e, k) + cu * dk - cl * theta_(e, k);
                    (*grad)[t.u * K + k] += g;
                    (*grad)[t.v * K + k] -= g;
                }
                (*grad)[coord_dim() + e] += 1.0 - 2.0 * mu_ * bl - 2.0 * mu_ * bs;
            }
        }
        return f;
    }

    ThetaParameters theta_;
    std::vector<detail::EdgeTerm> terms_;
};

enum class PenaltyVariant { Base, Max, Split, Weighted };

inline std::unique_ptr<Merit> build_penalty_merit(const IdgpInstance& inst, PenaltyVariant variant,
                                                  std::vector<double> weights = {}) {
    switch (variant) {
        case PenaltyVariant::Base:
            return std::make_unique<PenaltyMerit>(inst, "idgp1", PenaltyMerit::Aggregate::Sum);
        case PenaltyVariant::Max:
            return std::make_unique<PenaltyMerit>(inst, "idgp1var1",
                                                  PenaltyMerit::Aggregate::SoftMax);
        case PenaltyVariant::Split:
            return std::make_unique<PenaltyMerit>(inst, "idgp1var2", PenaltyMerit::Aggregate::Sum);
        case PenaltyVariant::Weighted:
            return std::make_unique<PenaltyMerit>(inst, "idgp1var3",
                                                  PenaltyMerit::Aggregate::WeightedSum,
                                                  std::move(weights));
    }
    throw DomainError("unknown penalty variant");
}

inline std::unique_ptr<Merit> build_sqrt_variant(const IdgpInstance& inst) {
    return std::make_unique<PenaltyMerit>(inst, "idgp1sqrt", PenaltyMerit::Aggregate::Sum,
                                          std::vector<double>{}, /*use_sqrt=*/true);
}

inline std::unique_ptr<Merit> build_square_factoring_merit(const IdgpInstance& inst) {
    return std::make_unique<SquareFactoringMerit>(inst);
}

inline std::unique_ptr<Merit> build_convconc_merit(const IdgpInstance& inst, bool weighted) {
    std::vector<double> w;
    if (weighted) {
        for (const Edge& e : inst.edges()) {
            if (e.hi <= 0.0) throw DomainError("default weight 1/U^2 undefined for edge with U = 0");
            w.push_back(1.0 / (e.hi * e.hi));
        }
    }
    return std::make_unique<ConvConcMerit>(inst, weighted ? "idgp4var1" : "idgp4", std::move(w));
}

/// Interval stress: identical kernel to the reduced penalty sum; collapses
/// to the classical quartic stress when all intervals are degenerate.
inline std::unique_ptr<Merit> build_stress_merit(const IdgpInstance& inst) {
    return std::make_unique<PenaltyMerit>(inst, "stress", PenaltyMerit::Aggregate::Sum);
}

inline std::unique_ptr<Merit> build_pointwise(const IdgpInstance& inst, ThetaParameters theta) {
    return std::make_unique<PointwiseMerit>(inst, std::move(theta));
}

/// Formulation ids accepted by the solve/bench surfaces.
inline std::unique_ptr<Merit> make_formulation(const IdgpInstance& inst, const std::string& id) {
    if (id == "idgp1") return build_penalty_merit(inst, PenaltyVariant::Base);
    if (id == "idgp1var1") return build_penalty_merit(inst, PenaltyVariant::Max);
    if (id == "idgp1var2") return build_penalty_merit(inst, PenaltyVariant::Split);
    if (id == "idgp1var3") return build_penalty_merit(inst, PenaltyVariant::Weighted);
    if (id == "idgp1sqrt") return build_sqrt_variant(inst);
    if (id == "idgp3") return build_square_factoring_merit(inst);
    if (id == "idgp4") return build_convconc_merit(inst, false);
    if (id == "idgp4var1") return build_convconc_merit(inst, true);
    if (id == "stress") return build_stress_merit(inst);
    throw DomainError("unknown formulation id \"" + id + "\"");
}

} // namespace idgp
