#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SVD>
#include <json.hpp>

#include "idgp/instance.hpp"

namespace idgp {

/// Interval edge error: hinge distance of |x_u - x_v| to [lo, hi].
inline double alpha_error(const Edge& e, const Realization& x) {
    const double d = x.distance(e.u, e.v);
    return std::max(0.0, e.lo - d) + std::max(0.0, d - e.hi);
}

/// Exact-distance edge error | |x_u - x_v| - hi |.
inline double beta_error(const Edge& e, const Realization& x) {
    return std::abs(x.distance(e.u, e.v) - e.hi);
}

/// Edge error eta: alpha for interval instances, beta for plain DGP ones.
inline double edge_error(const IdgpInstance& inst, const Realization& x, const Edge& e) {
    return inst.exact_distances() ? beta_error(e, x) : alpha_error(e, x);
}

inline std::vector<double> edge_errors(const IdgpInstance& inst, const Realization& x) {
    std::vector<double> errs;
    errs.reserve(inst.m());
    const bool exact = inst.exact_distances();
    for (const Edge& e : inst.edges()) errs.push_back(exact ? beta_error(e, x) : alpha_error(e, x));
    return errs;
}

/// Average edge error.
inline double phi(const IdgpInstance& inst, const Realization& x) {
    if (inst.m() == 0) throw DomainError("average error undefined on an empty edge set");
    double sum = 0.0;
    for (const Edge& e : inst.edges()) sum += edge_error(inst, x, e);
    return sum / inst.m();
}

/// Maximum edge error.
inline double psi(const IdgpInstance& inst, const Realization& x) {
    if (inst.m() == 0) throw DomainError("maximum error undefined on an empty edge set");
    double mx = 0.0;
    for (const Edge& e : inst.edges()) mx = std::max(mx, edge_error(inst, x, e));
    return mx;
}

/// Average absolute difference of edge lengths between two realizations.
/// Not congruence-invariant; diagnostic only.
inline double delta_naive(const Realization& x, const Realization& y, const IdgpInstance& inst) {
    if (inst.m() == 0) return 0.0;
    double sum = 0.0;
    for (const Edge& e : inst.edges()) sum += std::abs(x.distance(e.u, e.v) - y.distance(e.u, e.v));
    return sum / inst.m();
}

/// Sum over vertices of per-point Euclidean distances between two
/// realizations (the norm all alignment residuals are reported in).
inline double pointwise_norm(const Realization& x, const Realization& y) {
    return (x.points() - y.points()).rowwise().norm().sum();
}

/// Result of an optimal alignment of y onto x: p -> rotation * p + translation,
/// optionally preceded by a partial-reflection composition (DEMI).
struct AlignmentResult {
    Eigen::MatrixXd rotation;   // K x K orthogonal
    Eigen::VectorXd translation; // R^K
    bool reflection = false;    // det(rotation) < 0
    double residual = 0.0;      // pointwise_norm after alignment
    std::vector<int> generators; // minimizing group element, ascending positions
};

inline nlohmann::json alignment_to_json(const AlignmentResult& a) {
    nlohmann::json j;
    j["rotation"] = nlohmann::json::array();
    for (int i = 0; i < a.rotation.rows(); ++i)
        for (int k = 0; k < a.rotation.cols(); ++k) j["rotation"].push_back(a.rotation(i, k));
    j["translation"] = std::vector<double>(a.translation.data(),
                                           a.translation.data() + a.translation.size());
    j["reflection"] = a.reflection;
    j["residual"] = a.residual;
    j["generators"] = a.generators;
    return j;
}

namespace detail {

/// Orthogonal matrix R maximizing tr(R M) via SVD of M; when
/// allow_reflection is false the determinant is forced to +1 by flipping
/// the direction of the smallest singular value. A rank-deficient M leaves
/// that direction free, in which case the proper rotation is preferred
/// even when reflections are allowed.
inline Eigen::MatrixXd kabsch_rotation(const Eigen::MatrixXd& M, bool allow_reflection) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::MatrixXd R = svd.matrixV() * svd.matrixU().transpose();
    const auto& sv = svd.singularValues();
    const bool free_sign = sv(M.rows() - 1) <= 1e-12 * std::max(sv(0), 1e-300);
    if (R.determinant() < 0.0 && (!allow_reflection || free_sign)) {
        Eigen::MatrixXd D = Eigen::MatrixXd::Identity(M.rows(), M.rows());
        D(M.rows() - 1, M.rows() - 1) = -1.0;
        R = svd.matrixV() * D * svd.matrixU().transpose();
    }
    return R;
}

} // namespace detail

/// Classical Procrustes alignment of centered y onto centered x: finds the
/// orthogonal map (det +1 unless allow_reflection) minimizing the sum of
/// squared per-point distances. The reported residual is the unsquared
/// pointwise_norm of the aligned pair.
inline AlignmentResult procrustes(const Realization& x, const Realization& y,
                                  bool allow_reflection) {
    if (x.n() != y.n() || x.K() != y.K())
        throw DomainError("procrustes requires realizations of the same shape");
    const Eigen::MatrixXd M = y.points().transpose() * x.points(); // sum of y_v x_v^T
    Eigen::MatrixXd R = detail::kabsch_rotation(M, allow_reflection);
    AlignmentResult res;
    res.rotation = R;
    res.translation = Eigen::VectorXd::Zero(x.K());
    res.reflection = R.determinant() < 0.0;
    Realization aligned(Eigen::MatrixXd(y.points() * R.transpose()));
    res.residual = pointwise_norm(x, aligned);
    return res;
}

/// Applies an alignment to every point of a realization.
inline Realization apply_alignment(const AlignmentResult& a, const Realization& y) {
    Eigen::MatrixXd p = y.points() * a.rotation.transpose();
    p.rowwise() += a.translation.transpose();
    return Realization(std::move(p));
}

namespace detail {

/// Unit normal of the affine hyperplane through the K rows of `anchors`,
/// or throws DegenerateAnchorError (affine dependence tested on the
/// smallest singular value against 1e-9 times the anchor scale).
inline Eigen::VectorXd hyperplane_normal(const Eigen::MatrixXd& anchors, int vertex) {
    const int K = static_cast<int>(anchors.cols());
    if (K == 1) return Eigen::VectorXd::Ones(1);
    Eigen::MatrixXd D(K - 1, K);
    for (int i = 1; i < K; ++i) D.row(i - 1) = anchors.row(i) - anchors.row(0);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(D, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double scale = sv(0);
    if (scale <= 0.0 || sv(K - 2) <= 1e-9 * scale)
        throw DegenerateAnchorError("affinely dependent anchor points for partial reflection at vertex " +
                                        std::to_string(vertex),
                                    vertex);
    return svd.matrixV().col(K - 1);
}

} // namespace detail

/// Partial reflection g_v: points 1..v-1 fixed, points v..n reflected
/// across the hyperplane through points v-K..v-1. Positions refer to the
/// identity order; see PruningGroup for ordered instances.
inline Realization partial_reflection(const Realization& x, int v) {
    const int K = x.K();
    const int n = x.n();
    if (v <= K || v > n) throw DomainError("partial reflection requires K < v <= n");
    const Eigen::MatrixXd anchors = x.points().middleRows(v - K - 1, K);
    const Eigen::VectorXd normal = detail::hyperplane_normal(anchors, v);
    const Eigen::RowVectorXd base = anchors.row(0);
    Realization out(x);
    for (int i = v - 1; i < n; ++i) {
        const double t = (out.points().row(i) - base).dot(normal);
        out.points().row(i) -= 2.0 * t * normal.transpose();
    }
    return out;
}

/// One element of the pruning group: a subset of the generator set Z,
/// ascending. The group has order 2^|Z|; the empty subset is the identity.
struct GroupElement {
    std::vector<int> generators;
    bool identity() const { return generators.empty(); }
};

/// Enumerable view of the pruning group of a DmdgpStructure. Enumeration is
/// refused (never truncated) beyond the generator cap.
class PruningGroup {
  public:
    static constexpr int kDefaultCap = 24;

    explicit PruningGroup(const DmdgpStructure& s, int cap = kDefaultCap) : s_(&s) {
        if (static_cast<int>(s.Z.size()) > cap)
            throw GroupTooLargeError("pruning group has 2^" + std::to_string(s.Z.size()) +
                                         " elements, over the enumeration cap 2^" +
                                         std::to_string(cap),
                                     static_cast<int>(s.Z.size()));
        for (int i = 0; i < s_->n; ++i) perm_.push_back(s_->order[i]);
    }

    std::uint64_t size() const { return std::uint64_t{1} << s_->Z.size(); }

    GroupElement element(std::uint64_t mask) const {
        GroupElement g;
        for (std::size_t i = 0; i < s_->Z.size(); ++i)
            if (mask & (std::uint64_t{1} << i)) g.generators.push_back(s_->Z[i]);
        return g;
    }

    /// Applies a group element, composing generators in ascending position
    /// order. Points are permuted into order space, reflected, and restored.
    Realization apply(const GroupElement& g, const Realization& x) const {
        if (g.identity()) return x;
        Realization ordered = to_order_space(x);
        for (int v : g.generators) ordered = partial_reflection(ordered, v);
        return from_order_space(ordered);
    }

    const std::vector<int>& Z() const { return s_->Z; }
    const DmdgpStructure& structure() const { return *s_; }

    Realization to_order_space(const Realization& x) const {
        Eigen::MatrixXd p(x.n(), x.K());
        for (int i = 0; i < x.n(); ++i) p.row(i) = x.points().row(perm_[i] - 1);
        return Realization(std::move(p));
    }

    Realization from_order_space(const Realization& x) const {
        Eigen::MatrixXd p(x.n(), x.K());
        for (int i = 0; i < x.n(); ++i) p.row(perm_[i] - 1) = x.points().row(i);
        return Realization(std::move(p));
    }

  private:
    const DmdgpStructure* s_;
    std::vector<int> perm_;
};

/// Materializes all 2^|Z| group elements (mask order; element 0 is the identity).
inline std::vector<GroupElement> enumerate_group(const DmdgpStructure& s,
                                                 int cap = PruningGroup::kDefaultCap) {
    PruningGroup grp(s, cap);
    std::vector<GroupElement> out;
    out.reserve(grp.size());
    for (std::uint64_t mask = 0; mask < grp.size(); ++mask) out.push_back(grp.element(mask));
    return out;
}

namespace detail {

inline bool better_candidate(double val, const std::vector<int>& gens, double best_val,
                             const std::vector<int>& best_gens) {
    if (val < best_val) return true;
    if (val > best_val) return false;
    return std::lexicographical_compare(gens.begin(), gens.end(), best_gens.begin(),
                                        best_gens.end());
}

} // namespace detail

namespace detail {

/// Rigid alignment of the K-point prefix in order space (translation and
/// rotation, residual not filled in).
inline AlignmentResult prefix_alignment(const Realization& xc, const Realization& yc,
                                        const DmdgpStructure& s, bool allow_reflection) {
    const int K = s.K;
    Eigen::MatrixXd px(K, K), py(K, K);
    for (int i = 0; i < K; ++i) {
        px.row(i) = xc.points().row(s.order[i] - 1);
        py.row(i) = yc.points().row(s.order[i] - 1);
    }
    const Eigen::RowVectorXd cx = px.colwise().mean();
    const Eigen::RowVectorXd cy = py.colwise().mean();
    px.rowwise() -= cx;
    py.rowwise() -= cy;
    AlignmentResult res;
    res.rotation = kabsch_rotation(py.transpose() * px, allow_reflection);
    res.translation = cx.transpose() - res.rotation * cy.transpose();
    res.reflection = res.rotation.determinant() < 0.0;
    return res;
}

} // namespace detail

/// Distance error modulo isometries, two-step heuristic: align the first K
/// points of the order by rigid Procrustes (reflection allowed unless
/// disabled), then take the best pruning-group element under pointwise_norm.
inline AlignmentResult demi_alg1(const Realization& x, const Realization& y,
                                 const DmdgpStructure& s, bool allow_reflection = true,
                                 int cap = PruningGroup::kDefaultCap) {
    PruningGroup grp(s, cap);
    const Realization xc = x.centered();
    const Realization yc = y.centered();

    AlignmentResult res = detail::prefix_alignment(xc, yc, s, allow_reflection);
    const Realization y_aligned = apply_alignment(res, yc);
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> best_gens;
    for (std::uint64_t mask = 0; mask < grp.size(); ++mask) {
        const GroupElement g = grp.element(mask);
        const double val = pointwise_norm(xc, grp.apply(g, y_aligned));
        if (detail::better_candidate(val, g.generators, best, best_gens)) {
            best = val;
            best_gens = g.generators;
        }
    }
    res.residual = best;
    res.generators = std::move(best_gens);
    return res;
}

/// Exhaustive DEMI: for every group element g, recenters g(y) and runs a
/// full Procrustes against x, keeping the minimum residual. Partial
/// reflections commute with rigid motions, so searching (g, rotation) in
/// either order covers the same candidates. The prefix-aligned candidates
/// of the two-step heuristic are folded into the minimum as well, which
/// keeps the result at or below demi_alg1.
inline AlignmentResult demi_exhaustive(const Realization& x, const Realization& y,
                                       const DmdgpStructure& s, bool allow_reflection = true,
                                       int cap = PruningGroup::kDefaultCap) {
    PruningGroup grp(s, cap);
    const Realization xc = x.centered();
    const Realization yc = y.centered();

    const AlignmentResult prefix = detail::prefix_alignment(xc, yc, s, allow_reflection);
    const Realization y_prefix = apply_alignment(prefix, yc);

    AlignmentResult best;
    best.residual = std::numeric_limits<double>::infinity();
    for (std::uint64_t mask = 0; mask < grp.size(); ++mask) {
        const GroupElement g = grp.element(mask);
        const Realization gy = grp.apply(g, yc);
        const Eigen::RowVectorXd shift = gy.centroid();
        AlignmentResult cand = procrustes(xc, gy.centered(), allow_reflection);
        if (detail::better_candidate(cand.residual, g.generators, best.residual,
                                     best.generators)) {
            cand.translation = -cand.rotation * shift.transpose();
            cand.generators = g.generators;
            best = std::move(cand);
        }
        const double heuristic = pointwise_norm(xc, grp.apply(g, y_prefix));
        if (detail::better_candidate(heuristic, g.generators, best.residual, best.generators)) {
            best = prefix;
            best.residual = heuristic;
            best.generators = g.generators;
        }
    }
    return best;
}

} // namespace idgp
