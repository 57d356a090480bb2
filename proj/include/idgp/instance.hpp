#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "idgp/common.hpp"

namespace idgp {

/// Undirected edge with an interval weight [lo, hi], in Angstrom.
/// Vertices are 1-based everywhere in the public interface, matching the
/// usual distance-geometry indexing; u < v after canonicalization.
struct Edge {
    int u = 0;
    int v = 0;
    double lo = 0.0;
    double hi = 0.0;

    bool exact() const { return lo == hi; }
};

/// A placement of n points in R^K. Point of vertex v is row v-1.
class Realization {
  public:
    Realization() = default;
    Realization(int n, int K) : pts_(Eigen::MatrixXd::Zero(n, K)) {}
    explicit Realization(Eigen::MatrixXd pts) : pts_(std::move(pts)) {}

    int n() const { return static_cast<int>(pts_.rows()); }
    int K() const { return static_cast<int>(pts_.cols()); }

    Eigen::MatrixXd& points() { return pts_; }
    const Eigen::MatrixXd& points() const { return pts_; }

    /// Point of 1-based vertex v.
    Eigen::RowVectorXd point(int v) const { return pts_.row(v - 1); }
    void set_point(int v, const Eigen::RowVectorXd& p) { pts_.row(v - 1) = p; }

    double distance(int u, int v) const { return (pts_.row(u - 1) - pts_.row(v - 1)).norm(); }

    /// Arithmetic mean over all vertices.
    Eigen::RowVectorXd centroid() const { return pts_.colwise().mean(); }

    /// Same realization translated so the centroid is at the origin.
    Realization centered() const {
        Realization r(*this);
        r.pts_.rowwise() -= centroid();
        return r;
    }

  private:
    Eigen::MatrixXd pts_;
};

/// Symmetric coordinate box [lo, hi] shared by every coordinate.
struct BoxBounds {
    double lo = 0.0;
    double hi = 0.0;
    double width() const { return hi - lo; }
};

/// An interval DGP instance: find x: V -> R^K with lo_uv <= |x_u - x_v| <= hi_uv.
class IdgpInstance {
  public:
    IdgpInstance() = default;

    /// Builds and validates the instance. Throws DomainError on inverted
    /// intervals, self loops, duplicate or out-of-range edges, or a
    /// malformed order/reference.
    IdgpInstance(int n, int K, std::vector<Edge> edges,
                 std::optional<std::vector<int>> order = std::nullopt,
                 std::optional<Realization> reference = std::nullopt)
        : n_(n), K_(K), edges_(std::move(edges)), order_(std::move(order)),
          reference_(std::move(reference)) {
        if (n_ < 1) throw DomainError("instance needs at least one vertex");
        if (K_ < 1) throw DomainError("embedding dimension K must be >= 1");
        std::set<std::pair<int, int>> seen;
        for (std::size_t i = 0; i < edges_.size(); ++i) {
            Edge& e = edges_[i];
            if (e.u > e.v) std::swap(e.u, e.v);
            const std::string at = "edge " + std::to_string(i + 1);
            if (e.u == e.v) throw DomainError(at + ": self loop on vertex " + std::to_string(e.u));
            if (e.u < 1 || e.v > n_) throw DomainError(at + ": vertex out of range");
            if (e.lo < 0.0) throw DomainError(at + ": negative lower bound");
            if (e.lo > e.hi)
                throw DomainError(at + ": lower bound " + std::to_string(e.lo) +
                                  " exceeds upper bound " + std::to_string(e.hi));
            if (!seen.insert({e.u, e.v}).second)
                throw DomainError(at + ": duplicate edge {" + std::to_string(e.u) + "," +
                                  std::to_string(e.v) + "}");
        }
        if (order_ && static_cast<int>(order_->size()) != n_)
            throw DomainError("order length " + std::to_string(order_->size()) +
                              " does not match n = " + std::to_string(n_));
        if (order_) {
            std::vector<bool> hit(n_ + 1, false);
            for (int v : *order_) {
                if (v < 1 || v > n_ || hit[v]) throw DomainError("order is not a permutation");
                hit[v] = true;
            }
        }
        if (reference_ && (reference_->n() != n_ || reference_->K() != K_))
            throw DomainError("reference realization shape does not match instance");
    }

    int n() const { return n_; }
    int K() const { return K_; }
    int m() const { return static_cast<int>(edges_.size()); }
    const std::vector<Edge>& edges() const { return edges_; }
    const std::optional<std::vector<int>>& order() const { return order_; }
    const std::optional<Realization>& reference() const { return reference_; }

    /// True when every edge weight is a degenerate interval (plain DGP).
    bool exact_distances() const {
        return std::all_of(edges_.begin(), edges_.end(), [](const Edge& e) { return e.exact(); });
    }

    bool has_edge(int u, int v) const {
        if (u > v) std::swap(u, v);
        return std::any_of(edges_.begin(), edges_.end(),
                           [&](const Edge& e) { return e.u == u && e.v == v; });
    }

  private:
    int n_ = 0;
    int K_ = 1;
    std::vector<Edge> edges_;
    std::optional<std::vector<int>> order_;
    std::optional<Realization> reference_;
};

/// Number of edges forced by a contiguous trilateration order:
/// K(K-1)/2 for the initial clique plus K per later vertex.
inline long long discretization_edge_count(int n, int K) {
    if (K < 1 || n < K) throw DomainError("discretization_edge_count requires n >= K >= 1");
    return static_cast<long long>(K) * (K - 1) / 2 + static_cast<long long>(n - K) * K;
}

/// Checks the two contiguous-trilateration-order properties: the first K
/// vertices of `order` form a clique, and each later vertex is adjacent to
/// its K immediate predecessors. Throws on a malformed order.
inline bool validate_ctop_order(const IdgpInstance& inst, const std::vector<int>& order) {
    const int n = inst.n();
    if (static_cast<int>(order.size()) != n)
        throw DomainError("order length " + std::to_string(order.size()) +
                          " does not match n = " + std::to_string(n));
    std::vector<bool> hit(n + 1, false);
    for (int v : order) {
        if (v < 1 || v > n || hit[v]) throw DomainError("order is not a permutation");
        hit[v] = true;
    }
    const int K = inst.K();
    // Both properties together require exactly the pairs at order distance <= K.
    for (int j = 1; j < n; ++j)
        for (int i = std::max(0, j - K); i < j; ++i)
            if (!inst.has_edge(order[i], order[j])) return false;
    return true;
}

/// Discretization/pruning edge partition of a KDMDGP instance under a valid
/// order, plus the generator vertex set Z of the pruning group. Members of
/// Z are 1-based positions in the order (for the identity order, vertex
/// numbers).
struct DmdgpStructure {
    int n = 0;
    int K = 0;
    std::vector<int> order;
    std::vector<Edge> discretization_edges;
    std::vector<Edge> pruning_edges;
    std::vector<int> Z;
};

/// Partitions the edges and computes Z = {v > K : no pruning edge {u,w}
/// has u+K < v <= w}, all in order positions. Requires a valid cTOP order.
inline DmdgpStructure compute_Z(const IdgpInstance& inst, const std::vector<int>& order) {
    if (!validate_ctop_order(inst, order))
        throw DomainError("order is not a contiguous trilateration order for this instance");
    const int n = inst.n();
    const int K = inst.K();
    std::vector<int> pos(n + 1, 0);
    for (int i = 0; i < n; ++i) pos[order[i]] = i + 1;

    DmdgpStructure s;
    s.n = n;
    s.K = K;
    s.order = order;
    std::vector<bool> covered(n + 1, false);
    for (const Edge& e : inst.edges()) {
        int pu = pos[e.u], pv = pos[e.v];
        if (pu > pv) std::swap(pu, pv);
        if (pv - pu <= K) {
            s.discretization_edges.push_back(e);
        } else {
            s.pruning_edges.push_back(e);
            for (int v = pu + K + 1; v <= pv; ++v) covered[v] = true;
        }
    }
    for (int v = K + 1; v <= n; ++v)
        if (!covered[v]) s.Z.push_back(v);
    return s;
}

inline DmdgpStructure compute_Z(const IdgpInstance& inst) {
    if (!inst.order()) throw DomainError("instance carries no vertex order");
    return compute_Z(inst, *inst.order());
}

/// Default coordinate box: half the total upper edge weight in every
/// direction, so any single edge fits with room to spare.
inline BoxBounds default_box(const IdgpInstance& inst) {
    double sum = 0.0;
    for (const Edge& e : inst.edges()) sum += e.hi;
    return BoxBounds{-0.5 * sum, 0.5 * sum};
}

} // namespace idgp
