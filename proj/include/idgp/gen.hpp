#pragma once

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SVD>

#include "idgp/instance.hpp"

namespace idgp {

struct RandomDmdgpConfig {
    int n = 10;
    int K = 3;
    double s = 0.1; // pruning-edge probability
    std::uint64_t seed = 0;
    int samples = 500;

    void validate() const {
        if (K < 1 || n < K) throw DomainError("random KDMDGP requires n >= K >= 1");
        if (s < 0.0 || s > 1.0) throw DomainError("pruning probability must be in [0,1]");
        if (samples < 1) throw DomainError("at least one sample required");
    }
};

/// Random KDMDGP graph: the full discretization backbone plus each other
/// pair independently with probability s. Unit weights, identity order.
inline IdgpInstance random_kdmdgp(const RandomDmdgpConfig& cfg) {
    cfg.validate();
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::vector<Edge> edges;
    for (int u = 1; u <= cfg.n; ++u)
        for (int v = u + 1; v <= cfg.n; ++v)
            if (v - u <= cfg.K || u01(rng) < cfg.s) edges.push_back(Edge{u, v, 1.0, 1.0});
    std::vector<int> order(cfg.n);
    for (int i = 0; i < cfg.n; ++i) order[i] = i + 1;
    return IdgpInstance(cfg.n, cfg.K, std::move(edges), std::move(order));
}

/// Upper bound 1 + (n-K-1)(1-s)^(n-K-1) on the expected generator count.
inline double expected_Z_bound(int n, int K, double s) {
    if (K < 1 || n < K) throw DomainError("expected_Z_bound requires n >= K >= 1");
    if (s < 0.0 || s > 1.0) throw DomainError("probability must be in [0,1]");
    return 1.0 + (n - K - 1) * std::pow(1.0 - s, n - K - 1);
}

/// Exact expectation sum_{v=K+1}^n (1-s)^((v-K-1)(n-v+1)).
inline double expected_Z_exact(int n, int K, double s) {
    if (K < 1 || n < K) throw DomainError("expected_Z_exact requires n >= K >= 1");
    if (s < 0.0 || s > 1.0) throw DomainError("probability must be in [0,1]");
    double sum = 0.0;
    for (int v = K + 1; v <= n; ++v)
        sum += std::pow(1.0 - s, static_cast<double>(v - K - 1) * (n - v + 1));
    return sum;
}

/// Upper bound (8/s^2 - 2/s)(1-s)^(n-K-1) on the variance of |Z|.
inline double variance_Z_bound(int n, int K, double s) {
    if (K < 1 || n < K) throw DomainError("variance_Z_bound requires n >= K >= 1");
    if (s <= 0.0 || s > 1.0) throw DomainError("variance bound requires s in (0,1]");
    return (8.0 / (s * s) - 2.0 / s) * std::pow(1.0 - s, n - K - 1);
}

struct ZStats {
    int n = 0;
    int K = 0;
    double s = 0.0;
    int samples = 0;
    double mean = 0.0;
    double stddev = 0.0;
    double expectation_exact = 0.0;
    double expectation_bound = 0.0;
    double variance_bound = 0.0; // NaN when s = 0
};

/// Monte-Carlo statistics of |Z| over random KDMDGP graphs, next to the
/// closed-form expectation and bounds.
inline ZStats z_statistics(const RandomDmdgpConfig& cfg) {
    cfg.validate();
    ZStats zs;
    zs.n = cfg.n;
    zs.K = cfg.K;
    zs.s = cfg.s;
    zs.samples = cfg.samples;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < cfg.samples; ++i) {
        RandomDmdgpConfig one = cfg;
        one.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(i));
        const IdgpInstance inst = random_kdmdgp(one);
        const auto z = static_cast<double>(compute_Z(inst).Z.size());
        sum += z;
        sumsq += z * z;
    }
    zs.mean = sum / cfg.samples;
    zs.stddev = std::sqrt(std::max(0.0, sumsq / cfg.samples - zs.mean * zs.mean));
    zs.expectation_exact = expected_Z_exact(cfg.n, cfg.K, cfg.s);
    zs.expectation_bound = expected_Z_bound(cfg.n, cfg.K, cfg.s);
    zs.variance_bound = cfg.s > 0.0 ? variance_Z_bound(cfg.n, cfg.K, cfg.s)
                                    : std::numeric_limits<double>::quiet_NaN();
    return zs;
}

struct FeasibleInstanceConfig {
    int n = 37;
    int K = 3;
    double interval_rel_width = 0.1; // pruning edges get [d(1-w), d(1+w)]
    double pruning_cutoff = 2.5;     // pair distance cutoff, in step units
    std::uint64_t seed = 0;
};

namespace detail {

/// Smallest singular value of consecutive point differences; zero means
/// affinely dependent anchors.
inline double anchor_margin(const Eigen::MatrixXd& pts, int first, int K) {
    if (K == 1) return 1.0;
    Eigen::MatrixXd D(K - 1, K);
    for (int i = 1; i < K; ++i) D.row(i - 1) = pts.row(first + i) - pts.row(first);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(D);
    return svd.singularValues()(K - 2);
}

} // namespace detail

/// Feasible instance backed by a unit-step random-walk realization with
/// jitter: exact distances on discretization edges, +/- w relative
/// intervals on pruning edges (pairs within the cutoff), identity order,
/// generating realization stored as the reference.
inline IdgpInstance random_feasible_instance(const FeasibleInstanceConfig& cfg) {
    if (cfg.K < 1 || cfg.n < cfg.K) throw DomainError("instance requires n >= K >= 1");
    if (cfg.interval_rel_width < 0.0 || cfg.interval_rel_width >= 1.0)
        throw DomainError("interval width must be in [0,1)");
    std::mt19937_64 rng(derive_seed(cfg.seed, 0x77a1ULL));
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> jitter(-0.1, 0.1);

    Eigen::MatrixXd pts = Eigen::MatrixXd::Zero(cfg.n, cfg.K);
    constexpr int kMaxRetries = 64;
    for (int i = 1; i < cfg.n; ++i) {
        int tries = 0;
        while (true) {
            Eigen::RowVectorXd dir(cfg.K);
            for (int k = 0; k < cfg.K; ++k) dir(k) = gauss(rng);
            if (dir.norm() < 1e-12) continue;
            dir /= dir.norm();
            for (int k = 0; k < cfg.K; ++k) dir(k) += jitter(rng);
            pts.row(i) = pts.row(i - 1) + dir;
            const int first = std::max(0, i - cfg.K + 1);
            if (i - first + 1 < cfg.K || detail::anchor_margin(pts, first, cfg.K) > 1e-6) break;
            if (++tries >= kMaxRetries)
                throw Error("could not sample a non-degenerate walk step at vertex " +
                            std::to_string(i + 1));
        }
    }

    const double w = cfg.interval_rel_width;
    std::vector<Edge> edges;
    for (int u = 0; u < cfg.n; ++u) {
        for (int v = u + 1; v < cfg.n; ++v) {
            const double d = (pts.row(u) - pts.row(v)).norm();
            if (v - u <= cfg.K) {
                edges.push_back(Edge{u + 1, v + 1, d, d});
            } else if (d <= cfg.pruning_cutoff) {
                edges.push_back(Edge{u + 1, v + 1, d * (1.0 - w), d * (1.0 + w)});
            }
        }
    }
    std::vector<int> order(cfg.n);
    for (int i = 0; i < cfg.n; ++i) order[i] = i + 1;
    return IdgpInstance(cfg.n, cfg.K, std::move(edges), std::move(order),
                        Realization(std::move(pts)));
}

} // namespace idgp
