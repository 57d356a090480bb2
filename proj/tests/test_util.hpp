#pragma once

#include <random>
#include <vector>

#include <Eigen/Core>
#include <Eigen/QR>

#include "idgp/instance.hpp"

namespace idgp_test {

inline Eigen::MatrixXd random_rotation(int K, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXd A(K, K);
    for (int i = 0; i < K; ++i)
        for (int j = 0; j < K; ++j) A(i, j) = g(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
    Eigen::MatrixXd Q = qr.householderQ();
    if (Q.determinant() < 0.0) Q.col(0) *= -1.0;
    return Q;
}

inline idgp::Realization random_points(int n, int K, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, scale);
    Eigen::MatrixXd p(n, K);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < K; ++k) p(i, k) = g(rng);
    return idgp::Realization(std::move(p));
}

/// Pure backbone instance (all pairs at order distance <= K) with unit
/// weights and identity order; Z = {K+1, ..., n}.
inline idgp::IdgpInstance backbone_instance(int n, int K,
                                            const std::vector<idgp::Edge>& extra = {}) {
    std::vector<idgp::Edge> edges;
    for (int u = 1; u <= n; ++u)
        for (int v = u + 1; v <= std::min(n, u + K); ++v)
            edges.push_back(idgp::Edge{u, v, 1.0, 1.0});
    for (const auto& e : extra) edges.push_back(e);
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i + 1;
    return idgp::IdgpInstance(n, K, std::move(edges), std::move(order));
}

} // namespace idgp_test
