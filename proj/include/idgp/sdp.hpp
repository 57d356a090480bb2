#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "idgp/instance.hpp"

namespace idgp {

enum class SdpVariant { SdpRel, SdpRelTrace, Yajima };

inline SdpVariant sdp_variant_from_string(const std::string& s) {
    if (s == "sdprel") return SdpVariant::SdpRel;
    if (s == "sdprel-trace") return SdpVariant::SdpRelTrace;
    if (s == "yajima") return SdpVariant::Yajima;
    throw DomainError("unknown SDP variant \"" + s + "\" (sdprel, sdprel-trace, yajima)");
}

/// Sparse SDPA problem: min c.x subject to sum_k x_k F_k - F0 >= 0, with
/// the Gram matrix entries (upper triangle) as scalar variables. Block 1 is
/// the n x n PSD block; interval constraints sit on a diagonal block with
/// one row per inequality; Yajima's variant appends slack variables and
/// their sign block.
struct SdpaProblem {
    int mdim = 0;
    std::vector<int> blocks; // negative = diagonal block
    std::vector<double> c;
    struct Entry {
        int matno;  // 0 = F0
        int block;  // 1-based
        int i, j;   // 1-based, i <= j
        double value;
        bool operator==(const Entry&) const = default;
    };
    std::vector<Entry> entries;

    int psd_dim = 0;
    int inequality_count = 0;
};

namespace detail {

/// 1-based variable index of Gram entry (i, j), i <= j, in row-major
/// upper-triangle order.
inline int gram_var(int n, int i, int j) {
    return (i - 1) * n - (i - 1) * i / 2 + j; // 1-based
}

} // namespace detail

inline SdpaProblem build_sdp(const IdgpInstance& inst, SdpVariant variant) {
    const int n = inst.n();
    const int m = inst.m();
    const bool yajima = variant == SdpVariant::Yajima;
    SdpaProblem p;
    p.psd_dim = n;
    p.inequality_count = 2 * m;
    p.mdim = n * (n + 1) / 2 + (yajima ? m : 0);
    p.blocks = {n, -2 * m};
    if (yajima) p.blocks.push_back(-m);
    p.c.assign(p.mdim, 0.0);
    const int slack0 = n * (n + 1) / 2; // 0-based offset of slack variables

    // PSD block: variable k = X_ij contributes the symmetric unit matrix.
    for (int i = 1; i <= n; ++i)
        for (int j = i; j <= n; ++j)
            p.entries.push_back({detail::gram_var(n, i, j), 1, i, j, 1.0});

    for (int e = 0; e < m; ++e) {
        const Edge& ed = inst.edges()[e];
        const int uu = detail::gram_var(n, ed.u, ed.u);
        const int vv = detail::gram_var(n, ed.v, ed.v);
        const int uv = detail::gram_var(n, ed.u, ed.v);
        const double lo2 = ed.lo * ed.lo;
        const double hi2 = ed.hi * ed.hi;
        const int r1 = 2 * e + 1; // lower side
        const int r2 = 2 * e + 2; // upper side

        if (!yajima) {
            // X_uu + X_vv - 2 X_uv - lo2 >= 0
            p.entries.push_back({uu, 2, r1, r1, 1.0});
            p.entries.push_back({vv, 2, r1, r1, 1.0});
            p.entries.push_back({uv, 2, r1, r1, -2.0});
            if (lo2 != 0.0) p.entries.push_back({0, 2, r1, r1, lo2});
            // hi2 - (X_uu + X_vv - 2 X_uv) >= 0
            p.entries.push_back({uu, 2, r2, r2, -1.0});
            p.entries.push_back({vv, 2, r2, r2, -1.0});
            p.entries.push_back({uv, 2, r2, r2, 2.0});
            p.entries.push_back({0, 2, r2, r2, -hi2});
        } else {
            const int se = slack0 + e + 1;
            // s_e - (X_uu + X_vv - 2 X_uv) + lo2 >= 0
            p.entries.push_back({se, 2, r1, r1, 1.0});
            p.entries.push_back({uu, 2, r1, r1, -1.0});
            p.entries.push_back({vv, 2, r1, r1, -1.0});
            p.entries.push_back({uv, 2, r1, r1, 2.0});
            if (lo2 != 0.0) p.entries.push_back({0, 2, r1, r1, -lo2});
            // s_e - 2(X_uu + X_vv - 2 X_uv) + lo2 + hi2 >= 0
            p.entries.push_back({se, 2, r2, r2, 1.0});
            p.entries.push_back({uu, 2, r2, r2, -2.0});
            p.entries.push_back({vv, 2, r2, r2, -2.0});
            p.entries.push_back({uv, 2, r2, r2, 4.0});
            if (lo2 + hi2 != 0.0) p.entries.push_back({0, 2, r2, r2, -(lo2 + hi2)});
            // s_e >= 0
            p.entries.push_back({se, 3, e + 1, e + 1, 1.0});
        }

        switch (variant) {
            case SdpVariant::SdpRel:
                // max sum_e (X_uu + X_vv - 2 X_uv), negated for minimization
                p.c[uu - 1] -= 1.0;
                p.c[vv - 1] -= 1.0;
                p.c[uv - 1] += 2.0;
                break;
            case SdpVariant::SdpRelTrace:
                break; // objective set below
            case SdpVariant::Yajima:
                // sum_e (s_e - (X_uu + X_vv - 2 X_uv)) + 2 sum_e X_uv; the
                // constant sum lo2 is dropped from the exported objective.
                p.c[slack0 + e] += 1.0;
                p.c[uu - 1] -= 1.0;
                p.c[vv - 1] -= 1.0;
                p.c[uv - 1] += 4.0;
                break;
        }
    }
    if (variant == SdpVariant::SdpRelTrace)
        for (int i = 1; i <= n; ++i) p.c[detail::gram_var(n, i, i) - 1] = 1.0;
    return p;
}

inline std::string to_sdpa_string(const SdpaProblem& p) {
    std::ostringstream os;
    os.precision(17);
    os << p.mdim << " = mDIM\n";
    os << p.blocks.size() << " = nBLOCK\n";
    for (std::size_t b = 0; b < p.blocks.size(); ++b)
        os << p.blocks[b] << (b + 1 < p.blocks.size() ? ' ' : '\n');
    if (p.blocks.empty()) os << '\n';
    for (int k = 0; k < p.mdim; ++k) os << p.c[k] << (k + 1 < p.mdim ? ' ' : '\n');
    for (const auto& e : p.entries)
        os << e.matno << ' ' << e.block << ' ' << e.i << ' ' << e.j << ' ' << e.value << '\n';
    return os.str();
}

inline void export_sdp(const IdgpInstance& inst, SdpVariant variant, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << to_sdpa_string(build_sdp(inst, variant));
}

/// Structure-level parser for the sparse SDPA format (round-trips our own
/// exports; also accepts comment lines and brace block lists).
inline SdpaProblem parse_sdpa(std::istream& in) {
    SdpaProblem p;
    std::string line;
    int lineno = 0;
    auto next_data_line = [&]() -> std::string {
        while (std::getline(in, line)) {
            ++lineno;
            const auto pos = line.find_first_not_of(" \t\r");
            if (pos == std::string::npos) continue;
            if (line[pos] == '*' || line[pos] == '"') continue;
            for (char& ch : line)
                if (ch == ',' || ch == '{' || ch == '}' || ch == '(' || ch == ')') ch = ' ';
            return line;
        }
        throw ParseError("unexpected end of SDPA file", lineno);
    };
    {
        std::istringstream is(next_data_line());
        if (!(is >> p.mdim)) throw ParseError("malformed mDIM line", lineno);
    }
    int nblock = 0;
    {
        std::istringstream is(next_data_line());
        if (!(is >> nblock)) throw ParseError("malformed nBLOCK line", lineno);
    }
    {
        std::istringstream is(next_data_line());
        for (int b = 0; b < nblock; ++b) {
            int sz = 0;
            if (!(is >> sz)) throw ParseError("malformed block structure line", lineno);
            p.blocks.push_back(sz);
        }
    }
    {
        std::istringstream is(next_data_line());
        for (int k = 0; k < p.mdim; ++k) {
            double ck = 0.0;
            if (!(is >> ck)) throw ParseError("malformed objective line", lineno);
            p.c.push_back(ck);
        }
    }
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream is(line);
        SdpaProblem::Entry e{};
        if (!(is >> e.matno >> e.block >> e.i >> e.j >> e.value)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            throw ParseError("malformed entry line", lineno);
        }
        p.entries.push_back(e);
    }
    p.psd_dim = p.blocks.empty() ? 0 : p.blocks.front();
    p.inequality_count = p.blocks.size() > 1 ? -p.blocks[1] : 0;
    return p;
}

/// Reads a primal Gram matrix from "row col value" triples (1-based,
/// either triangle); unspecified entries are zero.
inline Eigen::MatrixXd read_primal_matrix(std::istream& in, int n) {
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n, n);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto pos = line.find_first_not_of(" \t\r");
        if (pos == std::string::npos || line[pos] == '*' || line[pos] == '#') continue;
        std::istringstream is(line);
        int i = 0, j = 0;
        double v = 0.0;
        if (!(is >> i >> j >> v)) throw ParseError("malformed matrix entry", lineno);
        if (i < 1 || j < 1 || i > n || j > n)
            throw ParseError("matrix index out of range", lineno);
        X(i - 1, j - 1) = v;
        X(j - 1, i - 1) = v;
    }
    return X;
}

/// Rank-K realization from a PSD Gram matrix: top-K eigenpairs, negative
/// eigenvalues clamped to zero.
inline Realization extract_realization(const Eigen::MatrixXd& X, int K) {
    if (X.rows() != X.cols()) throw DomainError("Gram matrix must be square");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(X);
    const int n = static_cast<int>(X.rows());
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, K);
    for (int k = 0; k < K && k < n; ++k) {
        const int idx = n - 1 - k; // eigenvalues ascending
        const double lam = std::max(0.0, eig.eigenvalues()(idx));
        P.col(k) = std::sqrt(lam) * eig.eigenvectors().col(idx);
    }
    return Realization(std::move(P));
}

} // namespace idgp
