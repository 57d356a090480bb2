#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "idgp/instance.hpp"

namespace idgp {

struct PdbOptions {
    bool backbone_only = true;       // keep atoms named N, CA, C
    double cutoff = 5.0;             // edge distance cutoff, Angstrom
    double interval_rel_width = 0.1; // interval half-width for imprecise pairs
};

namespace detail {

inline std::string strip(const std::string& s) {
    const auto a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

inline double parse_coord(const std::string& line, std::size_t col0, int lineno) {
    if (line.size() < col0 + 8) throw ParseError("truncated ATOM record", lineno);
    try {
        return std::stod(line.substr(col0, 8));
    } catch (const std::exception&) {
        throw ParseError("malformed coordinate field \"" + strip(line.substr(col0, 8)) + "\"",
                         lineno);
    }
}

} // namespace detail

/// Reads ATOM records (fixed-width PDB columns, first MODEL only) and
/// builds an interval instance: every atom pair within the cutoff becomes
/// an edge; pairs one or two apart along the kept-atom order are treated as
/// precisely known (covalent bond / angle geometry) and stay exact, all
/// others are widened to [d(1-w), d(1+w)]. The coordinates are stored as
/// the reference realization, and the file order is kept as the instance
/// order when it is a valid contiguous trilateration order.
inline IdgpInstance ingest_pdb(const std::string& path, const PdbOptions& opt = {}) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);

    std::vector<Eigen::RowVector3d> coords;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.rfind("ENDMDL", 0) == 0) break;
        if (line.rfind("ATOM", 0) != 0) continue;
        if (line.size() < 54) throw ParseError("truncated ATOM record", lineno);
        const char alt = line.size() > 16 ? line[16] : ' ';
        if (alt != ' ' && alt != 'A') continue; // first alternate location only
        if (opt.backbone_only) {
            const std::string name = detail::strip(line.substr(12, 4));
            if (name != "N" && name != "CA" && name != "C") continue;
        }
        coords.emplace_back(detail::parse_coord(line, 30, lineno),
                            detail::parse_coord(line, 38, lineno),
                            detail::parse_coord(line, 46, lineno));
    }
    if (coords.empty()) throw Error(path + ": no ATOM records found");

    const int n = static_cast<int>(coords.size());
    Eigen::MatrixXd pts(n, 3);
    for (int i = 0; i < n; ++i) pts.row(i) = coords[i];

    const double w = opt.interval_rel_width;
    std::vector<Edge> edges;
    for (int u = 0; u < n; ++u) {
        for (int v = u + 1; v < n; ++v) {
            const double d = (pts.row(u) - pts.row(v)).norm();
            if (d > opt.cutoff) continue;
            if (v - u <= 2)
                edges.push_back(Edge{u + 1, v + 1, d, d});
            else
                edges.push_back(Edge{u + 1, v + 1, d * (1.0 - w), d * (1.0 + w)});
        }
    }

    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i + 1;
    IdgpInstance inst(n, 3, edges, order, Realization(pts));
    if (!validate_ctop_order(inst, order))
        inst = IdgpInstance(n, 3, std::move(edges), std::nullopt, Realization(std::move(pts)));
    return inst;
}

} // namespace idgp
