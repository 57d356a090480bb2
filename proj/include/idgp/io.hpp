#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "idgp/instance.hpp"

namespace idgp {

enum class InstanceFormat { Json, Text };

inline InstanceFormat format_from_path(const std::string& path) {
    auto dot = path.rfind('.');
    std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
    return (ext == "txt" || ext == "dat") ? InstanceFormat::Text : InstanceFormat::Json;
}

namespace detail {

inline nlohmann::json realization_to_json(const Realization& r) {
    nlohmann::json pts = nlohmann::json::array();
    for (int i = 0; i < r.n(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int k = 0; k < r.K(); ++k) row.push_back(r.points()(i, k));
        pts.push_back(std::move(row));
    }
    return pts;
}

inline Realization realization_from_json(const nlohmann::json& pts, int K,
                                         const std::string& what) {
    if (!pts.is_array() || pts.empty())
        throw ParseError(what + ": expected a non-empty array of points");
    Eigen::MatrixXd m(pts.size(), K);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (!pts[i].is_array() || static_cast<int>(pts[i].size()) != K)
            throw ParseError(what + ": point " + std::to_string(i + 1) + " is not a " +
                             std::to_string(K) + "-vector");
        for (int k = 0; k < K; ++k) m(i, k) = pts[i][k].get<double>();
    }
    return Realization(std::move(m));
}

} // namespace detail

inline nlohmann::json instance_to_json(const IdgpInstance& inst) {
    nlohmann::json j;
    j["K"] = inst.K();
    j["n"] = inst.n();
    j["edges"] = nlohmann::json::array();
    for (const Edge& e : inst.edges()) j["edges"].push_back({e.u, e.v, e.lo, e.hi});
    j["order"] = inst.order() ? nlohmann::json(*inst.order()) : nlohmann::json(nullptr);
    j["reference"] = inst.reference() ? detail::realization_to_json(*inst.reference())
                                      : nlohmann::json(nullptr);
    return j;
}

inline IdgpInstance instance_from_json(const nlohmann::json& j) {
    for (const char* field : {"K", "n", "edges"})
        if (!j.contains(field)) throw ParseError(std::string("missing field \"") + field + "\"");
    const int n = j.at("n").get<int>();
    const int K = j.at("K").get<int>();
    std::vector<Edge> edges;
    const auto& je = j.at("edges");
    if (!je.is_array()) throw ParseError("field \"edges\" is not an array");
    edges.reserve(je.size());
    for (std::size_t i = 0; i < je.size(); ++i) {
        if (!je[i].is_array() || je[i].size() != 4)
            throw ParseError("edge " + std::to_string(i + 1) + ": expected [u, v, L, U]");
        edges.push_back(Edge{je[i][0].get<int>(), je[i][1].get<int>(), je[i][2].get<double>(),
                             je[i][3].get<double>()});
    }
    std::optional<std::vector<int>> order;
    if (j.contains("order") && !j.at("order").is_null())
        order = j.at("order").get<std::vector<int>>();
    std::optional<Realization> reference;
    if (j.contains("reference") && !j.at("reference").is_null())
        reference = detail::realization_from_json(j.at("reference"), K, "reference");
    try {
        return IdgpInstance(n, K, std::move(edges), std::move(order), std::move(reference));
    } catch (const DomainError& e) {
        throw ParseError(e.what());
    }
}

inline std::string instance_to_text(const IdgpInstance& inst) {
    std::ostringstream os;
    os.precision(17);
    os << inst.n() << ' ' << inst.m() << ' ' << inst.K() << '\n';
    for (const Edge& e : inst.edges())
        os << e.u << ' ' << e.v << ' ' << e.lo << ' ' << e.hi << '\n';
    return os.str();
}

inline IdgpInstance instance_from_text(std::istream& in) {
    std::string line;
    int lineno = 0;
    auto next_line = [&]() -> bool {
        while (std::getline(in, line)) {
            ++lineno;
            auto pos = line.find_first_not_of(" \t\r");
            if (pos == std::string::npos || line[pos] == '#') continue;
            return true;
        }
        return false;
    };
    if (!next_line()) throw ParseError("empty instance file");
    int n = 0, m = 0, K = 0;
    {
        std::istringstream hs(line);
        if (!(hs >> n >> m >> K)) throw ParseError("malformed header, expected \"n m K\"", lineno);
    }
    std::vector<Edge> edges;
    edges.reserve(m);
    for (int i = 0; i < m; ++i) {
        if (!next_line())
            throw ParseError("expected " + std::to_string(m) + " edges, got " + std::to_string(i),
                             lineno);
        std::istringstream es(line);
        Edge e;
        if (!(es >> e.u >> e.v >> e.lo >> e.hi))
            throw ParseError("malformed edge line, expected \"u v L U\"", lineno);
        edges.push_back(e);
    }
    try {
        return IdgpInstance(n, K, std::move(edges));
    } catch (const DomainError& e) {
        throw ParseError(e.what());
    }
}

inline void save_instance(const IdgpInstance& inst, const std::string& path,
                          std::optional<InstanceFormat> format = std::nullopt) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    if (format.value_or(format_from_path(path)) == InstanceFormat::Json)
        out << instance_to_json(inst).dump(2) << '\n';
    else
        out << instance_to_text(inst);
}

inline IdgpInstance load_instance(const std::string& path,
                                  std::optional<InstanceFormat> format = std::nullopt) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    if (format.value_or(format_from_path(path)) == InstanceFormat::Json) {
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(path + ": " + e.what());
        }
        return instance_from_json(j);
    }
    return instance_from_text(in);
}

inline void save_realization(const Realization& r, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    nlohmann::json j;
    j["n"] = r.n();
    j["K"] = r.K();
    j["points"] = detail::realization_to_json(r);
    out << j.dump(2) << '\n';
}

inline Realization load_realization(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
    if (!j.contains("K") || !j.contains("points"))
        throw ParseError(path + ": missing field \"K\" or \"points\"");
    return detail::realization_from_json(j.at("points"), j.at("K").get<int>(), path);
}

} // namespace idgp
