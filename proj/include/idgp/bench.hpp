#pragma once

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "idgp/measures.hpp"
#include "idgp/solvers.hpp"

namespace idgp {

struct BenchCombo {
    std::string solver;
    std::string formulation;
    std::string key() const { return solver + "+" + formulation; }
    bool operator==(const BenchCombo&) const = default;
};

/// The benchmarked solver x formulation matrix: the multistart and VNS
/// heuristics over the penalty family and the two relaxation merits, and
/// MWU over its pointwise reformulation.
inline const std::vector<BenchCombo>& supported_combinations() {
    static const std::vector<BenchCombo> combos = [] {
        std::vector<BenchCombo> cs;
        for (const char* solver : {"ms", "vns"})
            for (const char* f : {"idgp1", "idgp1var1", "idgp1var2", "idgp1var3", "idgp3",
                                  "idgp4", "idgp4var1"})
                cs.push_back({solver, f});
        cs.push_back({"mwu", "imwu"});
        return cs;
    }();
    return combos;
}

inline bool combo_supported(const BenchCombo& c) {
    const auto& all = supported_combinations();
    return std::find(all.begin(), all.end(), c) != all.end();
}

struct BenchPlan {
    std::vector<std::string> instance_names;
    std::vector<IdgpInstance> instances;
    std::vector<BenchCombo> combos;
    std::vector<std::uint64_t> seeds = {1};
    double time_limit_s = 20.0; // deterministic virtual seconds per cell
    long long max_restarts = 0;
    bool compute_demi = true;
    int workers = 1;
    double eta = 0.5;
    int mwu_horizon = 50;
    LocalSolveConfig local;

    void validate() const {
        if (instances.empty() || instances.size() != instance_names.size())
            throw DomainError("bench plan needs at least one named instance");
        if (combos.empty()) throw DomainError("bench plan needs at least one combination");
        for (const auto& c : combos)
            if (!combo_supported(c))
                throw DomainError("unsupported solver+formulation combination " + c.key());
        if (seeds.empty()) throw DomainError("bench plan needs at least one seed");
        if (time_limit_s <= 0.0) throw DomainError("per-cell time limit must be positive");
        if (workers < 1) throw DomainError("worker count must be >= 1");
    }
};

struct BenchRow {
    std::string instance;
    std::string solver;
    std::string formulation;
    std::uint64_t seed = 0;
    double phi = std::numeric_limits<double>::infinity();
    double psi = std::numeric_limits<double>::infinity();
    std::optional<double> demi;
    double cpu_s = 0.0;
    std::string status;
    bool ok = false;
};

struct BenchAverage {
    BenchCombo combo;
    double phi = 0.0;
    double psi = 0.0;
    double cpu_s = 0.0;
    std::optional<double> demi;
    int cells = 0;
};

struct BenchReport {
    std::vector<BenchRow> rows; // plan order
    std::vector<BenchAverage> averages;
    std::map<std::string, bool> hard; // instance name -> hard?
    std::vector<BenchAverage> ranking; // sorted ascending by average phi
};

/// Thresholds quantifying "approximately zero within one second" for the
/// easy/hard split.
inline constexpr double kEasyError = 1e-4;
inline constexpr double kEasySeconds = 1.0;

namespace detail {

inline std::string csv_sanitize(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return s;
}

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

inline BenchRow run_cell(const BenchPlan& plan, int instance_idx, const BenchCombo& combo,
                         std::uint64_t seed) {
    const IdgpInstance& inst = plan.instances[instance_idx];
    BenchRow row;
    row.instance = plan.instance_names[instance_idx];
    row.solver = combo.solver;
    row.formulation = combo.formulation;
    row.seed = seed;
    try {
        SolveBudget budget;
        budget.virtual_s = plan.time_limit_s;
        budget.max_restarts = plan.max_restarts;
        SolveReport rep;
        if (combo.solver == "mwu") {
            MwuConfig mc;
            mc.eta = plan.eta;
            mc.T = plan.mwu_horizon;
            mc.refine = plan.local;
            rep = mwu(inst, mc, std::move(budget), seed).report;
        } else {
            auto merit = make_formulation(inst, combo.formulation);
            rep = combo.solver == "ms"
                      ? multistart(inst, *merit, std::move(budget), seed, plan.local)
                      : vns(inst, *merit, std::move(budget), seed, plan.local);
        }
        row.phi = rep.phi;
        row.psi = rep.psi;
        row.cpu_s = rep.cpu_s;
        row.status = rep.status;
        row.ok = true;
        if (plan.compute_demi && inst.reference() && inst.order()) {
            try {
                const DmdgpStructure s = compute_Z(inst);
                row.demi = demi_alg1(inst.reference()->centered(), rep.best.centered(), s).residual;
            } catch (const Error&) {
                // no usable order or oversized group: measure stays empty
            }
        }
    } catch (const std::exception& ex) {
        row.status = std::string("error: ") + ex.what();
        row.ok = false;
    }
    return row;
}

} // namespace detail

/// Classification is a pure function of the rows: an instance is easy when
/// at least a third of the combinations reach phi, psi <= 1e-4 within one
/// second (any seed), hard otherwise.
inline std::map<std::string, bool> classify_hard(const std::vector<BenchRow>& rows,
                                                 const std::vector<BenchCombo>& combos) {
    std::map<std::string, std::set<std::string>> fast_combos;
    std::map<std::string, bool> hard;
    for (const auto& r : rows) {
        hard.emplace(r.instance, true);
        if (r.ok && r.phi <= kEasyError && r.psi <= kEasyError && r.cpu_s <= kEasySeconds)
            fast_combos[r.instance].insert(r.solver + "+" + r.formulation);
    }
    for (auto& [name, is_hard] : hard)
        is_hard = 3 * fast_combos[name].size() < combos.size();
    return hard;
}

inline std::vector<BenchAverage> combo_averages(const std::vector<BenchRow>& rows,
                                                const std::vector<BenchCombo>& combos) {
    std::vector<BenchAverage> avgs;
    for (const auto& c : combos) {
        BenchAverage a;
        a.combo = c;
        double demi_sum = 0.0;
        int demi_count = 0;
        for (const auto& r : rows) {
            if (!r.ok || r.solver != c.solver || r.formulation != c.formulation) continue;
            a.phi += r.phi;
            a.psi += r.psi;
            a.cpu_s += r.cpu_s;
            ++a.cells;
            if (r.demi) {
                demi_sum += *r.demi;
                ++demi_count;
            }
        }
        if (a.cells > 0) {
            a.phi /= a.cells;
            a.psi /= a.cells;
            a.cpu_s /= a.cells;
            if (demi_count > 0) a.demi = demi_sum / demi_count;
        }
        avgs.push_back(std::move(a));
    }
    return avgs;
}

/// Runs the full grid. Cells execute concurrently up to plan.workers, but
/// rows are stored by plan index, so serial and parallel runs emit
/// identical reports. Per-cell failures land in the status column.
inline BenchReport run_bench(const BenchPlan& plan) {
    plan.validate();
    struct Cell {
        int instance_idx;
        BenchCombo combo;
        std::uint64_t seed;
    };
    std::vector<Cell> cells;
    for (std::size_t i = 0; i < plan.instances.size(); ++i)
        for (const auto& c : plan.combos)
            for (std::uint64_t s : plan.seeds) cells.push_back({static_cast<int>(i), c, s});

    BenchReport report;
    report.rows.resize(cells.size());
    const int workers = std::min<int>(plan.workers, static_cast<int>(cells.size()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < cells.size(); ++i)
            report.rows[i] =
                detail::run_cell(plan, cells[i].instance_idx, cells[i].combo, cells[i].seed);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < cells.size(); i = next.fetch_add(1))
                    report.rows[i] = detail::run_cell(plan, cells[i].instance_idx, cells[i].combo,
                                                      cells[i].seed);
            });
        for (auto& t : pool) t.join();
    }

    report.averages = combo_averages(report.rows, plan.combos);
    report.hard = classify_hard(report.rows, plan.combos);
    report.ranking = report.averages;
    std::sort(report.ranking.begin(), report.ranking.end(),
              [](const BenchAverage& a, const BenchAverage& b) {
                  if (a.phi != b.phi) return a.phi < b.phi;
                  return a.combo.key() < b.combo.key();
              });
    return report;
}

inline std::string bench_csv(const BenchReport& report) {
    std::string out = "instance,solver,formulation,seed,phi,psi,demi,cpu_s,status\n";
    auto row_line = [&](const BenchRow& r) {
        out += detail::csv_sanitize(r.instance) + ',' + r.solver + ',' + r.formulation + ',';
        out += std::to_string(r.seed) + ',';
        out += r.ok ? detail::fmt_double(r.phi) : "";
        out += ',';
        out += r.ok ? detail::fmt_double(r.psi) : "";
        out += ',';
        out += r.demi ? detail::fmt_double(*r.demi) : "";
        out += ',';
        out += detail::fmt_double(r.cpu_s);
        out += ',' + detail::csv_sanitize(r.status) + '\n';
    };
    for (const auto& r : report.rows) row_line(r);
    for (const auto& a : report.averages) {
        out += "average," + a.combo.solver + ',' + a.combo.formulation + ",,";
        out += detail::fmt_double(a.phi) + ",";
        out += detail::fmt_double(a.psi) + ",";
        out += a.demi ? detail::fmt_double(*a.demi) : "";
        out += ',' + detail::fmt_double(a.cpu_s) + ",\n";
    }
    return out;
}

inline nlohmann::json bench_json(const BenchReport& report) {
    nlohmann::json j;
    j["rows"] = nlohmann::json::array();
    for (const auto& r : report.rows) {
        nlohmann::json row;
        row["instance"] = r.instance;
        row["solver"] = r.solver;
        row["formulation"] = r.formulation;
        row["seed"] = r.seed;
        row["phi"] = r.ok ? nlohmann::json(r.phi) : nlohmann::json(nullptr);
        row["psi"] = r.ok ? nlohmann::json(r.psi) : nlohmann::json(nullptr);
        row["demi"] = r.demi ? nlohmann::json(*r.demi) : nlohmann::json(nullptr);
        row["cpu_s"] = r.cpu_s;
        row["status"] = r.status;
        j["rows"].push_back(std::move(row));
    }
    j["averages"] = nlohmann::json::array();
    for (const auto& a : report.averages)
        j["averages"].push_back({{"solver", a.combo.solver},
                                 {"formulation", a.combo.formulation},
                                 {"phi", a.phi},
                                 {"psi", a.psi},
                                 {"cpu_s", a.cpu_s},
                                 {"demi", a.demi ? nlohmann::json(*a.demi) : nlohmann::json(nullptr)},
                                 {"cells", a.cells}});
    j["classification"] = nlohmann::json::object();
    for (const auto& [name, is_hard] : report.hard)
        j["classification"][name] = is_hard ? "hard" : "easy";
    j["ranking"] = nlohmann::json::array();
    for (const auto& a : report.ranking) j["ranking"].push_back(a.combo.key());
    return j;
}

/// Plain-text ranking table, best average phi first.
inline std::string ranking_table(const BenchReport& report) {
    std::string out = "rank  combination        avg_phi      avg_psi      avg_cpu_s\n";
    int rank = 1;
    for (const auto& a : report.ranking) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%-5d %-18s %-12.6g %-12.6g %-12.6g\n", rank++,
                      a.combo.key().c_str(), a.phi, a.psi, a.cpu_s);
        out += buf;
    }
    return out;
}

} // namespace idgp
