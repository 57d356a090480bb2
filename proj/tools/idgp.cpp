// Command-line front end: instance generation, solving, measurement, SDP
// export/extraction, and the benchmark grid.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "idgp/idgp.hpp"

namespace {

using namespace idgp;

std::pair<int, int> parse_range(const std::string& spec) {
    const auto dots = spec.find("..");
    if (dots == std::string::npos) {
        const int v = std::stoi(spec);
        return {v, v};
    }
    return {std::stoi(spec.substr(0, dots)), std::stoi(spec.substr(dots + 2))};
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << content;
}

struct GenerateArgs {
    bool random = false;
    bool kdmdgp = false;
    std::string pdb_path;
    std::string zstudy_range;
    int n = 37;
    int K = 3;
    double width = 0.1;
    double cutoff = 2.5;
    double s = 0.1;
    int samples = 500;
    std::uint64_t seed = 0;
    bool all_atoms = false;
    double pdb_cutoff = 5.0;
    std::string out;
};

int run_generate(const GenerateArgs& a) {
    if (!a.zstudy_range.empty()) {
        const auto [n_lo, n_hi] = parse_range(a.zstudy_range);
        std::string csv = "n,K,s,samples,mean,stddev,expectation_exact,expectation_bound,"
                          "variance_bound\n";
        for (int n = n_lo; n <= n_hi; ++n) {
            RandomDmdgpConfig cfg;
            cfg.n = n;
            cfg.K = a.K;
            cfg.s = a.s;
            cfg.samples = a.samples;
            cfg.seed = derive_seed(a.seed, static_cast<std::uint64_t>(n));
            const ZStats z = z_statistics(cfg);
            char line[256];
            std::snprintf(line, sizeof line, "%d,%d,%g,%d,%.9g,%.9g,%.9g,%.9g,%.9g\n", z.n, z.K,
                          z.s, z.samples, z.mean, z.stddev, z.expectation_exact,
                          z.expectation_bound, z.variance_bound);
            csv += line;
        }
        if (a.out.empty())
            std::cout << csv;
        else
            write_text_file(a.out, csv);
        return 0;
    }

    IdgpInstance inst;
    if (!a.pdb_path.empty()) {
        PdbOptions opt;
        opt.backbone_only = !a.all_atoms;
        opt.cutoff = a.pdb_cutoff;
        opt.interval_rel_width = a.width;
        inst = ingest_pdb(a.pdb_path, opt);
    } else if (a.kdmdgp) {
        RandomDmdgpConfig cfg;
        cfg.n = a.n;
        cfg.K = a.K;
        cfg.s = a.s;
        cfg.seed = a.seed;
        inst = random_kdmdgp(cfg);
    } else if (a.random) {
        FeasibleInstanceConfig cfg;
        cfg.n = a.n;
        cfg.K = a.K;
        cfg.interval_rel_width = a.width;
        cfg.pruning_cutoff = a.cutoff;
        cfg.seed = a.seed;
        inst = random_feasible_instance(cfg);
    } else {
        throw Error("choose one of --random, --kdmdgp, --pdb, --zstudy");
    }
    const std::string out = a.out.empty() ? "instance.json" : a.out;
    save_instance(inst, out);
    std::cout << "wrote " << out << " (n=" << inst.n() << ", m=" << inst.m() << ", K=" << inst.K()
              << ")\n";
    return 0;
}

struct SolveArgs {
    std::string in;
    std::string solver = "ms";
    std::string formulation = "idgp1";
    double time_s = 20.0;
    long long restarts = 0;
    std::uint64_t seed = 0;
    double eta = 0.5;
    int T = 50;
    std::string theta_rule = "figure";
    std::string export_sdp_variant;
    std::string out;
};

int run_solve(const SolveArgs& a) {
    const IdgpInstance inst = load_instance(a.in);

    if (!a.export_sdp_variant.empty()) {
        const std::string out = a.out.empty() ? "problem.dat-s" : a.out;
        export_sdp(inst, sdp_variant_from_string(a.export_sdp_variant), out);
        std::cout << "wrote " << out << '\n';
        return 0;
    }

    SolveBudget budget;
    budget.wall_s = a.time_s;
    budget.max_restarts = a.restarts;

    SolveReport rep;
    if (a.solver == "mwu") {
        if (a.formulation != "imwu")
            throw Error("mwu pairs only with the pointwise formulation (imwu)");
        MwuConfig cfg;
        cfg.eta = a.eta;
        cfg.T = a.T;
        cfg.theta_rule = a.theta_rule == "text" ? ThetaRule::Text : ThetaRule::Figure;
        rep = mwu(inst, cfg, std::move(budget), a.seed).report;
    } else if (a.solver == "ms" || a.solver == "vns") {
        if (a.formulation == "imwu")
            throw Error("the pointwise formulation is driven by the mwu solver only");
        auto merit = make_formulation(inst, a.formulation);
        rep = a.solver == "ms" ? multistart(inst, *merit, std::move(budget), a.seed)
                               : vns(inst, *merit, std::move(budget), a.seed);
    } else {
        throw Error("unknown solver \"" + a.solver + "\" (ms, vns, mwu)");
    }

    if (inst.reference() && inst.order()) {
        try {
            rep.demi =
                demi_alg1(inst.reference()->centered(), rep.best.centered(), compute_Z(inst))
                    .residual;
        } catch (const Error&) {
        }
    }

    std::cout << "solver=" << rep.solver << " formulation=" << rep.formulation
              << " phi=" << rep.phi << " psi=" << rep.psi << " cpu_s=" << rep.cpu_s
              << " wall_s=" << rep.wall_s << " status=" << rep.status << '\n';
    if (!a.out.empty()) {
        write_text_file(a.out, solve_report_to_json(rep).dump(2) + "\n");
        std::cout << "wrote " << a.out << '\n';
    }
    return 0;
}

struct MeasureArgs {
    std::string in;
    std::string x_path;
    std::string y_path;
    bool want_demi = true;
    bool allow_reflection = true;
    std::string out;
};

int run_measure(const MeasureArgs& a) {
    const IdgpInstance inst = load_instance(a.in);
    const Realization x = load_realization(a.x_path);
    std::optional<Realization> y;
    if (!a.y_path.empty())
        y = load_realization(a.y_path);
    else if (inst.reference())
        y = inst.reference();

    nlohmann::json j;
    j["phi"] = phi(inst, x);
    j["psi"] = psi(inst, x);
    if (y) {
        const Realization xc = x.centered();
        const Realization yc = y->centered();
        j["crmsd"] = procrustes(yc, xc, a.allow_reflection).residual;
        j["delta_naive"] = delta_naive(yc, xc, inst);
        if (a.want_demi) {
            if (!inst.order())
                throw Error("DEMI requires an instance with a vertex order");
            const DmdgpStructure s = compute_Z(inst);
            const AlignmentResult alg1 = demi_alg1(yc, xc, s, a.allow_reflection);
            const AlignmentResult exh = demi_exhaustive(yc, xc, s, a.allow_reflection);
            j["demi"] = alg1.residual;
            j["demi_exhaustive"] = exh.residual;
            j["demi_alignment"] = alignment_to_json(exh);
        }
    }
    const std::string text = j.dump(2) + "\n";
    std::cout << text;
    if (!a.out.empty()) write_text_file(a.out, text);
    return 0;
}

struct SdpExtractArgs {
    std::string in;
    std::string primal;
    std::string out;
};

int run_sdp_extract(const SdpExtractArgs& a) {
    const IdgpInstance inst = load_instance(a.in);
    std::ifstream pin(a.primal);
    if (!pin) throw Error("cannot open " + a.primal);
    const Eigen::MatrixXd X = read_primal_matrix(pin, inst.n());
    const Realization r = extract_realization(X, inst.K());
    std::cout << "phi=" << phi(inst, r) << " psi=" << psi(inst, r) << '\n';
    if (!a.out.empty()) save_realization(r, a.out);
    return 0;
}

struct BenchArgs {
    std::vector<std::string> instance_paths;
    std::string combos = "ms+idgp1,vns+idgp1,mwu+imwu";
    std::string seeds = "1";
    double time_s = 20.0;
    long long restarts = 0;
    int workers = 0;
    bool demi = true;
    double eta = 0.5;
    int T = 50;
    std::string out;
    std::string json_out;
};

int run_bench_cmd(const BenchArgs& a) {
    BenchPlan plan;
    for (const auto& path : a.instance_paths) {
        plan.instances.push_back(load_instance(path));
        auto base = path.substr(path.find_last_of('/') + 1);
        plan.instance_names.push_back(base);
    }
    {
        std::istringstream cs(a.combos);
        std::string item;
        while (std::getline(cs, item, ',')) {
            const auto plus = item.find('+');
            if (plus == std::string::npos)
                throw Error("combination \"" + item + "\" is not solver+formulation");
            plan.combos.push_back({item.substr(0, plus), item.substr(plus + 1)});
        }
    }
    {
        plan.seeds.clear();
        std::istringstream ss(a.seeds);
        std::string item;
        while (std::getline(ss, item, ',')) plan.seeds.push_back(std::stoull(item));
    }
    plan.time_limit_s = a.time_s;
    plan.max_restarts = a.restarts;
    plan.compute_demi = a.demi;
    plan.eta = a.eta;
    plan.mwu_horizon = a.T;
    if (a.workers > 0) {
        plan.workers = a.workers;
    } else if (const char* env = std::getenv("IDGP_WORKERS")) {
        plan.workers = std::max(1, std::atoi(env));
    }

    const BenchReport report = run_bench(plan);
    const std::string csv = bench_csv(report);
    if (a.out.empty())
        std::cout << csv;
    else
        write_text_file(a.out, csv);
    if (!a.json_out.empty()) write_text_file(a.json_out, bench_json(report).dump(2) + "\n");

    std::cout << "\nclassification:\n";
    for (const auto& [name, is_hard] : report.hard)
        std::cout << "  " << name << ": " << (is_hard ? "hard" : "easy") << '\n';
    std::cout << '\n' << ranking_table(report);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"interval distance geometry toolkit"};
    app.require_subcommand(1);

    GenerateArgs gen_args;
    auto* gen_cmd = app.add_subcommand("generate", "generate instances and |Z| studies");
    gen_cmd->add_flag("--random", gen_args.random, "random feasible instance with a reference");
    gen_cmd->add_flag("--kdmdgp", gen_args.kdmdgp, "random KDMDGP graph (unit weights)");
    gen_cmd->add_option("--pdb", gen_args.pdb_path, "ingest a PDB file");
    gen_cmd->add_option("--zstudy", gen_args.zstudy_range,
                        "emit |Z| statistics CSV over n range, e.g. 10..60");
    gen_cmd->add_option("--n", gen_args.n, "vertex count");
    gen_cmd->add_option("--k", gen_args.K, "embedding dimension");
    gen_cmd->add_option("--width", gen_args.width, "relative interval half-width");
    gen_cmd->add_option("--cutoff", gen_args.cutoff, "pruning-edge distance cutoff (step units)");
    gen_cmd->add_option("--s", gen_args.s, "pruning-edge probability");
    gen_cmd->add_option("--samples", gen_args.samples, "samples per configuration");
    gen_cmd->add_option("--seed", gen_args.seed, "RNG seed");
    gen_cmd->add_flag("--all-atoms", gen_args.all_atoms, "keep every atom, not just N/CA/C");
    gen_cmd->add_option("--pdb-cutoff", gen_args.pdb_cutoff, "PDB edge cutoff in Angstrom");
    gen_cmd->add_option("--out,-o", gen_args.out, "output path");

    SolveArgs solve_args;
    auto* solve_cmd = app.add_subcommand("solve", "run one solver+formulation combination");
    solve_cmd->add_option("--in,-i", solve_args.in, "instance file")->required();
    solve_cmd->add_option("--solver", solve_args.solver, "ms | vns | mwu");
    solve_cmd->add_option("--formulation", solve_args.formulation,
                          "idgp1[var1|var2|var3|sqrt] | idgp3 | idgp4[var1] | stress | imwu");
    solve_cmd->add_option("--time", solve_args.time_s, "wall-clock budget in seconds");
    solve_cmd->add_option("--restarts", solve_args.restarts, "restart cap (0 = unlimited)");
    solve_cmd->add_option("--seed", solve_args.seed, "RNG seed");
    solve_cmd->add_option("--eta", solve_args.eta, "MWU learning rate (0, 1/2]");
    solve_cmd->add_option("--T", solve_args.T, "MWU horizon");
    solve_cmd->add_option("--theta-rule", solve_args.theta_rule, "figure | text");
    solve_cmd->add_option("--export-sdp", solve_args.export_sdp_variant,
                          "write an SDPA file instead of solving: sdprel | sdprel-trace | yajima");
    solve_cmd->add_option("--out,-o", solve_args.out, "report (or SDPA) output path");

    MeasureArgs measure_args;
    auto* measure_cmd = app.add_subcommand("measure", "error measures of a solution file");
    measure_cmd->add_option("--in,-i", measure_args.in, "instance file")->required();
    measure_cmd->add_option("--x", measure_args.x_path, "solution realization file")->required();
    measure_cmd->add_option("--y", measure_args.y_path,
                            "trusted realization (default: instance reference)");
    measure_cmd->add_flag("!--no-demi", measure_args.want_demi, "skip the DEMI measures");
    measure_cmd->add_flag("!--no-reflection", measure_args.allow_reflection,
                          "restrict alignments to proper rotations");
    measure_cmd->add_option("--out,-o", measure_args.out, "write the measures JSON here too");

    SdpExtractArgs extract_args;
    auto* extract_cmd =
        app.add_subcommand("sdp-extract", "rank-K realization from an SDP primal matrix");
    extract_cmd->add_option("--in,-i", extract_args.in, "instance file")->required();
    extract_cmd->add_option("--primal", extract_args.primal, "row/col/value triples")->required();
    extract_cmd->add_option("--out,-o", extract_args.out, "realization output path");

    BenchArgs bench_args;
    auto* bench_cmd = app.add_subcommand("bench", "solver x formulation benchmark grid");
    bench_cmd->add_option("--instances", bench_args.instance_paths, "instance files")
        ->required()
        ->expected(-1);
    bench_cmd->add_option("--combos", bench_args.combos,
                          "comma-separated solver+formulation pairs");
    bench_cmd->add_option("--seeds", bench_args.seeds, "comma-separated seeds");
    bench_cmd->add_option("--time", bench_args.time_s, "per-cell budget in virtual seconds");
    bench_cmd->add_option("--restarts", bench_args.restarts, "per-cell restart cap");
    bench_cmd->add_option("--workers", bench_args.workers,
                          "concurrent cells (default: IDGP_WORKERS or 1)");
    bench_cmd->add_flag("!--no-demi", bench_args.demi, "skip DEMI in the grid");
    bench_cmd->add_option("--eta", bench_args.eta, "MWU learning rate");
    bench_cmd->add_option("--T", bench_args.T, "MWU horizon");
    bench_cmd->add_option("--out,-o", bench_args.out, "CSV output path");
    bench_cmd->add_option("--json", bench_args.json_out, "JSON report output path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen_cmd->parsed()) return run_generate(gen_args);
        if (solve_cmd->parsed()) return run_solve(solve_args);
        if (measure_cmd->parsed()) return run_measure(measure_args);
        if (extract_cmd->parsed()) return run_sdp_extract(extract_args);
        if (bench_cmd->parsed()) return run_bench_cmd(bench_args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
