#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "sepmarg/certification.hpp"
#include "sepmarg/cli.hpp"
#include "sepmarg/construction.hpp"
#include "sepmarg/state_io.hpp"
#include "sepmarg/witness_search.hpp"

namespace sepmarg::cli {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct SolverFlags {
    std::optional<double> gap_tol;
    std::optional<int> max_iters;

    void add(CLI::App* app) {
        app->add_option("--gap-tol", gap_tol, "relative duality gap tolerance");
        app->add_option("--max-iters", max_iters, "interior-point iteration limit");
    }
    sdp::SolverOptions resolve() const {
        auto o = solver_options_from_env();
        if (gap_tol) o.gap_tol = *gap_tol;
        if (max_iters) o.max_iters = *max_iters;
        return o;
    }
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw InvalidArgument("cannot write " + path.string());
    out << text;
}

nlohmann::json search_result_json(const SearchResult& r, std::uint64_t seed, const RunManifest& manifest) {
    const auto check = verify_certificate(r.witness, r.certificate);
    nlohmann::json witness = witness_to_json(r.witness);
    witness["metadata"] = {{"value", r.value()},
                           {"certificate_valid", check.valid},
                           {"min_eigenvalue_P", check.min_eigenvalue_P},
                           {"min_eigenvalue_Q", check.min_eigenvalue_Q},
                           {"max_residual", check.max_residual}};
    return {{"manifest", manifest.to_json()},
            {"seed", seed},
            {"start_seed", r.start_seed},
            {"status", std::string(search_status_name(r.status))},
            {"value", r.value()},
            {"objective_trace", r.objective_trace},
            {"outer_iterations", r.outer_iterations},
            {"first_detection_iteration", r.first_detection_iteration},
            {"purifications", r.purifications},
            {"checks",
             {{"detected", r.detected}, {"marginals_ppt", r.marginals_ppt}, {"certificate_valid", r.certificate_valid}}},
            {"diagnostics", r.diagnostics},
            {"state", state_to_json(r.state)},
            {"witness", witness}};
}

int cmd_search(int n, const std::string& config_arg, int seeds, std::uint64_t first_seed, int jobs,
               const std::string& out_dir, int max_outer, const sdp::SolverOptions& solver) {
    const auto config = resolve_configuration(config_arg, n);
    if (const auto v = is_valid(config); !v.valid) throw InvalidArgument("configuration: " + v.reason);
    if (seeds < 1) throw InvalidArgument("--seeds must be positive");
    const auto layout = PartyLayout::qubits(n);

    RunManifest manifest;
    manifest.command = "search";
    manifest.parameters = {{"n", n}, {"config", config.to_string()}, {"max_outer", max_outer}};
    for (int s = 0; s < seeds; ++s) manifest.seeds.push_back(first_seed + static_cast<std::uint64_t>(s));
    manifest.solver = solver;

    std::vector<std::optional<SearchResult>> results(seeds);
    std::vector<std::string> errors(seeds);
    std::vector<double> times(seeds);
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int k = next++; k < seeds; k = next++) {
            SeeSawOptions o;
            o.seed = manifest.seeds[k];
            o.max_iters = max_outer;
            o.solver = solver;
            const auto t0 = Clock::now();
            try {
                results[k] = see_saw(layout, config, o);
            } catch (const std::exception& e) {
                errors[k] = e.what();
            }
            times[k] = seconds_since(t0);
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < std::max(1, std::min(jobs, seeds)); ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    std::ostringstream table;
    table << "seed        value            status          outer  first_detect  verified\n";
    int best = -1, failures = 0;
    for (int k = 0; k < seeds; ++k) {
        if (!results[k]) {
            ++failures;
            table << std::setw(4) << manifest.seeds[k] << "  error: " << errors[k] << "\n";
            continue;
        }
        const auto& r = *results[k];
        if (r.status == SearchStatus::SolverFailure) ++failures;
        table << std::setw(4) << manifest.seeds[k] << "  " << std::setw(15) << std::scientific << std::setprecision(6)
              << r.value() << "  " << std::setw(14) << std::left << search_status_name(r.status) << std::right
              << "  " << std::setw(5) << r.outer_iterations << "  " << std::setw(12) << r.first_detection_iteration
              << "  " << (r.verified() ? "yes" : "no") << "\n";
        if (!r.objective_trace.empty() && (best < 0 || r.value() < results[best]->value())) best = k;
    }
    if (best >= 0)
        table << "best: seed " << manifest.seeds[best] << " value " << std::scientific << std::setprecision(6)
              << results[best]->value() << (results[best]->verified() ? " (verified)" : " (not verified)") << "\n";
    std::cout << table.str();

    if (!out_dir.empty()) {
        const fs::path dir(out_dir);
        fs::create_directories(dir);
        nlohmann::json summary = {{"manifest", manifest.to_json()}, {"runs", nlohmann::json::array()}};
        nlohmann::json timing = nlohmann::json::object();
        for (int k = 0; k < seeds; ++k) {
            std::ostringstream name;
            name << "seed_" << std::setw(4) << std::setfill('0') << manifest.seeds[k] << ".json";
            timing[name.str()] = times[k];
            if (!results[k]) {
                summary["runs"].push_back({{"seed", manifest.seeds[k]}, {"error", errors[k]}});
                continue;
            }
            const auto& r = *results[k];
            write_json_file(search_result_json(r, manifest.seeds[k], manifest), dir / name.str());
            summary["runs"].push_back({{"seed", manifest.seeds[k]},
                                       {"value", r.value()},
                                       {"status", std::string(search_status_name(r.status))},
                                       {"outer_iterations", r.outer_iterations},
                                       {"first_detection_iteration", r.first_detection_iteration},
                                       {"verified", r.verified()},
                                       {"file", name.str()}});
        }
        if (best >= 0) summary["best_seed"] = manifest.seeds[best];
        write_json_file(summary, dir / "summary.json");
        write_text(dir / "summary.txt", table.str());
        write_json_file(timing, dir / "timing.json");
    }
    if (failures == seeds) return kSolverFailure;
    if (best < 0 || !results[best]->verified()) {
        std::cout << "no verified negative witness value found\n";
        return kVerificationFailure;
    }
    return kSuccess;
}

void print_report(const CertificationReport& rep) {
    std::cout << std::scientific << std::setprecision(6);
    std::cout << "marginals:\n";
    for (const auto& p : rep.marginals.pairs)
        std::cout << "  pair " << p.a << "-" << p.b << "  min_pt_eigenvalue " << p.min_eigenvalue << "  "
                  << (p.ppt ? "ppt" : "NOT-ppt") << (p.ppt_implies_separable ? "" : " (ppt not decisive)") << "\n";
    std::cout << "all_marginals_separable: " << (rep.marginals.all_separable ? "yes" : "no") << "\n"
              << "witness_value: " << rep.witness_value << "\n"
              << "certificate_valid: " << (rep.certificate.valid ? "yes" : "no") << "\n"
              << "certificate_min_eigenvalue_P: " << rep.certificate.min_eigenvalue_P << "\n"
              << "certificate_min_eigenvalue_Q: " << rep.certificate.min_eigenvalue_Q << "\n"
              << "certificate_max_residual: " << rep.certificate.max_residual << "\n";
    if (rep.uniqueness_checked)
        std::cout << "uniqueness: " << (rep.uniqueness.unique ? "yes" : "no") << "  gap " << rep.uniqueness.gap
                  << "  overlap " << std::fixed << std::setprecision(6) << rep.uniqueness.overlap << std::scientific
                  << "\n";
    if (rep.robustness_checked)
        std::cout << "p_max: " << std::fixed << std::setprecision(4) << 100.0 * rep.robustness.p_max << " %\n";
    std::cout << "certified: " << (rep.certified() ? "yes" : "no") << "\n";
}

int cmd_verify(const std::string& state_arg, const std::string& config_arg, bool robustness, const std::string& out,
               const sdp::SolverOptions& solver) {
    const auto path = resolve_state_path(state_arg);
    const auto state = load_state(path);
    const auto config = resolve_configuration(config_arg, state.layout().n_parties());
    CertifyOptions opts;
    opts.robustness = robustness;
    opts.solver = solver;
    const auto rep = certify(state, config, opts);
    print_report(rep);
    if (!out.empty()) {
        RunManifest m;
        m.command = "verify";
        m.parameters = {{"state", path.string()}, {"config", config.to_string()}, {"robustness", robustness}};
        m.solver = solver;
        m.input_hashes[path.string()] = sha256_file(path);
        auto j = report_to_json(rep);
        j["manifest"] = m.to_json();
        write_json_file(j, out);
    }
    return rep.certified() ? kSuccess : kVerificationFailure;
}

int cmd_robustness(const std::string& state_arg, const std::string& config_arg, int steps,
                   const sdp::SolverOptions& solver) {
    const auto path = resolve_state_path(state_arg);
    const auto state = load_state(path);
    const auto config = resolve_configuration(config_arg, state.layout().n_parties());
    const auto r = noise_robustness(state, config, 1e-9, steps, solver);
    std::cout << std::scientific << std::setprecision(6) << "value_at_p0: " << r.value_at_zero << "\n"
              << "probes: " << r.probes << "\n"
              << "p_max: " << std::fixed << std::setprecision(4) << 100.0 * r.p_max << " %\n";
    if (!r.warning.empty()) std::cout << "warning: " << r.warning << "\n";
    return r.p_max > 0.0 ? kSuccess : kVerificationFailure;
}

int cmd_trees(int n) {
    const auto trees = enumerate_trees(n);
    std::cout << trees.size() << " trees on " << n << " vertices\n";
    for (std::size_t k = 0; k < trees.size(); ++k)
        std::cout << std::setw(3) << k << "  " << trees[k].config().to_string() << "  " << trees[k].id << "\n";
    return kSuccess;
}

int cmd_construct(const std::string& block_arg, const std::string& grid, int path_n, const std::string& target_file,
                  const std::string& out, const std::string& report_out, std::uint64_t seed, bool check_block,
                  const sdp::SolverOptions& solver) {
    MarginalConfiguration target;
    int sources = !grid.empty() + (path_n > 0) + !target_file.empty();
    if (sources != 1) throw InvalidArgument("give exactly one of --grid, --path, --target");
    if (!grid.empty()) target = parse_grid(grid);
    if (path_n > 0) {
        std::vector<Edge> e;
        for (int v = 0; v + 1 < path_n; ++v) e.emplace_back(v, v + 1);
        target = MarginalConfiguration(path_n, e);
    }
    if (!target_file.empty()) target = load_configuration(target_file);

    const auto path = resolve_state_path(block_arg);
    BlockRecord block{load_state(path), block_arg, std::nullopt, std::nullopt};
    const int L = block.state.layout().n_parties();
    if (check_block) {
        std::vector<Edge> chain;
        for (int q = 0; q + 1 < L; ++q) chain.emplace_back(q, q + 1);
        CertifyOptions co;
        co.solver = solver;
        const auto rep = certify(block.state, MarginalConfiguration(L, chain), co);
        block.detected = rep.certified();
        block.unique = rep.uniqueness.unique;
    }
    const auto paths = path_cover(target, L, seed);
    const auto composite = glue_states(block, path_assignment(target, L, paths));
    const auto rep = verify_construction(composite);

    std::cout << "target parties: " << target.n_parties() << ", copies: " << paths.size() << "\n";
    for (const auto& p : paths) {
        std::cout << "  placement:";
        for (int v : p) std::cout << " " << v;
        std::cout << "\n";
    }
    std::cout << "party dims:";
    for (int d : composite.state.layout().dims()) std::cout << " " << d;
    std::cout << "\n" << construction_report_to_json(rep).dump(2) << "\n";

    RunManifest m;
    m.command = "construct";
    m.parameters = {{"block", block_arg}, {"target", configuration_to_json(target)}, {"seed", seed}};
    m.seeds = {seed};
    m.solver = solver;
    m.input_hashes[path.string()] = sha256_file(path);
    if (!report_out.empty()) {
        auto j = construction_report_to_json(rep);
        j["placements"] = paths;
        j["manifest"] = m.to_json();
        if (!check_block) j["pedigree_note"] = "block certification not evaluated (use --check-block)";
        write_json_file(j, report_out);
    }
    if (!out.empty()) {
        auto j = state_to_json(composite.state);
        j["manifest"] = m.to_json();
        j["placements"] = paths;
        write_json_file(j, out);
    }
    return rep.structural_ok() && (!check_block || rep.pedigree_complete) ? kSuccess : kVerificationFailure;
}

int cmd_sdp(const std::string& file, const sdp::SolverOptions& solver) {
    std::ifstream in(file);
    if (!in) throw InvalidArgument("cannot read " + file);
    const auto problem = sdp::read_sdpa(in);
    const auto sol = sdp::solve(problem, solver);
    const auto check = sdp::verify_solution(problem, sol);
    std::cout << std::scientific << std::setprecision(10) << "status: " << sdp::status_name(sol.status) << "\n"
              << "method: " << sol.method << "\n"
              << "iterations: " << sol.iterations << "\n"
              << "primal_objective: " << sol.primal_objective << "\n"
              << "dual_objective: " << sol.dual_objective << "\n"
              << "verified: " << (check.ok() ? "yes" : "no") << "\n";
    for (const auto& v : check.violations) std::cout << "  " << v << "\n";
    if (sol.status != sdp::SolveStatus::Optimal) return kSolverFailure;
    return check.ok() ? kSuccess : kVerificationFailure;
}

}  // namespace

int run(int argc, char** argv) {
    CLI::App app{"Search, certify and construct entangled states with separable two-body marginals"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);
    SolverFlags flags;

    int n = 0, seeds = 1, jobs = 1, max_outer = 20, steps = 40, path_n = 0;
    std::uint64_t seed = 1;
    std::string config, out, state, grid, target, report, block, file;
    bool robustness = false, check_block = false;

    auto* search = app.add_subcommand("search", "see-saw search for a detectable state");
    search->add_option("--n", n, "number of qubits")->required()->check(CLI::Range(2, 8));
    search->add_option("--config", config, "edge list (0-1,1-2), label (4b) or JSON file")->required();
    search->add_option("--seeds", seeds, "number of random starts");
    search->add_option("--seed", seed, "first seed");
    search->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
    search->add_option("--max-outer", max_outer, "outer see-saw iterations")->check(CLI::PositiveNumber);
    search->add_option("--out", out, "result directory");
    flags.add(search);

    auto* verify = app.add_subcommand("verify", "certify a state file against a configuration");
    verify->add_option("state", state, "state file or fixture id")->required();
    verify->add_option("--config", config)->required();
    verify->add_flag("--robustness", robustness, "also compute the white-noise tolerance");
    verify->add_option("--out", out, "JSON report");
    flags.add(verify);

    auto* robust = app.add_subcommand("robustness", "white-noise tolerance of a state");
    robust->add_option("state", state)->required();
    robust->add_option("--config", config)->required();
    robust->add_option("--steps", steps, "bisection steps")->check(CLI::PositiveNumber);
    flags.add(robust);

    auto* trees = app.add_subcommand("trees", "list unlabeled trees");
    trees->add_option("--n", n)->required()->check(CLI::Range(1, 12));

    auto* construct = app.add_subcommand("construct", "glue block copies over a target graph");
    construct->add_option("--block", block, "block state file or fixture id")->required();
    construct->add_option("--grid", grid, "grid target, e.g. 4x4");
    construct->add_option("--path", path_n, "path target with this many parties");
    construct->add_option("--target", target, "target graph JSON file");
    construct->add_option("--seed", seed, "path cover seed");
    construct->add_option("--out", out, "composite state file");
    construct->add_option("--report", report, "verification report file");
    construct->add_flag("--check-block", check_block, "certify the block state first");
    flags.add(construct);

    auto* sdp_cmd = app.add_subcommand("sdp", "solve an SDPA sparse file");
    sdp_cmd->add_option("file", file)->required();
    flags.add(sdp_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kSuccess : kUsage;
    }

    const auto t0 = Clock::now();
    int code = kSuccess;
    try {
        const auto solver = flags.resolve();
        if (*search) code = cmd_search(n, config, seeds, seed, jobs, out, max_outer, solver);
        else if (*verify) code = cmd_verify(state, config, robustness, out, solver);
        else if (*robust) code = cmd_robustness(state, config, steps, solver);
        else if (*trees) code = cmd_trees(n);
        else if (*construct) code = cmd_construct(block, grid, path_n, target, out, report, seed, check_block, solver);
        else if (*sdp_cmd) code = cmd_sdp(file, solver);
    } catch (const SolverFailure& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return kSolverFailure;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const Unsupported& e) {
        std::cerr << "unsupported: " << e.what() << "\n";
        return kUsage;
    } catch (const ResourceLimit& e) {
        std::cerr << "resource limit: " << e.what() << "\n";
        return kUsage;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
    std::cerr << "wall-clock: " << std::fixed << std::setprecision(2) << seconds_since(t0) << " s\n";
    return code;
}

}  // namespace sepmarg::cli
