// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance                 criteria A1-A8, A9 reported as skipped
//   acceptance --only A3       a single criterion
//   acceptance --extended      also run A9 (hours)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "sepmarg/certification.hpp"
#include "sepmarg/construction.hpp"
#include "sepmarg/state_io.hpp"
#include "sepmarg/witness_search.hpp"

using namespace sepmarg;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

void info(const std::string& id, const std::string& text) { std::printf("  [%s] %s\n", id.c_str(), text.c_str()); }

QuantumState fixture(const std::string& name) {
    return load_state(std::filesystem::path(SEPMARG_FIXTURE_DIR) / name);
}

nlohmann::json labels() {
    return read_json_file(std::filesystem::path(SEPMARG_FIXTURE_DIR) / "table1_labels.json").at("labels");
}

MarginalConfiguration label_config(const std::string& label) { return configuration_from_json(labels().at(label)); }

double min_pair_eigenvalue(const QuantumState& s) {
    double m = 1.0;
    for (const auto& p : check_all_marginals_separable(s).pairs) m = std::min(m, p.min_eigenvalue);
    return m;
}

// The fixture refined by a short see-saw: same configuration, marginals PPT by construction.
const SearchResult& polished_4b() {
    static const SearchResult r = [] {
        SeeSawOptions o;
        o.max_iters = 2;
        o.initial_state = fixture("psi4b.state.json");
        return see_saw(PartyLayout::qubits(4), label_config("4b"), o);
    }();
    return r;
}

Outcome a1() {
    const auto s = fixture("psi4b.state.json");
    const auto rep = check_all_marginals_separable(s, 1e-9);
    std::string eigs;
    for (const auto& p : rep.pairs)
        eigs += " " + std::to_string(p.a) + "-" + std::to_string(p.b) + ":" + fmt("%.3e", p.min_eigenvalue);
    const auto& pol = polished_4b();
    info("A1", "polished fixture (2 see-saw steps): min pair PT eigenvalue " + fmt("%.2e", min_pair_eigenvalue(pol.state)) +
                   ", value " + fmt("%.5e", pol.value()));
    const int passing = static_cast<int>(std::count_if(rep.pairs.begin(), rep.pairs.end(), [](auto& p) { return p.ppt; }));
    return {rep.all_ppt, std::to_string(passing) + "/6 pairs PPT at 1e-9; min PT eigenvalues" + eigs};
}

// All labelings of a 4-vertex tree class, keeping the best value.
Outcome a2() {
    const auto s = fixture("psi4b.state.json");
    std::map<std::string, double> best;
    std::map<std::string, std::vector<Edge>> best_edges;
    std::vector<int> perm{0, 1, 2, 3};
    std::set<std::vector<Edge>> seen;
    for (const auto& tree : enumerate_trees(4)) {
        std::sort(perm.begin(), perm.end());
        do {
            std::vector<Edge> e;
            for (auto [a, b] : tree.edges) e.emplace_back(std::min(perm[a], perm[b]), std::max(perm[a], perm[b]));
            std::sort(e.begin(), e.end());
            if (!seen.insert(e).second) continue;
            const double v = detection_value(s, MarginalConfiguration(4, e));
            if (!best.count(tree.id) || v < best[tree.id]) {
                best[tree.id] = v;
                best_edges[tree.id] = e;
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
    }
    int within = 0;
    std::string matched, detail;
    for (const auto& [id, v] : best) {
        const bool ok = std::abs(v + 3.56e-3) <= 0.5e-3;
        within += ok;
        if (ok) matched = id;
        detail += " " + id + "=" + fmt("%.4e", v);
    }
    const auto mapped = labels().at("4b").at("tree_id").get<std::string>();
    info("A2", std::to_string(seen.size()) + " labeled trees evaluated; best per class:" + detail);
    const bool pass = within == 1 && matched == mapped &&
                      MarginalConfiguration(4, best_edges[matched]) == label_config("4b");
    return {pass, "classes within 0.5e-3 of -3.56e-3: " + std::to_string(within) + "; matched " + matched +
                      ", mapping file 4b = " + mapped};
}

double median(std::vector<int> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Outcome a3() {
    const auto cfg = label_config("4b");
    double best = 1.0;
    std::vector<int> detect, outer;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        SeeSawOptions o;
        o.seed = seed;
        const auto r = see_saw(PartyLayout::qubits(4), cfg, o);
        info("A3", "seed " + std::to_string(seed) + ": value " + fmt("%.5e", r.value()) + ", status " +
                       std::string(search_status_name(r.status)) + ", outer " + std::to_string(r.outer_iterations) +
                       ", first detection " + std::to_string(r.first_detection_iteration) +
                       (r.verified() ? ", verified" : ", NOT verified"));
        if (r.verified()) best = std::min(best, r.value());
        // Undetected runs count as exhausting the iteration budget.
        detect.push_back(r.first_detection_iteration > 0 ? r.first_detection_iteration : o.max_iters);
        outer.push_back(r.outer_iterations);
    }
    const double med = median(detect);
    info("A3", "median outer iterations to 1e-8 convergence: " + fmt("%.1f", median(outer)));
    return {best <= -3.0e-3 && med <= 5,
            "best verified value " + fmt("%.5e", best) + " (need <= -3.0e-3); median iterations to first verified "
            "detection " + fmt("%.1f", med) + " (need <= 5)"};
}

Outcome a4() {
    const auto s = fixture("psi4b.state.json");
    const auto r = noise_robustness(s, label_config("4b"));
    const double v0 = r.value_at_zero;
    info("A4", "affine law -v0/(2^-N - v0) = " + fmt("%.4f%%", 100 * -v0 / (1.0 / 16 - v0)) +
                   "; |v0|/(1+|v0|) = " + fmt("%.4f%%", 100 * -v0 / (1 - v0)));
    return {std::abs(r.p_max - 0.0035) <= 0.0010,
            "p_max = " + fmt("%.4f%%", 100 * r.p_max) + " (need 0.35% +- 0.10%), " + std::to_string(r.probes) + " probes"};
}

Outcome a5() {
    const auto s = fixture("psi4b.state.json");
    const auto w = optimal_witness(s, label_config("4b"));
    const auto u = uniqueness_check(s, w.witness);
    const auto& pol = polished_4b();
    const auto up = uniqueness_check(pol.state, pol.witness);
    info("A5", "polished fixture: gap " + fmt("%.3e", up.gap) + ", overlap " + fmt("%.5f", up.overlap));
    return {u.gap >= 1e-6 && u.overlap >= 0.999,
            "gap " + fmt("%.3e", u.gap) + " (need >= 1e-6), overlap " + fmt("%.5f", u.overlap) + " (need >= 0.999)"};
}

std::vector<Edge> prufer_decode(const std::vector<int>& seq, int n) {
    std::vector<int> degree(n, 1);
    for (int v : seq) ++degree[v];
    std::vector<Edge> edges;
    for (int v : seq)
        for (int leaf = 0; leaf < n; ++leaf)
            if (degree[leaf] == 1) {
                edges.emplace_back(leaf, v);
                --degree[leaf];
                --degree[v];
                break;
            }
    int u = -1, w = -1;
    for (int i = 0; i < n; ++i)
        if (degree[i] == 1) (u < 0 ? u : w) = i;
    edges.emplace_back(u, w);
    return edges;
}

Outcome a6() {
    const std::vector<std::size_t> expected{1, 1, 1, 2, 3, 6, 11};
    std::string counts;
    bool ok = true;
    for (int n = 1; n <= 7; ++n) {
        const auto c = enumerate_trees(n).size();
        counts += (n > 1 ? "," : "") + std::to_string(c);
        ok = ok && c == expected[n - 1];
    }
    std::set<std::string> ids;
    std::vector<int> seq(5);
    for (int k = 0; k < 16807; ++k) {
        int r = k;
        for (int i = 0; i < 5; ++i, r /= 7) seq[i] = r % 7;
        ids.insert(canonical_id(7, prufer_decode(seq, 7)));
    }
    std::set<std::string> enumerated;
    for (const auto& t : enumerate_trees(7)) enumerated.insert(t.id);
    ok = ok && ids == enumerated;
    return {ok, "counts n=1..7: " + counts + "; Prüfer classes at n=7: " + std::to_string(ids.size()) +
                    (ids == enumerated ? " (same ids as enumeration)" : " (ids differ)")};
}

Outcome a7() {
    std::mt19937_64 rng(20);
    std::normal_distribution<double> g;
    std::uniform_int_distribution<int> dim(1, 16);
    double worst = 0.0;
    int solved = 0;
    for (int k = 0; k < 50; ++k) {
        const int n = dim(rng);
        RMatrix a(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) a(i, j) = g(rng);
        a = (a + a.transpose()).eval() * 0.5;
        sdp::SdpProblem p({n}, 1);
        p.c(0) = 1.0;
        for (int i = 0; i < n; ++i) {
            p.F[1].add(0, i, i, 1.0);
            for (int j = i; j < n; ++j) p.F[0].add(0, i, j, -a(i, j));
        }
        p.finalize();
        const auto sol = sdp::solve(p);
        solved += sol.status == sdp::SolveStatus::Optimal;
        const double oracle = hermitian_eigenvalues(a.cast<Complex>()).maxCoeff();
        worst = std::max(worst, std::abs(sol.primal_objective - oracle));
    }
    // Every solve made by this process so far, including any earlier criteria.
    const auto st = sdp::solve_statistics();
    return {worst <= 1e-7 && solved == 50 && st.weak_duality_violations == 0,
            std::to_string(solved) + "/50 optimal, max |error| " + fmt("%.2e", worst) + "; weak duality violations " +
                std::to_string(st.weak_duality_violations) + " over " + std::to_string(st.iterates) + " iterates of " +
                std::to_string(st.solves) + " solves"};
}

Outcome a8() {
    BlockRecord block{fixture("psi5a.state.json"), "5a", std::nullopt, std::nullopt};
    std::vector<Edge> e;
    for (int i = 0; i < 5; ++i) e.emplace_back(i, i + 1);
    const MarginalConfiguration target(6, e);
    const auto a = path_assignment(target, 5, path_cover(target, 5));
    const auto c = glue_states(block, a);
    const auto r = verify_construction(c);
    std::string dims;
    for (int d : c.state.layout().dims()) dims += (dims.empty() ? "" : ",") + std::to_string(d);
    return {r.pure && r.cuts_checked == 31 && r.all_cuts_entangled && r.max_marginal_residual < 1e-10,
            "dims (" + dims + "), pure " + (r.pure ? "yes" : "no") + ", " + std::to_string(r.cuts_checked) +
                " cuts, min Schmidt rank " + std::to_string(r.min_schmidt_rank) + ", marginal residual " +
                fmt("%.1e", r.max_marginal_residual)};
}

Outcome a9() {
    const auto cfg = label_config("5a");
    double best = 1.0;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        SeeSawOptions o;
        o.seed = seed;
        const auto r = see_saw(PartyLayout::qubits(5), cfg, o);
        info("A9", "seed " + std::to_string(seed) + ": value " + fmt("%.5e", r.value()) +
                       (r.verified() ? ", verified" : ", NOT verified"));
        if (r.verified()) best = std::min(best, r.value());
    }
    const auto rob = noise_robustness(fixture("psi5a.state.json"), cfg);
    const bool search_ok = std::abs(best + 1.13e-3) <= 0.4e-3;
    const bool rob_ok = std::abs(rob.p_max - 0.0011) <= 0.0005;
    return {search_ok && rob_ok, "best verified 5-qubit value " + fmt("%.4e", best) +
                                     " (need -1.13e-3 +- 0.4e-3); 5a p_max " + fmt("%.4f%%", 100 * rob.p_max) +
                                     " (need 0.11% +- 0.05%)"};
}

}  // namespace

int main(int argc, char** argv) {
    std::string only;
    bool extended = false;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--only" && i + 1 < argc) only = argv[++i];
        else if (a == "--extended") extended = true;
        else {
            std::fprintf(stderr, "usage: acceptance [--only A<k>] [--extended]\n");
            return 2;
        }
    }
    // A7 audits every solve in the process, so it runs after the others.
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"A1", a1}, {"A2", a2}, {"A3", a3}, {"A4", a4}, {"A5", a5}, {"A6", a6}, {"A8", a8}, {"A9", a9}, {"A7", a7}};

    std::map<std::string, std::string> lines;
    bool all = true;
    for (const auto& [id, fn] : criteria) {
        if (!only.empty() && id != only) continue;
        if (id == "A9" && !extended && only != "A9") {
            lines[id] = id + " SKIP  extended tier (run with --extended)";
            continue;
        }
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        lines[id] = id + (o.pass ? " PASS  " : " FAIL  ") + o.detail + fmt(" [%.1f s]", secs);
        std::printf("%s\n", lines[id].c_str());
        std::fflush(stdout);
        all = all && o.pass;
    }
    if (lines.empty()) {
        std::fprintf(stderr, "unknown criterion '%s'\n", only.c_str());
        return 2;
    }
    std::printf("\nsummary\n");
    for (const auto& [id, line] : lines) std::printf("%s\n", line.c_str());
    return all ? 0 : 1;
}
