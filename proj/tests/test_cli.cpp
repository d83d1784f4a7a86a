#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "sepmarg/cli.hpp"
#include "sepmarg/state_io.hpp"

using namespace sepmarg;

namespace {

int run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "sepmarg");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    return cli::run(static_cast<int>(argv.size()), argv.data());
}

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "sepmarg_cli_test";
    std::filesystem::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST_CASE("usage errors") {
    CHECK(run_cli({}) == cli::kUsage);
    CHECK(run_cli({"trees"}) == cli::kUsage);
    CHECK(run_cli({"trees", "--n", "40"}) == cli::kUsage);
    CHECK(run_cli({"verify", "4b", "--config", "0-0"}) == cli::kUsage);
    CHECK(run_cli({"verify", "/nonexistent.json", "--config", "4b"}) == cli::kUsage);
    CHECK(run_cli({"search", "--n", "4", "--config", "0-1,2-3", "--seeds", "1"}) == cli::kUsage);
}

TEST_CASE("trees") { CHECK(run_cli({"trees", "--n", "6"}) == cli::kSuccess); }

TEST_CASE("configuration resolution") {
    const auto star = cli::resolve_configuration("4b");
    CHECK(star.edges() == std::vector<Edge>{{0, 1}, {1, 2}, {1, 3}});
    CHECK(cli::resolve_configuration("0-1,1-2").n_parties() == 3);
    CHECK_THROWS(cli::resolve_configuration("5b"));
    CHECK(cli::resolve_state_path("4b").filename() == "psi4b.state.json");
}

TEST_CASE("solver options from text") {
    sdp::SolverOptions o;
    cli::apply_solver_setting(o, "gap_tol", "1e-9");
    CHECK(o.gap_tol == 1e-9);
    CHECK_THROWS(cli::apply_solver_setting(o, "bogus", "1"));
}

TEST_CASE("verify exit codes follow the certification outcome") {
    CVector ghz = CVector::Zero(8);
    ghz(0) = ghz(7) = 1.0;
    const auto g = scratch("ghz3.json");
    save_state(QuantumState::pure(PartyLayout::qubits(3), ghz), g);
    CHECK(run_cli({"verify", g.string(), "--config", "0-1,1-2"}) == cli::kVerificationFailure);

    const auto report = scratch("report.json");
    std::filesystem::remove(report);
    CHECK(run_cli({"verify", g.string(), "--config", "0-1,1-2", "--out", report.string()}) ==
          cli::kVerificationFailure);
    CHECK(std::filesystem::exists(report));
}

TEST_CASE("sdp subcommand") {
    const auto f = scratch("eig.dat-s");
    // minimize t subject to t I - diag(1, 2) >= 0
    std::ofstream(f) << "1\n1\n2\n1.0\n0 1 1 1 -1\n0 1 2 2 -2\n1 1 1 1 1\n1 1 2 2 1\n";
    CHECK(run_cli({"sdp", f.string()}) == cli::kSuccess);
    std::ofstream(f) << "garbage\n";
    CHECK(run_cli({"sdp", f.string()}) == cli::kUsage);
}

TEST_CASE("search writes reproducible results") {
    const auto dir = scratch("search");
    std::filesystem::remove_all(dir);
    // Two parties with a separable marginal are never detected.
    CHECK(run_cli({"search", "--n", "2", "--config", "0-1", "--seeds", "1", "--max-outer", "2", "--out",
                   dir.string()}) == cli::kVerificationFailure);
    CHECK(std::filesystem::exists(dir / "summary.json"));
    CHECK(std::filesystem::exists(dir / "seed_0001.json"));
    const auto first = read_json_file(dir / "seed_0001.json").dump();
    CHECK(run_cli({"search", "--n", "2", "--config", "0-1", "--seeds", "1", "--max-outer", "2", "--out",
                   dir.string()}) == cli::kVerificationFailure);
    CHECK(read_json_file(dir / "seed_0001.json").dump() == first);
}

TEST_CASE("construct") {
    const auto out = scratch("composite.json");
    const auto rep = scratch("construct_report.json");
    CHECK(run_cli({"construct", "--block", "5a", "--path", "6", "--out", out.string(), "--report", rep.string()}) ==
          cli::kSuccess);
    CHECK(load_state(out).layout().dims() == std::vector<int>{2, 4, 4, 4, 4, 2});
    CHECK(run_cli({"construct", "--block", "5a"}) == cli::kUsage);
}
