#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "sepmarg/configurations.hpp"
#include "sepmarg/sdp.hpp"

namespace sepmarg::cli {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int { kSuccess = 0, kUsage = 2, kSolverFailure = 3, kVerificationFailure = 4 };

// Everything needed to rerun a command. Wall-clock time is reported on the
// console and in a separate timing file so result files stay reproducible.
struct RunManifest {
    std::string command;
    nlohmann::json parameters = nlohmann::json::object();
    std::vector<std::uint64_t> seeds;
    sdp::SolverOptions solver;
    std::map<std::string, std::string> input_hashes;  // path -> sha256 hex
    std::string tool_version = kToolVersion;

    nlohmann::json to_json() const;
};

std::string sha256_file(const std::filesystem::path& path);

// Solver defaults from SEPMARG_SOLVER_OPTIONS, e.g. "gap_tol=1e-9,max_iters=150".
sdp::SolverOptions solver_options_from_env();
void apply_solver_setting(sdp::SolverOptions& opts, const std::string& key, const std::string& value);

std::filesystem::path fixture_dir();
// "4b" -> fixtures/psi4b.state.json; other arguments are taken as paths.
std::filesystem::path resolve_state_path(const std::string& arg);

// Accepts a label from the tree-label mapping file ("4b"), a configuration
// JSON file, or an inline edge list ("0-1,1-2").
MarginalConfiguration resolve_configuration(const std::string& arg, int n_parties = -1);
nlohmann::json load_label_mapping();

int run(int argc, char** argv);

}  // namespace sepmarg::cli
