#include <openssl/evp.h>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "sepmarg/cli.hpp"
#include "sepmarg/state_io.hpp"

namespace sepmarg::cli {

nlohmann::json RunManifest::to_json() const {
    return {{"command", command},
            {"parameters", parameters},
            {"seeds", seeds},
            {"solver",
             {{"gap_tol", solver.gap_tol},
              {"feas_tol", solver.feas_tol},
              {"max_iters", solver.max_iters},
              {"schur_regularization", solver.schur_regularization},
              {"first_order_threshold", solver.first_order_threshold},
              {"first_order_gap_tol", solver.first_order_gap_tol}}},
            {"input_sha256", input_hashes},
            {"tool_version", tool_version}};
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidArgument("cannot read " + path.string());
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    char buf[1 << 15];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, digest, &len);
    EVP_MD_CTX_free(ctx);
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return hex.str();
}

void apply_solver_setting(sdp::SolverOptions& o, const std::string& key, const std::string& value) {
    try {
        if (key == "gap_tol") o.gap_tol = std::stod(value);
        else if (key == "feas_tol") o.feas_tol = std::stod(value);
        else if (key == "max_iters") o.max_iters = std::stoi(value);
        else if (key == "schur_regularization") o.schur_regularization = std::stod(value);
        else if (key == "first_order_threshold") o.first_order_threshold = std::stoi(value);
        else if (key == "first_order_gap_tol") o.first_order_gap_tol = std::stod(value);
        else if (key == "first_order_max_iters") o.first_order_max_iters = std::stoi(value);
        else if (key == "verbose") o.verbose = value == "1" || value == "true";
        else throw InvalidArgument("unknown solver option '" + key + "'");
    } catch (const std::logic_error& e) {
        if (dynamic_cast<const InvalidArgument*>(&e)) throw;
        throw InvalidArgument("bad value '" + value + "' for solver option '" + key + "'");
    }
}

sdp::SolverOptions solver_options_from_env() {
    sdp::SolverOptions o;
    const char* env = std::getenv("SEPMARG_SOLVER_OPTIONS");
    if (!env) return o;
    std::stringstream ss(env);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw InvalidArgument("SEPMARG_SOLVER_OPTIONS: expected key=value, got '" + item + "'");
        apply_solver_setting(o, item.substr(0, eq), item.substr(eq + 1));
    }
    return o;
}

std::filesystem::path fixture_dir() {
    if (const char* env = std::getenv("SEPMARG_FIXTURES")) return env;
    return SEPMARG_FIXTURE_DIR;
}

std::filesystem::path resolve_state_path(const std::string& arg) {
    if (std::filesystem::exists(arg)) return arg;
    const auto candidate = fixture_dir() / ("psi" + arg + ".state.json");
    if (std::filesystem::exists(candidate)) return candidate;
    throw InvalidArgument("no state file or fixture named '" + arg + "'");
}

nlohmann::json load_label_mapping() { return read_json_file(fixture_dir() / "table1_labels.json"); }

MarginalConfiguration resolve_configuration(const std::string& arg, int n_parties) {
    MarginalConfiguration config;
    if (arg.find('-') == std::string::npos && arg.find(".json") == std::string::npos) {
        const auto mapping = load_label_mapping();
        const auto& labels = mapping.at("labels");
        if (!labels.contains(arg)) throw InvalidArgument("unknown configuration label '" + arg + "'");
        const auto& entry = labels.at(arg);
        if (!entry.contains("edges")) throw InvalidArgument("configuration label '" + arg + "' has no tree assigned");
        config = configuration_from_json(entry);
    } else if (arg.size() > 5 && arg.ends_with(".json")) {
        config = load_configuration(arg);
    } else {
        config = parse_configuration(arg, n_parties);
    }
    if (n_parties >= 0 && config.n_parties() != n_parties)
        throw InvalidArgument("configuration has " + std::to_string(config.n_parties()) + " parties, expected " +
                              std::to_string(n_parties));
    return config;
}

}  // namespace sepmarg::cli
