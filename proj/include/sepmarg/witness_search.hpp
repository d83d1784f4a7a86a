#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "sepmarg/configurations.hpp"
#include "sepmarg/sdp.hpp"
#include "sepmarg/tensor_core.hpp"

namespace sepmarg {

// Observable built only from operators on the edges of a configuration:
//   W = identity_coeff * 1 + sum over (edge, (i, j)) of coeff * sigma_i ⊗ sigma_j.
// Tr W = 1 fixes identity_coeff = 2^-N.
struct Witness {
    using Key = std::pair<Edge, std::pair<int, int>>;

    PartyLayout layout;
    MarginalConfiguration config;
    double identity_coeff = 0.0;
    std::map<Key, double> coeffs;  // (i, j) != (0, 0)

    double coeff(Edge e, int i, int j) const;
    // Coefficient of each Pauli string, with terms from different edges that
    // give the same string (shared single-body directions) summed.
    std::map<std::vector<int>, double> pauli_coefficients() const;
};

CMatrix expand_witness(const Witness& w);

// <W> = Tr(W rho), evaluated from Pauli expectations.
double witness_expectation(const Witness& w, const QuantumState& state);

// W = P_M + Q_M^{T_M} with P_M, Q_M >= 0, one pair per canonical bipartition.
struct DecompositionCertificate {
    std::vector<Bipartition> cuts;
    std::vector<CMatrix> P;
    std::vector<CMatrix> Q;
};

struct CertificateCheck {
    double min_eigenvalue_P = 0.0;
    double min_eigenvalue_Q = 0.0;
    double max_residual = 0.0;  // max_M ||W - P_M - Q_M^{T_M}||_2
    bool complete = false;      // one pair for every canonical bipartition
    bool valid = false;
};

CertificateCheck verify_certificate(const Witness& w, const DecompositionCertificate& cert, double psd_tol = 1e-8,
                                    double residual_tol = 1e-7);

struct WitnessResult {
    Witness witness;
    DecompositionCertificate certificate;
    double value = 0.0;  // Tr(W rho)
    sdp::SdpSolution solution;
};

// Minimizes Tr(W rho) over fully decomposable witnesses supported on the
// configuration's edges with Tr W = 1.
WitnessResult optimal_witness(const QuantumState& state, const MarginalConfiguration& config,
                              const sdp::SolverOptions& opts = {});

// Builds the witness SDP without solving it (for export and inspection).
sdp::SdpProblem witness_problem(const QuantumState& state, const MarginalConfiguration& config);

struct StateResult {
    QuantumState state;
    double value = 0.0;
    sdp::SdpSolution solution;
};

// Minimizes Tr(W rho) over states whose two-body marginals are all PPT.
StateResult optimal_state(const Witness& w, const sdp::SolverOptions& opts = {});

sdp::SdpProblem state_problem(const Witness& w);

struct SeeSawOptions {
    std::uint64_t seed = 1;
    int max_iters = 20;
    double conv_tol = 1e-8;
    double purify_tol = 1e-6;
    sdp::SolverOptions solver;
    // Starting state; a seeded random pure state when absent.
    std::optional<QuantumState> initial_state;
};

enum class SearchStatus { Converged, MaxIterations, SolverFailure };
std::string_view search_status_name(SearchStatus s);

struct SearchResult {
    QuantumState state;
    Witness witness;
    DecompositionCertificate certificate;
    // Tr(W rho) after every half step: witness update, then state update.
    std::vector<double> objective_trace;
    SearchStatus status = SearchStatus::MaxIterations;
    int outer_iterations = 0;
    // First outer iteration whose value is negative, or -1.
    int first_detection_iteration = -1;
    std::uint64_t start_seed = 0;  // seed of the accepted starting state
    int purifications = 0;
    // Post-run checks: negative value, all marginals PPT, certificate valid.
    bool detected = false;
    bool marginals_ppt = false;
    bool certificate_valid = false;
    std::vector<std::string> diagnostics;

    double value() const { return objective_trace.empty() ? 0.0 : objective_trace.back(); }
    bool verified() const { return detected && marginals_ppt && certificate_valid; }
};

// True when some two-body marginal is within tol of being invariant under
// swapping its two parties. Such starts tend to stall the alternation.
bool has_symmetric_marginal(const QuantumState& state, double tol = 1e-6);

SearchResult see_saw(const PartyLayout& layout, const MarginalConfiguration& config, const SeeSawOptions& opts = {});

nlohmann::json witness_to_json(const Witness& w);
Witness witness_from_json(const nlohmann::json& j);

}  // namespace sepmarg
