#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "sepmarg/configurations.hpp"
#include "sepmarg/sdp.hpp"
#include "sepmarg/tensor_core.hpp"
#include "sepmarg/witness_search.hpp"

namespace sepmarg {

struct PairMargin {
    int a = 0;
    int b = 0;
    double min_eigenvalue = 0.0;  // of the marginal partially transposed on a
    bool ppt = false;
    // PPT is equivalent to separability when the pair is 2x2 or 2x3.
    bool ppt_implies_separable = false;
};

struct MarginalReport {
    std::vector<PairMargin> pairs;  // all N(N-1)/2 unordered pairs
    bool all_ppt = false;
    bool all_separable = false;  // all PPT and PPT is decisive for every pair
};

MarginalReport check_all_marginals_separable(const QuantumState& state, double tol = 1e-9);

// Optimal fully decomposable witness value; negative certifies genuine
// multiparticle entanglement from the configuration's marginals alone.
double detection_value(const QuantumState& state, const MarginalConfiguration& config,
                       const sdp::SolverOptions& opts = {});

struct RobustnessResult {
    double p_max = 0.0;
    double value_at_zero = 0.0;
    int probes = 0;
    std::string warning;
};

// Largest p in [0, 1] such that (1 - p) rho + p 1/2^N is still detected
// (optimal witness value < -tol), by bisection.
RobustnessResult noise_robustness(const QuantumState& state, const MarginalConfiguration& config, double tol = 1e-9,
                                  int bisection_steps = 40, const sdp::SolverOptions& opts = {});

struct UniquenessResult {
    bool unique = false;
    double ground_energy = 0.0;
    double gap = 0.0;      // lambda_2 - lambda_1 of the expanded witness
    double overlap = 0.0;  // |<psi|ground>|^2
};

inline constexpr double kUniquenessGap = 1e-6;
inline constexpr double kUniquenessOverlap = 0.999;

UniquenessResult uniqueness_check(const QuantumState& state, const Witness& witness);

// Product of qubit unitaries
//   U(a, t, f) = [[ e^{ia} cos f,  e^{it} sin f],
//                 [-e^{-it} sin f, e^{-ia} cos f]]
// acting as rho -> U^dagger rho U.
struct LocalUnitary {
    std::vector<std::array<double, 3>> params;  // (alpha, theta, phi) per qubit

    static LocalUnitary identity(int n_qubits);
    static Eigen::Matrix2cd factor(double alpha, double theta, double phi);
    CMatrix matrix() const;
};

QuantumState apply_local_unitary(const QuantumState& state, const LocalUnitary& lu);

struct SimplifyOptions {
    int restarts = 20;
    double zero_threshold = 1e-6;
    std::uint64_t seed = 1;
    int max_evaluations = 4000;  // per restart
};

struct SimplifyResult {
    QuantumState state;
    LocalUnitary lu;
    int zero_count = 0;
    int initial_zero_count = 0;
};

int count_zero_amplitudes(const QuantumState& state, double threshold = 1e-6);

// Searches qubit-local unitaries that push amplitudes to zero (derivative-free,
// best effort). The returned state equals apply_local_unitary(input, lu).
SimplifyResult simplify_zero_pattern(const QuantumState& state, const SimplifyOptions& opts = {});

struct CertificationReport {
    MarginalReport marginals;
    double witness_value = 0.0;
    CertificateCheck certificate;
    bool uniqueness_checked = false;
    UniquenessResult uniqueness;
    bool robustness_checked = false;
    RobustnessResult robustness;

    // Marginals separable, witness negative and certified.
    bool certified() const { return marginals.all_separable && witness_value < 0.0 && certificate.valid; }
};

struct CertifyOptions {
    bool robustness = false;
    sdp::SolverOptions solver;
};

// Recomputes everything from (state, config).
CertificationReport certify(const QuantumState& state, const MarginalConfiguration& config,
                            const CertifyOptions& opts = {});

nlohmann::json report_to_json(const CertificationReport& report);

}  // namespace sepmarg
