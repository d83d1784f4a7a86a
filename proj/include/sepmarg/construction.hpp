#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sepmarg/configurations.hpp"
#include "sepmarg/tensor_core.hpp"

// Large states from copies of a small pure block state placed along paths of
// a target graph; target parties may host several block qubits.
namespace sepmarg {

// Covers every vertex with simple paths of exactly `length` vertices, trying
// to use few paths (randomized greedy plus local search; not certified
// minimal). Among covers of the same size, one whose paths overlap in a
// connected pattern is preferred, since otherwise the glued state factorizes.
// Deterministic for a given seed.
std::vector<std::vector<int>> path_cover(const MarginalConfiguration& graph, int length, std::uint64_t seed = 1);

// rows x cols grid, vertices numbered row-major.
MarginalConfiguration grid_graph(int rows, int cols);
// "4x4" -> grid_graph(4, 4)
MarginalConfiguration parse_grid(const std::string& text);

struct GlueAssignment {
    MarginalConfiguration target;
    MarginalConfiguration block;               // block's own marginal graph
    std::vector<std::vector<int>> placements;  // block qubit -> target party

    // Throws InvalidArgument when a placement is malformed, a block edge does
    // not land on a target edge, or a target party hosts nothing.
    void validate() const;
    std::vector<int> hosted_counts() const;
    PartyLayout layout() const;  // party dim = 2^(qubits hosted)
};

// Path-shaped block of the given size placed along each path.
GlueAssignment path_assignment(const MarginalConfiguration& target, int block_qubits,
                               const std::vector<std::vector<int>>& paths);

struct BlockRecord {
    QuantumState state;
    std::string id;
    // Detection and uniqueness outcomes for the block, when evaluated.
    std::optional<bool> detected;
    std::optional<bool> unique;
};

struct HostedQubit {
    int placement;
    int block_qubit;
};

struct CompositeState {
    QuantumState state;
    GlueAssignment assignment;
    BlockRecord block;
    // For each target party, its qubits from most to least significant.
    std::vector<std::vector<HostedQubit>> hosted;
};

inline constexpr int kMaxCompositeQubits = 22;

CompositeState glue_states(const BlockRecord& block, const GlueAssignment& assignment);

struct ConstructionReport {
    double norm_error = 0.0;  // | ||psi|| - 1 |
    bool pure = false;
    int cuts_checked = 0;
    int min_schmidt_rank = 0;
    std::vector<int> failing_cut;  // members of the first rank-1 cut
    std::string cut_method;        // "svd" or "block-product"
    bool all_cuts_entangled = false;
    double max_marginal_residual = 0.0;
    bool marginals_factorize = false;
    bool pedigree_complete = false;  // block detection and uniqueness on record and true

    bool structural_ok() const { return pure && all_cuts_entangled && marginals_factorize; }
    bool ok() const { return structural_ok() && pedigree_complete; }
};

// Above this composite dimension cut ranks are computed as products of the
// block Schmidt ranks across the induced cuts instead of by a full SVD.
inline constexpr std::int64_t kDirectSvdMaxDim = std::int64_t{1} << 14;

ConstructionReport verify_construction(const CompositeState& composite, bool force_svd = false);

nlohmann::json construction_report_to_json(const ConstructionReport& r);

}  // namespace sepmarg
