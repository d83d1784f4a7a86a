#pragma once

#include <vector>

#include "sepmarg/sdp.hpp"

// Solver-side view of an SdpProblem: constraint matrices grouped per variable
// and per block, optionally scaled to unit Frobenius norm.
namespace sepmarg::sdp::detail {

struct LocalEntry {
    int row;
    int col;
    double value;
};

struct VarBlock {
    int block;
    std::vector<LocalEntry> entries;
    int nnz_full;  // nonzeros of the full symmetric block
};

struct Compiled {
    int m = 0;
    std::vector<int> block_sizes;
    RVector c;
    std::vector<std::vector<VarBlock>> var_blocks;
    // block -> (variable, position in var_blocks[variable])
    std::vector<std::vector<std::pair<int, int>>> block_vars;
    BlockMatrix F0;
    RVector scale;  // compiled F_i = original F_i / scale_i

    double trace(int var, const BlockMatrix& x) const;
    void accumulate(int var, double coef, BlockMatrix& x) const;
    BlockMatrix zeros() const;
    BlockMatrix identity(double diag) const;
};

void record_statistics(const SdpSolution& sol);

// Requires every F_i (i >= 1) to be nonzero.
Compiled compile(const SdpProblem& problem, bool scale);

// Block-arrow factorization of the Schur complement. Variables whose block
// supports are pairwise disjoint become independent dense diagonal blocks;
// the remaining variables form the dense border.
class SchurSystem {
  public:
    explicit SchurSystem(const Compiled& cp);

    void clear();
    void add(int i, int j, double v);  // symmetric: also sets (j, i)
    bool factor(double regularization);
    RVector solve(const RVector& rhs) const;
    // Unregularized product M v.
    RVector multiply(const RVector& v) const;
    // solve() followed by iterative refinement against multiply().
    RVector solve_refined(const RVector& rhs, int steps = 2) const;
    double max_diagonal() const;
    int num_groups() const { return static_cast<int>(groups_.size()); }
    int border_size() const { return static_cast<int>(global_.size()); }

  private:
    std::vector<std::vector<int>> groups_;
    std::vector<int> global_;
    std::vector<int> slot_group_;
    std::vector<int> slot_index_;
    std::vector<RMatrix> D_;
    std::vector<RMatrix> B_;
    RMatrix C_;
    std::vector<Eigen::LLT<RMatrix>> d_llt_;
    std::vector<RMatrix> y_;
    Eigen::LLT<RMatrix> c_llt_;
};

}  // namespace sepmarg::sdp::detail
