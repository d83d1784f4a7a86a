#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "sepmarg/tensor_core.hpp"

// Semidefinite programs in inequality form
//
//     minimize    c^T x
//     subject to  F(x) = F_0 + sum_i x_i F_i  >= 0      (block diagonal)
//
// with dual
//
//     maximize    -Tr(F_0 Z)
//     subject to  Tr(F_i Z) = c_i,  Z >= 0.
//
// Every x_i is a free scalar. Affine equality constraints are expected to be
// eliminated by the model builder (parametrize the affine subspace).
namespace sepmarg::sdp {

struct Entry {
    int block = 0;
    int row = 0;  // row <= col
    int col = 0;
    double value = 0.0;
};

// Symmetric block-diagonal matrix stored as its upper-triangle nonzeros.
class SymBlockSparse {
  public:
    // Adds value at (row, col) and, implicitly, at (col, row).
    void add(int block, int row, int col, double value);

    // Sorts entries by (block, row, col), merges duplicates and drops exact zeros.
    void finalize();

    const std::vector<Entry>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }
    double frobenius_norm() const;
    void scale(double factor);

  private:
    std::vector<Entry> entries_;
};

using BlockMatrix = std::vector<RMatrix>;

struct SdpProblem {
    std::vector<int> block_sizes;
    RVector c;                       // length m
    std::vector<SymBlockSparse> F;   // length m + 1, F[0] is the constant term

    SdpProblem() = default;
    SdpProblem(std::vector<int> blocks, int num_vars);

    int num_vars() const { return static_cast<int>(c.size()); }
    int total_dim() const;

    // Finalizes every F_i; call once after building.
    void finalize();
    // Throws InvalidArgument on structural inconsistencies.
    void validate() const;

    BlockMatrix evaluate(const RVector& x) const;  // F(x)
};

enum class SolveStatus { Optimal, PrimalInfeasible, DualInfeasible, MaxIterations, Stalled };

std::string_view status_name(SolveStatus s);

struct IterateRecord {
    int iteration = 0;
    double primal_objective = 0.0;
    double dual_objective = 0.0;
    double primal_infeasibility = 0.0;  // ||F(x) - S||_F / (1 + ||F_0||_F)
    double dual_infeasibility = 0.0;    // ||c - A*(Z)||_2 / (1 + ||c||_2)
    double complementarity = 0.0;       // Tr(S Z)
    double step_primal = 0.0;
    double step_dual = 0.0;
    // |x^T (c - A*(Z))| + |Tr((F(x) - S) Z)|. Since
    //   c^T x + Tr(F_0 Z) = Tr(S Z) + x^T (c - A*(Z)) + Tr((F(x) - S) Z),
    // weak duality requires primal - dual >= -infeasibility_bound.
    double infeasibility_bound = 0.0;
};

bool weak_duality_holds(const IterateRecord& r, double tol = 1e-9);

// Process-wide counters over every solve() call, for auditing.
struct SolveStatistics {
    long solves = 0;
    long iterates = 0;
    long weak_duality_violations = 0;
};
SolveStatistics solve_statistics();
void reset_solve_statistics();

struct SdpSolution {
    SolveStatus status = SolveStatus::MaxIterations;
    RVector x;
    BlockMatrix S;  // F(x)
    BlockMatrix Z;
    double primal_objective = 0.0;  // c^T x
    double dual_objective = 0.0;    // -Tr(F_0 Z)
    double gap = 0.0;               // c^T x + Tr(F_0 Z)
    int iterations = 0;
    std::string method;
    std::vector<IterateRecord> history;
};

struct SolverOptions {
    double gap_tol = 1e-9;
    double feas_tol = 1e-9;
    int max_iters = 200;
    bool scale_problem = true;
    double schur_regularization = 1e-12;
    double infeasibility_tol = 1e-8;
    // Above this many variables solve() switches to the first-order method.
    int first_order_threshold = 20000;
    double first_order_gap_tol = 1e-7;
    int first_order_max_iters = 50000;
    bool verbose = false;
};

SdpSolution solve(const SdpProblem& problem, const SolverOptions& opts = {});

// Primal-dual path following with Nesterov-Todd scaling and Mehrotra
// predictor-corrector steps; infeasible start.
SdpSolution solve_interior_point(const SdpProblem& problem, const SolverOptions& opts = {});

// ADMM on the dual (alternating direction augmented Lagrangian). Cheap
// iterations, modest accuracy; meant for problems whose Schur complement does
// not fit the interior-point method.
SdpSolution solve_first_order(const SdpProblem& problem, const SolverOptions& opts = {});

struct VerificationReport {
    double primal_min_eigenvalue = 0.0;  // min over blocks of lambda_min(F(x))
    double dual_min_eigenvalue = 0.0;    // min over blocks of lambda_min(Z)
    double dual_residual = 0.0;          // max_i |Tr(F_i Z) - c_i|
    double gap = 0.0;                    // c^T x + Tr(F_0 Z)
    double complementarity = 0.0;        // Tr(Z F(x))
    bool primal_feasible = false;
    bool dual_feasible = false;
    bool weak_duality_ok = false;
    std::vector<std::string> violations;

    bool ok() const { return violations.empty(); }
};

// Recomputes feasibility and duality quantities from (problem, x, Z) alone.
VerificationReport verify_solution(const SdpProblem& problem, const SdpSolution& solution, double tol = 1e-8,
                                   double gap_tol = 1e-8);

// Real symmetric embedding [[Re H, -Im H], [Im H, Re H]] of a Hermitian matrix.
RMatrix embed_hermitian(const CMatrix& h);
CMatrix extract_hermitian(const RMatrix& embedded);

// Adds the embedding of a Hermitian matrix's (row, col) entry, with the (col,
// row) entry implied, into a block of complex dimension n.
void add_hermitian_entry(SymBlockSparse& m, int block, int n, int row, int col, Complex value);

double inner(const BlockMatrix& a, const BlockMatrix& b);

// SDPA sparse format (".dat-s"). SDPA writes the constraint as
// sum_i x_i F_i - F_0 >= 0, so F_0 changes sign on the way in and out.
void write_sdpa(const SdpProblem& problem, std::ostream& out);
SdpProblem read_sdpa(std::istream& in);

}  // namespace sepmarg::sdp
