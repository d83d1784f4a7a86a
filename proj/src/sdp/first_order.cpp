#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <map>
#include <tuple>

#include "compiled.hpp"

// ADMM on the dual problem (alternating direction augmented Lagrangian).
// With y = -x and the standard-form data C = F_0, b = c, each sweep does
//   y <- (AA*)^{-1} (A(C - S) - mu (A(X) - b))
//   V <- C - A*(y) - mu X,   S <- V_+,   X <- -V_- / mu,
// so S and X stay PSD and only the linear constraints are approached.
namespace sepmarg::sdp {
namespace {

using detail::Compiled;

Eigen::SparseMatrix<double> gram_matrix(const Compiled& cp) {
    std::map<std::tuple<int, int, int>, std::vector<std::pair<int, double>>> by_entry;
    for (int i = 0; i < cp.m; ++i)
        for (const auto& vb : cp.var_blocks[i])
            for (const auto& e : vb.entries) by_entry[{vb.block, e.row, e.col}].emplace_back(i, e.value);
    std::map<std::pair<int, int>, double> acc;
    for (const auto& [key, list] : by_entry) {
        const double w = std::get<1>(key) == std::get<2>(key) ? 1.0 : 2.0;
        for (const auto& [i, vi] : list)
            for (const auto& [j, vj] : list) acc[{i, j}] += w * vi * vj;
    }
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(acc.size());
    for (const auto& [ij, v] : acc) trip.emplace_back(ij.first, ij.second, v);
    Eigen::SparseMatrix<double> g(cp.m, cp.m);
    g.setFromTriplets(trip.begin(), trip.end());
    return g;
}

// Splits a symmetric matrix into its PSD and NSD parts.
void split_psd(const RMatrix& v, RMatrix& pos, RMatrix& neg) {
    Eigen::SelfAdjointEigenSolver<RMatrix> es(v);
    const RVector& l = es.eigenvalues();
    const RMatrix& q = es.eigenvectors();
    pos = q * l.cwiseMax(0.0).asDiagonal() * q.transpose();
    neg = v - pos;
}

}  // namespace

SdpSolution solve_first_order(const SdpProblem& problem, const SolverOptions& opts) {
    problem.validate();
    const Compiled cp = detail::compile(problem, true);
    const int m = cp.m;
    const auto nblocks = cp.block_sizes.size();

    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(gram_matrix(cp));
    if (ldlt.info() != Eigen::Success) throw SolverFailure("first-order: constraint Gram matrix is singular");

    const double norm_b = cp.c.norm();
    const double norm_c = std::sqrt(inner(cp.F0, cp.F0));
    auto apply_a = [&](const BlockMatrix& x) {
        RVector out(m);
        for (int i = 0; i < m; ++i) out(i) = cp.trace(i, x);
        return out;
    };

    BlockMatrix X = cp.identity(0.0), S = cp.identity(0.0);
    RVector y = RVector::Zero(m);
    double mu = 1.0;
    int ratio_count = 0;
    double ratio_sum = 0.0;

    SdpSolution sol;
    sol.method = "first-order";
    sol.status = SolveStatus::MaxIterations;

    for (int iter = 0; iter < opts.first_order_max_iters; ++iter) {
        BlockMatrix CmS = cp.F0;
        for (std::size_t b = 0; b < nblocks; ++b) CmS[b] -= S[b];
        const RVector ax = apply_a(X);
        y = ldlt.solve(apply_a(CmS) - mu * (ax - cp.c));

        const BlockMatrix X_old = X;
        for (std::size_t b = 0; b < nblocks; ++b) {
            RMatrix V = cp.F0[b] - mu * X[b];
            for (const auto& [i, k] : cp.block_vars[b]) {
                for (const auto& e : cp.var_blocks[i][k].entries) {
                    V(e.row, e.col) -= y(i) * e.value;
                    if (e.row != e.col) V(e.col, e.row) -= y(i) * e.value;
                }
            }
            V = (V + V.transpose()).eval() * 0.5;
            RMatrix pos, neg;
            split_psd(V, pos, neg);
            S[b] = pos;
            X[b] = -neg / mu;
        }

        const RVector r = apply_a(X) - cp.c;
        const double pinf = r.norm() / (1.0 + norm_b);
        // F(x) - S = mu (X - X_old)
        double ds = 0.0, rpz = 0.0;
        for (std::size_t b = 0; b < nblocks; ++b) {
            const RMatrix rp = mu * (X[b] - X_old[b]);
            ds += rp.squaredNorm();
            rpz += rp.cwiseProduct(X[b]).sum();
        }
        const double dinf = std::sqrt(ds) / (1.0 + norm_c);
        const double pobj = -cp.c.dot(y);
        const double dobj = -inner(cp.F0, X);
        const double rel_gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));

        if (iter % 50 == 0 || iter + 1 == opts.first_order_max_iters) {
            sol.history.push_back(
                {iter, pobj, dobj, pinf, dinf, inner(S, X), 1.0, 1.0, std::abs(y.dot(r)) + std::abs(rpz)});
            if (opts.verbose)
                std::cerr << std::scientific << std::setprecision(3) << "admm " << iter << " p=" << pobj
                          << " d=" << dobj << " gap=" << rel_gap << " pinf=" << pinf << " dinf=" << dinf
                          << " mu=" << mu << '\n';
        }
        sol.iterations = iter + 1;
        if (pinf <= opts.first_order_gap_tol && rel_gap <= opts.first_order_gap_tol &&
            dinf <= opts.first_order_gap_tol) {
            sol.status = SolveStatus::Optimal;
            break;
        }

        // Balance primal and dual residuals by adjusting the penalty.
        if (dinf > 0.0) {
            ratio_sum += std::log(pinf / dinf);
            if (++ratio_count == 20) {
                const double avg = ratio_sum / ratio_count;
                if (avg > std::log(2.0))
                    mu = std::max(mu / 1.6, 1e-8);
                else if (avg < -std::log(2.0))
                    mu = std::min(mu * 1.6, 1e8);
                ratio_count = 0;
                ratio_sum = 0.0;
            }
        }
    }

    sol.x = (-y).cwiseQuotient(cp.scale);
    sol.Z = X;
    sol.S = problem.evaluate(sol.x);
    sol.primal_objective = problem.c.dot(sol.x);
    double f0z = 0.0;
    for (const auto& e : problem.F[0].entries())
        f0z += (e.row == e.col ? 1.0 : 2.0) * e.value * X[e.block](e.row, e.col);
    sol.dual_objective = -f0z;
    sol.gap = sol.primal_objective - sol.dual_objective;
    detail::record_statistics(sol);
    return sol;
}

}  // namespace sepmarg::sdp
