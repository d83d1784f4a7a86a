#include <algorithm>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>

#include "compiled.hpp"
#include "sepmarg/kernels.hpp"

namespace sepmarg::sdp {
namespace {

using detail::Compiled;
using detail::SchurSystem;

// Nesterov-Todd scaling of one block: G^{-1} S G^{-T} = G^T Z G = diag(lambda).
struct NtScaling {
    RMatrix G;
    RMatrix Ginv;
    RMatrix Winv;  // Ginv^T Ginv
    RVector lambda;
    RMatrix Ls;  // chol(S)
    RMatrix Lz;  // chol(Z)
};

bool nt_scaling(const RMatrix& S, const RMatrix& Z, NtScaling& out) {
    Eigen::LLT<RMatrix> ls(S), lz(Z);
    if (ls.info() != Eigen::Success || lz.info() != Eigen::Success) return false;
    out.Ls = ls.matrixL();
    out.Lz = lz.matrixL();
    const RMatrix prod = out.Ls.transpose() * out.Lz;
    Eigen::JacobiSVD<RMatrix> svd(prod, Eigen::ComputeFullU);
    out.lambda = svd.singularValues();
    if (out.lambda.minCoeff() <= 0.0 || !out.lambda.allFinite()) return false;
    const RVector inv_sqrt = out.lambda.array().rsqrt();
    const RVector sqrt_l = out.lambda.array().sqrt();
    const RMatrix& U = svd.matrixU();
    out.G = out.Ls * U * inv_sqrt.asDiagonal();
    // Ginv = D^{1/2} U^T Ls^{-1}
    const RMatrix lsinv = out.Ls.triangularView<Eigen::Lower>().solve(RMatrix::Identity(S.rows(), S.cols()));
    out.Ginv = sqrt_l.asDiagonal() * U.transpose() * lsinv;
    out.Winv = out.Ginv.transpose() * out.Ginv;
    return true;
}

// Largest alpha <= cap with X + alpha dX >= 0, given L = chol(X).
double max_step(const RMatrix& L, const RMatrix& dX) {
    if (L.rows() == 1) {
        const double x = L(0, 0) * L(0, 0);
        return dX(0, 0) < 0 ? -x / dX(0, 0) : std::numeric_limits<double>::infinity();
    }
    const auto tri = L.triangularView<Eigen::Lower>();
    RMatrix t = tri.solve(dX);
    t = tri.solve(t.transpose()).transpose();
    t = (t + t.transpose()) * 0.5;
    Eigen::SelfAdjointEigenSolver<RMatrix> es(t, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues()(0);
    return lmin < 0 ? -1.0 / lmin : std::numeric_limits<double>::infinity();
}

double frob(const BlockMatrix& a) { return std::sqrt(inner(a, a)); }

void symmetrize(BlockMatrix& a) {
    for (auto& m : a) m = (m + m.transpose()).eval() * 0.5;
}

// Accumulates M_ij = sum_b Tr(F_ib W_b^{-1} F_jb W_b^{-1}) into the Schur system.
void assemble_schur(const Compiled& cp, const std::vector<NtScaling>& nt, SchurSystem& schur) {
    schur.clear();
    for (std::size_t b = 0; b < cp.block_sizes.size(); ++b) {
        const auto& vars = cp.block_vars[b];
        if (vars.empty()) continue;
        const RMatrix& A = nt[b].Winv;
        const Eigen::Index n = A.rows();
        RMatrix H(n, n), G(n, n);
        for (std::size_t p = 0; p < vars.size(); ++p) {
            const auto [i, ki] = vars[p];
            const auto& vb = cp.var_blocks[i][ki];
            if (vb.nnz_full <= 2 * n) {
                // G = sum over entries of v (a_r a_c^T + a_c a_r^T), built as H + H^T.
                H.setZero();
                for (const auto& e : vb.entries) {
                    const double v = e.row == e.col ? 0.5 * e.value : e.value;
                    const double* ar = A.col(e.row).data();
                    const double* ac = A.col(e.col).data();
                    for (Eigen::Index k = 0; k < n; ++k)
                        kernels::axpy(v * ac[k], {ar, static_cast<std::size_t>(n)},
                                      {H.col(k).data(), static_cast<std::size_t>(n)});
                }
                G = H + H.transpose();
            } else {
                RMatrix FA = RMatrix::Zero(n, n);
                for (const auto& e : vb.entries) {
                    FA.row(e.row) += e.value * A.row(e.col);
                    if (e.row != e.col) FA.row(e.col) += e.value * A.row(e.row);
                }
                G.noalias() = A * FA;
            }
            for (std::size_t q = p; q < vars.size(); ++q) {
                const auto [j, kj] = vars[q];
                double s = 0.0;
                for (const auto& e : cp.var_blocks[j][kj].entries)
                    s += (e.row == e.col ? 1.0 : 2.0) * e.value * G(e.row, e.col);
                schur.add(i, j, s);
            }
        }
    }
}

struct Direction {
    RVector dx;
    BlockMatrix dS;
    BlockMatrix dZ;
};

// Solves the Newton system for a given complementarity right-hand side Rc
// (dZ + W^{-1} dS W^{-1} = Rc).
Direction newton_direction(const Compiled& cp, const std::vector<NtScaling>& nt, const SchurSystem& schur,
                           const BlockMatrix& Rp, const RVector& rd, const BlockMatrix& Rc) {
    BlockMatrix T = Rc;
    for (std::size_t b = 0; b < T.size(); ++b) T[b].noalias() -= nt[b].Winv * Rp[b] * nt[b].Winv;
    RVector rhs(cp.m);
    for (int i = 0; i < cp.m; ++i) rhs(i) = cp.trace(i, T) - rd(i);

    Direction d;
    d.dx = schur.solve_refined(rhs);
    d.dS = Rp;
    for (int i = 0; i < cp.m; ++i) cp.accumulate(i, d.dx(i), d.dS);
    symmetrize(d.dS);
    d.dZ = Rc;
    for (std::size_t b = 0; b < T.size(); ++b) d.dZ[b].noalias() -= nt[b].Winv * d.dS[b] * nt[b].Winv;
    symmetrize(d.dZ);
    return d;
}

double step_to_boundary(const std::vector<NtScaling>& nt, const BlockMatrix& dX, bool primal) {
    double a = std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < dX.size(); ++b) a = std::min(a, max_step(primal ? nt[b].Ls : nt[b].Lz, dX[b]));
    return a;
}

double block_min_eig(const RMatrix& m) {
    if (m.rows() == 1) return m(0, 0);
    Eigen::SelfAdjointEigenSolver<RMatrix> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

}  // namespace

SdpSolution solve_interior_point(const SdpProblem& problem, const SolverOptions& opts) {
    problem.validate();
    const Compiled cp = detail::compile(problem, opts.scale_problem);
    const int m = cp.m;
    const auto nblocks = cp.block_sizes.size();
    const double n_total = problem.total_dim();
    const double norm_f0 = frob(cp.F0);
    const double norm_c = cp.c.norm();

    // Initial point x = 0, S = eta I, Z = xi I.
    double xi = 10.0, eta = 10.0;
    for (int nb : cp.block_sizes) {
        const double sq = std::sqrt(static_cast<double>(nb));
        xi = std::max(xi, sq);
        eta = std::max(eta, sq);
    }
    for (int i = 0; i < m; ++i) {
        double fn = 0.0;
        for (const auto& vb : cp.var_blocks[i])
            for (const auto& e : vb.entries) fn += (e.row == e.col ? 1.0 : 2.0) * e.value * e.value;
        xi = std::max(xi, std::sqrt(n_total) * (1.0 + std::abs(cp.c(i))) / (1.0 + std::sqrt(fn)));
        eta = std::max(eta, std::sqrt(fn));
    }
    eta = std::max(eta, norm_f0);

    RVector x = RVector::Zero(m);
    BlockMatrix S = cp.identity(eta);
    BlockMatrix Z = cp.identity(xi);

    SchurSystem schur(cp);
    SdpSolution sol;
    sol.method = "interior-point";
    sol.status = SolveStatus::MaxIterations;

    struct Best {
        double merit = std::numeric_limits<double>::infinity();
        RVector x;
        BlockMatrix Z;
        int iteration = 0;
    } best;

    std::vector<NtScaling> nt(nblocks);
    int stall_count = 0;
    double prev_merit = std::numeric_limits<double>::infinity();

    for (int iter = 0; iter <= opts.max_iters; ++iter) {
        // Residuals.
        BlockMatrix Rp = cp.F0;
        for (int i = 0; i < m; ++i) cp.accumulate(i, x(i), Rp);
        for (std::size_t b = 0; b < nblocks; ++b) Rp[b] -= S[b];
        RVector rd(m);
        for (int i = 0; i < m; ++i) rd(i) = cp.c(i) - cp.trace(i, Z);

        const double pobj = cp.c.dot(x);
        const double dobj = -inner(cp.F0, Z);
        const double comp = inner(S, Z);
        const double pinf = frob(Rp) / (1.0 + norm_f0);
        const double dinf = rd.norm() / (1.0 + norm_c);
        const double scale_obj = 1.0 + std::abs(pobj) + std::abs(dobj);
        const double rel_gap = std::max(std::abs(pobj - dobj), comp) / scale_obj;
        const double mu = comp / n_total;

        double bound = std::abs(x.dot(rd)) + std::abs(inner(Rp, Z));
        IterateRecord rec{iter, pobj, dobj, pinf, dinf, comp, 0.0, 0.0, bound};
        if (!sol.history.empty()) {
            rec.step_primal = sol.history.back().step_primal;
            rec.step_dual = sol.history.back().step_dual;
        }
        sol.history.push_back(rec);
        if (opts.verbose)
            std::cerr << std::scientific << std::setprecision(3) << "ipm " << iter << " p=" << pobj << " d=" << dobj
                      << " gap=" << rel_gap << " pinf=" << pinf << " dinf=" << dinf << '\n';

        const double merit = std::max({rel_gap / opts.gap_tol, pinf / opts.feas_tol, dinf / opts.feas_tol});
        if (merit < best.merit) {
            best = {merit, x, Z, iter};
        }
        sol.iterations = iter;
        if (rel_gap <= opts.gap_tol && pinf <= opts.feas_tol && dinf <= opts.feas_tol) {
            sol.status = SolveStatus::Optimal;
            break;
        }

        // Infeasibility certificates (Farkas rays).
        if (dobj > 0.0) {
            double ray = 0.0;
            for (int i = 0; i < m; ++i) ray = std::max(ray, std::abs(cp.trace(i, Z)));
            if (ray / dobj < opts.infeasibility_tol && pinf > opts.feas_tol) {
                sol.status = SolveStatus::PrimalInfeasible;
                break;
            }
        }
        if (pobj < 0.0 && dinf > opts.feas_tol) {
            BlockMatrix ax = cp.zeros();
            for (int i = 0; i < m; ++i) cp.accumulate(i, x(i), ax);
            double lmin = std::numeric_limits<double>::infinity();
            for (const auto& blk : ax) lmin = std::min(lmin, block_min_eig(blk));
            if (lmin / -pobj > -opts.infeasibility_tol && x.norm() > 1e3) {
                sol.status = SolveStatus::DualInfeasible;
                break;
            }
        }
        if (iter == opts.max_iters) break;

        if (merit > 0.99 * prev_merit)
            ++stall_count;
        else
            stall_count = 0;
        prev_merit = std::min(prev_merit, merit);

        // NT scaling and Schur complement.
        bool ok = true;
        for (std::size_t b = 0; b < nblocks && ok; ++b) ok = nt_scaling(S[b], Z[b], nt[b]);
        if (!ok) {
            sol.status = SolveStatus::Stalled;
            break;
        }
        assemble_schur(cp, nt, schur);
        double reg = opts.schur_regularization * std::max(1.0, schur.max_diagonal());
        bool factored = schur.factor(reg);
        for (int attempt = 0; !factored && attempt < 6; ++attempt) {
            reg *= 100.0;
            factored = schur.factor(reg);
        }
        if (!factored) {
            std::ostringstream msg;
            msg << "interior point: Schur complement not positive definite after regularization (iteration " << iter
                << ", primal " << pobj << ", dual " << dobj << ", mu " << mu << ")";
            throw SolverFailure(msg.str());
        }

        // Predictor (affine scaling) direction.
        BlockMatrix Rc(nblocks);
        for (std::size_t b = 0; b < nblocks; ++b) Rc[b] = -Z[b];
        Direction pred = newton_direction(cp, nt, schur, Rp, rd, Rc);
        const double ap = std::min(1.0, step_to_boundary(nt, pred.dS, true));
        const double ad = std::min(1.0, step_to_boundary(nt, pred.dZ, false));

        double mu_aff = 0.0;
        for (std::size_t b = 0; b < nblocks; ++b) {
            const RMatrix sa = S[b] + ap * pred.dS[b];
            const RMatrix za = Z[b] + ad * pred.dZ[b];
            mu_aff += kernels::dot({sa.data(), static_cast<std::size_t>(sa.size())},
                                   {za.data(), static_cast<std::size_t>(za.size())});
        }
        mu_aff /= n_total;
        const double expon = std::max(1.0, 3.0 * std::min(ap, ad) * std::min(ap, ad));
        const double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, expon), 0.0, 1.0);

        // Mehrotra corrector in the scaled space.
        for (std::size_t b = 0; b < nblocks; ++b) {
            const auto& s = nt[b];
            const RMatrix dSt = s.Ginv * pred.dS[b] * s.Ginv.transpose();
            const RMatrix dZt = s.G.transpose() * pred.dZ[b] * s.G;
            const RMatrix cross = dSt * dZt + dZt * dSt;
            const Eigen::Index nb = s.lambda.size();
            RMatrix H(nb, nb);
            for (Eigen::Index c = 0; c < nb; ++c)
                for (Eigen::Index r = 0; r < nb; ++r) H(r, c) = -cross(r, c) / (s.lambda(r) + s.lambda(c));
            for (Eigen::Index k = 0; k < nb; ++k) H(k, k) += sigma * mu / s.lambda(k) - s.lambda(k);
            Rc[b] = s.Ginv.transpose() * H * s.Ginv;
        }
        Direction dir = newton_direction(cp, nt, schur, Rp, rd, Rc);
        const double amax_p = step_to_boundary(nt, dir.dS, true);
        const double amax_d = step_to_boundary(nt, dir.dZ, false);
        const double gamma = std::min(0.995, 0.9 + 0.09 * std::min(ap, ad));
        const double step_p = std::min(1.0, gamma * amax_p);
        const double step_d = std::min(1.0, gamma * amax_d);
        sol.history.back().step_primal = step_p;
        sol.history.back().step_dual = step_d;

        x += step_p * dir.dx;
        for (std::size_t b = 0; b < nblocks; ++b) {
            S[b] += step_p * dir.dS[b];
            Z[b] += step_d * dir.dZ[b];
        }
        symmetrize(S);
        symmetrize(Z);

        if ((step_p < 1e-10 && step_d < 1e-10) || stall_count >= 8 || !x.allFinite()) {
            sol.status = SolveStatus::Stalled;
            sol.iterations = iter + 1;
            break;
        }
    }

    if (sol.status == SolveStatus::Stalled || sol.status == SolveStatus::MaxIterations) {
        x = best.x;
        Z = best.Z;
    }
    sol.x = x.cwiseQuotient(cp.scale);
    sol.Z = Z;
    sol.S = problem.evaluate(sol.x);
    sol.primal_objective = problem.c.dot(sol.x);
    double f0z = 0.0;
    for (const auto& e : problem.F[0].entries())
        f0z += (e.row == e.col ? 1.0 : 2.0) * e.value * Z[e.block](e.row, e.col);
    sol.dual_objective = -f0z;
    sol.gap = sol.primal_objective - sol.dual_objective;
    detail::record_statistics(sol);
    return sol;
}

SdpSolution solve(const SdpProblem& problem, const SolverOptions& opts) {
    problem.validate();
    if (problem.num_vars() > opts.first_order_threshold) return solve_first_order(problem, opts);
    return solve_interior_point(problem, opts);
}

}  // namespace sepmarg::sdp
