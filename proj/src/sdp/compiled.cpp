#include "compiled.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <set>

namespace sepmarg::sdp {
namespace {
std::atomic<long> g_solves{0}, g_iterates{0}, g_violations{0};
}

bool weak_duality_holds(const IterateRecord& r, double tol) {
    const double scale = 1.0 + std::abs(r.primal_objective) + std::abs(r.dual_objective);
    return r.primal_objective - r.dual_objective >= -r.infeasibility_bound - tol * scale;
}

SolveStatistics solve_statistics() { return {g_solves.load(), g_iterates.load(), g_violations.load()}; }

void reset_solve_statistics() {
    g_solves = 0;
    g_iterates = 0;
    g_violations = 0;
}

}  // namespace sepmarg::sdp

namespace sepmarg::sdp::detail {

void record_statistics(const SdpSolution& sol) {
    ++g_solves;
    g_iterates += static_cast<long>(sol.history.size());
    for (const auto& r : sol.history)
        if (!weak_duality_holds(r)) ++g_violations;
}

Compiled compile(const SdpProblem& p, bool scale) {
    Compiled cp;
    cp.m = p.num_vars();
    cp.block_sizes = p.block_sizes;
    cp.c = p.c;
    cp.scale = RVector::Ones(cp.m);
    cp.var_blocks.resize(cp.m);
    cp.block_vars.resize(p.block_sizes.size());
    cp.F0 = cp.zeros();
    for (const auto& e : p.F[0].entries()) {
        cp.F0[e.block](e.row, e.col) += e.value;
        if (e.row != e.col) cp.F0[e.block](e.col, e.row) += e.value;
    }
    for (int i = 0; i < cp.m; ++i) {
        const auto& f = p.F[i + 1];
        const double norm = f.frobenius_norm();
        if (norm == 0.0) throw InvalidArgument("SDP variable " + std::to_string(i) + " has a zero constraint matrix");
        const double s = scale ? norm : 1.0;
        cp.scale(i) = s;
        cp.c(i) /= s;
        for (const auto& e : f.entries()) {
            auto& vb = cp.var_blocks[i];
            if (vb.empty() || vb.back().block != e.block) vb.push_back({e.block, {}, 0});
            vb.back().entries.push_back({e.row, e.col, e.value / s});
            vb.back().nnz_full += e.row == e.col ? 1 : 2;
        }
        for (int k = 0; k < static_cast<int>(cp.var_blocks[i].size()); ++k)
            cp.block_vars[cp.var_blocks[i][k].block].emplace_back(i, k);
    }
    return cp;
}

double Compiled::trace(int var, const BlockMatrix& x) const {
    double s = 0.0;
    for (const auto& vb : var_blocks[var]) {
        const RMatrix& xb = x[vb.block];
        for (const auto& e : vb.entries) s += (e.row == e.col ? 1.0 : 2.0) * e.value * xb(e.row, e.col);
    }
    return s;
}

void Compiled::accumulate(int var, double coef, BlockMatrix& x) const {
    if (coef == 0.0) return;
    for (const auto& vb : var_blocks[var]) {
        RMatrix& xb = x[vb.block];
        for (const auto& e : vb.entries) {
            xb(e.row, e.col) += coef * e.value;
            if (e.row != e.col) xb(e.col, e.row) += coef * e.value;
        }
    }
}

BlockMatrix Compiled::zeros() const {
    BlockMatrix out;
    for (int b : block_sizes) out.push_back(RMatrix::Zero(b, b));
    return out;
}

BlockMatrix Compiled::identity(double diag) const {
    BlockMatrix out;
    for (int b : block_sizes) out.push_back(RMatrix::Identity(b, b) * diag);
    return out;
}

SchurSystem::SchurSystem(const Compiled& cp) {
    // Group variables by the exact set of blocks they touch.
    std::map<std::vector<int>, std::vector<int>> by_support;
    for (int i = 0; i < cp.m; ++i) {
        std::vector<int> support;
        for (const auto& vb : cp.var_blocks[i]) support.push_back(vb.block);
        by_support[support].push_back(i);
    }
    std::vector<std::pair<std::vector<int>, std::vector<int>>> sets(by_support.begin(), by_support.end());
    std::stable_sort(sets.begin(), sets.end(),
                     [](const auto& a, const auto& b) { return a.second.size() > b.second.size(); });

    std::set<int> used;
    slot_group_.assign(cp.m, -1);
    slot_index_.assign(cp.m, -1);
    for (auto& [support, vars] : sets) {
        const bool disjoint = std::none_of(support.begin(), support.end(), [&](int b) { return used.count(b) > 0; });
        if (disjoint) {
            used.insert(support.begin(), support.end());
            groups_.push_back(vars);
        } else {
            global_.insert(global_.end(), vars.begin(), vars.end());
        }
    }
    std::sort(global_.begin(), global_.end());
    for (int g = 0; g < static_cast<int>(groups_.size()); ++g)
        for (int k = 0; k < static_cast<int>(groups_[g].size()); ++k) {
            slot_group_[groups_[g][k]] = g;
            slot_index_[groups_[g][k]] = k;
        }
    for (int k = 0; k < static_cast<int>(global_.size()); ++k) slot_index_[global_[k]] = k;

    const auto nc = static_cast<Eigen::Index>(global_.size());
    for (const auto& g : groups_) {
        const auto ng = static_cast<Eigen::Index>(g.size());
        D_.push_back(RMatrix::Zero(ng, ng));
        B_.push_back(RMatrix::Zero(ng, nc));
    }
    C_ = RMatrix::Zero(nc, nc);
    d_llt_.resize(groups_.size());
    y_.resize(groups_.size());
}

void SchurSystem::clear() {
    for (auto& d : D_) d.setZero();
    for (auto& b : B_) b.setZero();
    C_.setZero();
}

void SchurSystem::add(int i, int j, double v) {
    const int gi = slot_group_[i], gj = slot_group_[j];
    const int li = slot_index_[i], lj = slot_index_[j];
    if (gi >= 0 && gj >= 0) {
        if (gi != gj) throw SolverFailure("Schur complement coupling between independent variable groups");
        D_[gi](li, lj) += v;
        if (i != j) D_[gi](lj, li) += v;
    } else if (gi >= 0) {
        B_[gi](li, lj) += v;
    } else if (gj >= 0) {
        B_[gj](lj, li) += v;
    } else {
        C_(li, lj) += v;
        if (i != j) C_(lj, li) += v;
    }
}

double SchurSystem::max_diagonal() const {
    double d = 0.0;
    for (const auto& m : D_)
        if (m.size()) d = std::max(d, m.diagonal().maxCoeff());
    if (C_.size()) d = std::max(d, C_.diagonal().maxCoeff());
    return d;
}

bool SchurSystem::factor(double reg) {
    const auto nc = C_.rows();
    RMatrix c = C_;
    for (std::size_t g = 0; g < D_.size(); ++g) {
        RMatrix d = D_[g];
        d.diagonal().array() += reg;
        d_llt_[g].compute(d);
        if (d_llt_[g].info() != Eigen::Success) return false;
        if (nc > 0) {
            y_[g] = d_llt_[g].matrixL().solve(B_[g]);
            c.selfadjointView<Eigen::Lower>().rankUpdate(y_[g].transpose(), -1.0);
        }
    }
    if (nc > 0) {
        c.diagonal().array() += reg;
        c_llt_.compute(c);
        if (c_llt_.info() != Eigen::Success) return false;
    }
    return true;
}

RVector SchurSystem::solve(const RVector& rhs) const {
    const auto nc = static_cast<Eigen::Index>(global_.size());
    std::vector<RVector> rg(groups_.size());
    RVector rc(nc);
    for (Eigen::Index k = 0; k < nc; ++k) rc(k) = rhs(global_[k]);
    for (std::size_t g = 0; g < groups_.size(); ++g) {
        RVector r(groups_[g].size());
        for (std::size_t k = 0; k < groups_[g].size(); ++k) r(k) = rhs(groups_[g][k]);
        rg[g] = d_llt_[g].matrixL().solve(r);
        if (nc > 0) rc.noalias() -= y_[g].transpose() * rg[g];
    }
    RVector xc = nc > 0 ? RVector(c_llt_.solve(rc)) : RVector();
    RVector out(rhs.size());
    for (Eigen::Index k = 0; k < nc; ++k) out(global_[k]) = xc(k);
    for (std::size_t g = 0; g < groups_.size(); ++g) {
        RVector r = rg[g];
        if (nc > 0) r.noalias() -= y_[g] * xc;
        RVector xg = d_llt_[g].matrixU().solve(r);
        for (std::size_t k = 0; k < groups_[g].size(); ++k) out(groups_[g][k]) = xg(k);
    }
    return out;
}

RVector SchurSystem::multiply(const RVector& v) const {
    const auto nc = static_cast<Eigen::Index>(global_.size());
    RVector vc(nc);
    for (Eigen::Index k = 0; k < nc; ++k) vc(k) = v(global_[k]);
    RVector outc = nc > 0 ? RVector(C_ * vc) : RVector();
    RVector out(v.size());
    for (std::size_t g = 0; g < groups_.size(); ++g) {
        RVector vg(groups_[g].size());
        for (std::size_t k = 0; k < groups_[g].size(); ++k) vg(k) = v(groups_[g][k]);
        RVector og = D_[g] * vg;
        if (nc > 0) {
            og.noalias() += B_[g] * vc;
            outc.noalias() += B_[g].transpose() * vg;
        }
        for (std::size_t k = 0; k < groups_[g].size(); ++k) out(groups_[g][k]) = og(k);
    }
    for (Eigen::Index k = 0; k < nc; ++k) out(global_[k]) = outc(k);
    return out;
}

RVector SchurSystem::solve_refined(const RVector& rhs, int steps) const {
    RVector x = solve(rhs);
    for (int s = 0; s < steps; ++s) x += solve(rhs - multiply(x));
    return x;
}

}  // namespace sepmarg::sdp::detail
