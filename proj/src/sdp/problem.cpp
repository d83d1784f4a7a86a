#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "sepmarg/kernels.hpp"
#include "sepmarg/sdp.hpp"

namespace sepmarg::sdp {

void SymBlockSparse::add(int block, int row, int col, double value) {
    if (row > col) std::swap(row, col);
    entries_.push_back({block, row, col, value});
}

void SymBlockSparse::finalize() {
    std::sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) {
        return std::tie(a.block, a.row, a.col) < std::tie(b.block, b.row, b.col);
    });
    std::vector<Entry> merged;
    merged.reserve(entries_.size());
    for (const auto& e : entries_) {
        if (!merged.empty() && merged.back().block == e.block && merged.back().row == e.row &&
            merged.back().col == e.col)
            merged.back().value += e.value;
        else
            merged.push_back(e);
    }
    std::erase_if(merged, [](const Entry& e) { return e.value == 0.0; });
    entries_ = std::move(merged);
}

double SymBlockSparse::frobenius_norm() const {
    double s = 0.0;
    for (const auto& e : entries_) s += (e.row == e.col ? 1.0 : 2.0) * e.value * e.value;
    return std::sqrt(s);
}

void SymBlockSparse::scale(double factor) {
    for (auto& e : entries_) e.value *= factor;
}

SdpProblem::SdpProblem(std::vector<int> blocks, int num_vars)
    : block_sizes(std::move(blocks)), c(RVector::Zero(num_vars)), F(num_vars + 1) {}

int SdpProblem::total_dim() const {
    int n = 0;
    for (int b : block_sizes) n += b;
    return n;
}

void SdpProblem::finalize() {
    for (auto& f : F) f.finalize();
}

void SdpProblem::validate() const {
    if (block_sizes.empty()) throw InvalidArgument("SdpProblem: no blocks");
    for (int b : block_sizes)
        if (b < 1) throw InvalidArgument("SdpProblem: block sizes must be >= 1");
    if (c.size() < 1) throw InvalidArgument("SdpProblem: need at least one variable");
    if (F.size() != static_cast<std::size_t>(c.size()) + 1)
        throw InvalidArgument("SdpProblem: expected m + 1 constraint matrices");
    for (std::size_t i = 0; i < F.size(); ++i)
        for (const auto& e : F[i].entries()) {
            if (e.block < 0 || e.block >= static_cast<int>(block_sizes.size()))
                throw InvalidArgument("SdpProblem: F_" + std::to_string(i) + " references unknown block");
            const int n = block_sizes[e.block];
            if (e.row < 0 || e.col < e.row || e.col >= n)
                throw InvalidArgument("SdpProblem: F_" + std::to_string(i) + " entry outside its block");
            if (!std::isfinite(e.value)) throw InvalidArgument("SdpProblem: non-finite coefficient");
        }
    if (!c.allFinite()) throw InvalidArgument("SdpProblem: non-finite objective");
}

BlockMatrix SdpProblem::evaluate(const RVector& x) const {
    if (x.size() != c.size()) throw InvalidArgument("SdpProblem::evaluate: wrong number of variables");
    BlockMatrix out;
    for (int b : block_sizes) out.push_back(RMatrix::Zero(b, b));
    for (std::size_t i = 0; i < F.size(); ++i) {
        const double w = i == 0 ? 1.0 : x(static_cast<Eigen::Index>(i) - 1);
        if (w == 0.0) continue;
        for (const auto& e : F[i].entries()) {
            out[e.block](e.row, e.col) += w * e.value;
            if (e.row != e.col) out[e.block](e.col, e.row) += w * e.value;
        }
    }
    return out;
}

std::string_view status_name(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::PrimalInfeasible: return "primal-infeasible";
        case SolveStatus::DualInfeasible: return "dual-infeasible";
        case SolveStatus::MaxIterations: return "max-iterations";
        case SolveStatus::Stalled: return "stalled";
    }
    return "unknown";
}

double inner(const BlockMatrix& a, const BlockMatrix& b) {
    if (a.size() != b.size()) throw InvalidArgument("inner: block count mismatch");
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (a[k].size() != b[k].size()) throw InvalidArgument("inner: block size mismatch");
        s += kernels::dot({a[k].data(), static_cast<std::size_t>(a[k].size())},
                          {b[k].data(), static_cast<std::size_t>(b[k].size())});
    }
    return s;
}

namespace {

double min_eigenvalue(const RMatrix& m) {
    if (m.rows() == 1) return m(0, 0);
    Eigen::SelfAdjointEigenSolver<RMatrix> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

double trace_product(const SymBlockSparse& f, const BlockMatrix& z) {
    double s = 0.0;
    for (const auto& e : f.entries()) s += (e.row == e.col ? 1.0 : 2.0) * e.value * z[e.block](e.row, e.col);
    return s;
}

}  // namespace

VerificationReport verify_solution(const SdpProblem& problem, const SdpSolution& sol, double tol, double gap_tol) {
    VerificationReport r;
    const int m = problem.num_vars();
    if (sol.x.size() != m || sol.Z.size() != problem.block_sizes.size()) {
        r.violations.push_back("solution shape does not match problem");
        return r;
    }
    const BlockMatrix fx = problem.evaluate(sol.x);
    r.primal_min_eigenvalue = std::numeric_limits<double>::infinity();
    r.dual_min_eigenvalue = std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < fx.size(); ++b) {
        r.primal_min_eigenvalue = std::min(r.primal_min_eigenvalue, min_eigenvalue(fx[b]));
        const RMatrix zs = (sol.Z[b] + sol.Z[b].transpose()) * 0.5;
        r.dual_min_eigenvalue = std::min(r.dual_min_eigenvalue, min_eigenvalue(zs));
    }
    for (int i = 0; i < m; ++i)
        r.dual_residual = std::max(r.dual_residual, std::abs(trace_product(problem.F[i + 1], sol.Z) - problem.c(i)));
    r.gap = problem.c.dot(sol.x) + trace_product(problem.F[0], sol.Z);
    r.complementarity = inner(fx, sol.Z);

    r.primal_feasible = r.primal_min_eigenvalue >= -tol;
    r.dual_feasible = r.dual_min_eigenvalue >= -tol && r.dual_residual <= tol;
    r.weak_duality_ok = r.gap >= -tol;
    if (!r.primal_feasible)
        r.violations.push_back("F(x) has eigenvalue " + std::to_string(r.primal_min_eigenvalue));
    if (r.dual_min_eigenvalue < -tol) r.violations.push_back("Z has eigenvalue " + std::to_string(r.dual_min_eigenvalue));
    if (r.dual_residual > tol) r.violations.push_back("dual equality residual " + std::to_string(r.dual_residual));
    if (!r.weak_duality_ok) r.violations.push_back("negative duality gap " + std::to_string(r.gap));
    if (sol.status == SolveStatus::Optimal && std::abs(r.gap) > gap_tol * (1.0 + std::abs(sol.primal_objective)))
        r.violations.push_back("duality gap " + std::to_string(r.gap) + " above tolerance");
    return r;
}

RMatrix embed_hermitian(const CMatrix& h) {
    const CMatrix hh = hermitian_part(h);
    const Eigen::Index n = hh.rows();
    RMatrix out(2 * n, 2 * n);
    out.topLeftCorner(n, n) = hh.real();
    out.bottomRightCorner(n, n) = hh.real();
    out.topRightCorner(n, n) = -hh.imag();
    out.bottomLeftCorner(n, n) = hh.imag();
    return out;
}

CMatrix extract_hermitian(const RMatrix& e) {
    if (e.rows() != e.cols() || e.rows() % 2 != 0) throw InvalidArgument("extract_hermitian: bad embedding size");
    const Eigen::Index n = e.rows() / 2;
    // Average the two copies so a general symmetric input maps to the nearest
    // embedded matrix.
    const RMatrix re = (e.topLeftCorner(n, n) + e.bottomRightCorner(n, n)) * 0.5;
    const RMatrix im = (e.bottomLeftCorner(n, n) - e.topRightCorner(n, n)) * 0.5;
    CMatrix out(n, n);
    out.real() = re;
    out.imag() = im;
    return (out + out.adjoint()) * 0.5;
}

void add_hermitian_entry(SymBlockSparse& m, int block, int n, int row, int col, Complex value) {
    if (row > col) {
        std::swap(row, col);
        value = std::conj(value);
    }
    if (row == col) {
        m.add(block, row, row, value.real());
        m.add(block, n + row, n + row, value.real());
        return;
    }
    if (value.real() != 0.0) {
        m.add(block, row, col, value.real());
        m.add(block, n + row, n + col, value.real());
    }
    if (value.imag() != 0.0) {
        m.add(block, row, n + col, -value.imag());
        m.add(block, col, n + row, value.imag());
    }
}

void write_sdpa(const SdpProblem& p, std::ostream& out) {
    p.validate();
    out.precision(17);
    out << "* sepmarg SDP, SDPA sparse format; constraint sum_i x_i F_i - F_0 >= 0\n";
    out << p.num_vars() << " = m\n" << p.block_sizes.size() << " = nBlocks\n";
    for (std::size_t b = 0; b < p.block_sizes.size(); ++b) out << (b ? " " : "") << p.block_sizes[b];
    out << '\n';
    for (int i = 0; i < p.num_vars(); ++i) out << (i ? " " : "") << p.c(i);
    out << '\n';
    for (std::size_t i = 0; i < p.F.size(); ++i)
        for (const auto& e : p.F[i].entries())
            out << i << ' ' << e.block + 1 << ' ' << e.row + 1 << ' ' << e.col + 1 << ' '
                << (i == 0 ? -e.value : e.value) << '\n';
}

SdpProblem read_sdpa(std::istream& in) {
    std::string line;
    int line_no = 0;
    std::vector<std::pair<int, std::string>> lines;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '*' || line[first] == '"') continue;
        for (char& ch : line)
            if (ch == ',' || ch == '{' || ch == '}' || ch == '(' || ch == ')' || ch == '=') ch = ' ';
        lines.emplace_back(line_no, line);
    }
    std::size_t li = 0;
    auto need_line = [&](const char* what) -> std::pair<int, std::string>& {
        if (li >= lines.size()) throw InvalidArgument(std::string("SDPA input: missing ") + what);
        return lines[li++];
    };
    auto fail = [](int ln, const std::string& msg) {
        throw InvalidArgument("SDPA input line " + std::to_string(ln) + ": " + msg);
    };

    auto& [ln_m, l_m] = need_line("m");
    int m = 0;
    if (!(std::istringstream(l_m) >> m) || m < 1) fail(ln_m, "bad variable count");
    auto& [ln_nb, l_nb] = need_line("nBlocks");
    int nb = 0;
    if (!(std::istringstream(l_nb) >> nb) || nb < 1) fail(ln_nb, "bad block count");

    auto& [ln_bs, l_bs] = need_line("block sizes");
    std::istringstream bs(l_bs);
    // Negative sizes are diagonal blocks; expand them into 1x1 blocks.
    std::vector<int> sdpa_sizes(nb);
    std::vector<int> first_block(nb);
    std::vector<int> blocks;
    for (int b = 0; b < nb; ++b) {
        if (!(bs >> sdpa_sizes[b]) || sdpa_sizes[b] == 0) fail(ln_bs, "bad block size");
        first_block[b] = static_cast<int>(blocks.size());
        if (sdpa_sizes[b] > 0)
            blocks.push_back(sdpa_sizes[b]);
        else
            blocks.insert(blocks.end(), -sdpa_sizes[b], 1);
    }

    SdpProblem p(blocks, m);
    int got = 0;
    while (got < m) {
        auto& [ln_c, l_c] = need_line("objective vector");
        std::istringstream s(l_c);
        double v;
        while (got < m && s >> v) p.c(got++) = v;
        if (got < m && s.fail() && !s.eof()) fail(ln_c, "bad objective coefficient");
    }
    while (li < lines.size()) {
        auto& [ln, l] = lines[li++];
        std::istringstream s(l);
        int mat, blk, r, c;
        double v;
        if (!(s >> mat >> blk >> r >> c >> v)) fail(ln, "expected 'matno blkno i j value'");
        if (mat < 0 || mat > m) fail(ln, "matrix index out of range");
        if (blk < 1 || blk > nb) fail(ln, "block index out of range");
        const int sz = std::abs(sdpa_sizes[blk - 1]);
        if (r < 1 || c < 1 || r > sz || c > sz) fail(ln, "entry outside block");
        if (mat == 0) v = -v;
        if (sdpa_sizes[blk - 1] > 0) {
            p.F[mat].add(first_block[blk - 1], r - 1, c - 1, v);
        } else {
            if (r != c) fail(ln, "off-diagonal entry in diagonal block");
            p.F[mat].add(first_block[blk - 1] + r - 1, 0, 0, v);
        }
    }
    p.finalize();
    p.validate();
    return p;
}

}  // namespace sepmarg::sdp
