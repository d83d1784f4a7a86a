#include "sepmarg/tensor_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace sepmarg {
namespace {

std::vector<std::int64_t> strides_of(const std::vector<int>& dims) {
    std::vector<std::int64_t> s(dims.size(), 1);
    for (int p = static_cast<int>(dims.size()) - 2; p >= 0; --p) s[p] = s[p + 1] * dims[p + 1];
    return s;
}

std::vector<int> checked_subset(std::span<const int> parties, int n, bool allow_empty, const char* what) {
    std::vector<int> out(parties.begin(), parties.end());
    std::sort(out.begin(), out.end());
    if (std::adjacent_find(out.begin(), out.end()) != out.end())
        throw InvalidArgument(std::string(what) + ": duplicate party index");
    if (!allow_empty && out.empty()) throw InvalidArgument(std::string(what) + ": empty party set");
    for (int p : out)
        if (p < 0 || p >= n) throw InvalidArgument(std::string(what) + ": party index out of range");
    return out;
}

// Splits every basis index into the part carried by `parties` and the rest,
// each re-encoded as an index over its own sub-layout.
struct IndexSplit {
    std::vector<std::int64_t> inner;
    std::vector<std::int64_t> outer;
    std::int64_t inner_dim = 1;
    std::int64_t outer_dim = 1;
};

IndexSplit split_indices(const PartyLayout& layout, const std::vector<int>& parties) {
    const auto& dims = layout.dims();
    const auto strides = strides_of(dims);
    std::vector<bool> in(dims.size(), false);
    for (int p : parties) in[p] = true;

    IndexSplit s;
    std::vector<std::int64_t> inner_stride(dims.size(), 0), outer_stride(dims.size(), 0);
    for (int p = static_cast<int>(dims.size()) - 1; p >= 0; --p) {
        if (in[p]) {
            inner_stride[p] = s.inner_dim;
            s.inner_dim *= dims[p];
        } else {
            outer_stride[p] = s.outer_dim;
            s.outer_dim *= dims[p];
        }
    }
    const std::int64_t total = layout.total_dim();
    s.inner.resize(total);
    s.outer.resize(total);
    for (std::int64_t f = 0; f < total; ++f) {
        std::int64_t a = 0, b = 0;
        for (std::size_t p = 0; p < dims.size(); ++p) {
            const std::int64_t digit = (f / strides[p]) % dims[p];
            if (in[p])
                a += digit * inner_stride[p];
            else
                b += digit * outer_stride[p];
        }
        s.inner[f] = a;
        s.outer[f] = b;
    }
    return s;
}

}  // namespace

PartyLayout::PartyLayout(std::vector<int> dims) : dims_(std::move(dims)) {
    if (dims_.empty()) throw InvalidArgument("PartyLayout: no parties");
    for (int d : dims_) {
        if (d < 2) throw InvalidArgument("PartyLayout: local dimension must be >= 2");
        total_ *= d;
        if (total_ > (std::int64_t{1} << 40)) throw ResourceLimit("PartyLayout: total dimension too large");
    }
}

PartyLayout PartyLayout::qubits(int n) { return PartyLayout(std::vector<int>(n, 2)); }

bool PartyLayout::all_qubits() const {
    return std::all_of(dims_.begin(), dims_.end(), [](int d) { return d == 2; });
}

std::int64_t PartyLayout::dim_of(std::span<const int> parties) const {
    std::int64_t d = 1;
    for (int p : parties) d *= dims_.at(p);
    return d;
}

Bipartition::Bipartition(std::vector<int> members, int n_parties) : n_parties_(n_parties) {
    auto m = checked_subset(members, n_parties, false, "Bipartition");
    if (static_cast<int>(m.size()) == n_parties) throw InvalidArgument("Bipartition: subset must be proper");
    if (m.front() != 0) {
        std::vector<int> c;
        for (int p = 0; p < n_parties; ++p)
            if (!std::binary_search(m.begin(), m.end(), p)) c.push_back(p);
        m = std::move(c);
    }
    members_ = std::move(m);
}

std::vector<int> Bipartition::complement() const {
    std::vector<int> c;
    for (int p = 0; p < n_parties_; ++p)
        if (!contains(p)) c.push_back(p);
    return c;
}

bool Bipartition::contains(int party) const {
    return std::binary_search(members_.begin(), members_.end(), party);
}

std::vector<Bipartition> Bipartition::all(int n_parties) {
    if (n_parties < 2) throw InvalidArgument("Bipartition::all: need at least two parties");
    if (n_parties > 30) throw ResourceLimit("Bipartition::all: too many parties");
    std::vector<Bipartition> out;
    const std::uint32_t full = (1u << n_parties) - 1;
    for (std::uint32_t mask = 1; mask < full; mask += 2) {
        std::vector<int> m;
        for (int p = 0; p < n_parties; ++p)
            if (mask & (1u << p)) m.push_back(p);
        out.emplace_back(std::move(m), n_parties);
    }
    return out;
}

QuantumState QuantumState::pure(PartyLayout layout, CVector amplitudes) {
    if (amplitudes.size() != layout.total_dim())
        throw InvalidArgument("QuantumState::pure: amplitude count does not match layout");
    const double norm = amplitudes.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) throw InvalidArgument("QuantumState::pure: zero or non-finite norm");
    amplitudes /= norm;
    return QuantumState(std::move(layout), std::move(amplitudes));
}

QuantumState QuantumState::mixed(PartyLayout layout, CMatrix rho) {
    if (rho.rows() != layout.total_dim() || rho.cols() != layout.total_dim())
        throw InvalidArgument("QuantumState::mixed: matrix size does not match layout");
    rho = hermitian_part(rho);
    const double tr = rho.trace().real();
    if (std::abs(tr - 1.0) > 1e-8) throw InvalidArgument("QuantumState::mixed: trace differs from 1");
    rho /= tr;
    if (hermitian_eigenvalues(rho)(0) < -1e-9)
        throw InvalidArgument("QuantumState::mixed: matrix is not positive semidefinite");
    return QuantumState(std::move(layout), std::move(rho));
}

const CVector& QuantumState::amplitudes() const {
    if (!is_pure()) throw InvalidArgument("QuantumState: state is mixed");
    return std::get<CVector>(repr_);
}

CMatrix QuantumState::density_matrix() const {
    if (is_pure()) {
        const auto& v = std::get<CVector>(repr_);
        return v * v.adjoint();
    }
    return std::get<CMatrix>(repr_);
}

CMatrix hermitian_part(const CMatrix& a, double tol) {
    if (a.rows() != a.cols()) throw InvalidArgument("hermitian_part: matrix is not square");
    const double asym = (a - a.adjoint()).cwiseAbs().maxCoeff();
    if (asym > tol) throw InvalidArgument("matrix is not Hermitian (asymmetry " + std::to_string(asym) + ")");
    return (a + a.adjoint()) * 0.5;
}

CMatrix partial_trace(const QuantumState& state, std::span<const int> keep) {
    const auto& layout = state.layout();
    const auto kept = checked_subset(keep, layout.n_parties(), false, "partial_trace");
    if (!state.is_pure()) return partial_trace(state.density_matrix(), layout, kept);

    const auto split = split_indices(layout, kept);
    CMatrix psi = CMatrix::Zero(split.inner_dim, split.outer_dim);
    const auto& amp = state.amplitudes();
    for (std::int64_t f = 0; f < layout.total_dim(); ++f) psi(split.inner[f], split.outer[f]) = amp(f);
    CMatrix out = psi * psi.adjoint();
    return (out + out.adjoint()) * 0.5;
}

CMatrix partial_trace(const CMatrix& rho, const PartyLayout& layout, std::span<const int> keep) {
    if (rho.rows() != layout.total_dim() || rho.cols() != layout.total_dim())
        throw InvalidArgument("partial_trace: matrix size does not match layout");
    const auto kept = checked_subset(keep, layout.n_parties(), false, "partial_trace");
    const auto split = split_indices(layout, kept);

    // rows[t][k] = full index with traced part t and kept part k
    std::vector<std::vector<std::int64_t>> rows(split.outer_dim, std::vector<std::int64_t>(split.inner_dim));
    for (std::int64_t f = 0; f < layout.total_dim(); ++f) rows[split.outer[f]][split.inner[f]] = f;

    CMatrix out = CMatrix::Zero(split.inner_dim, split.inner_dim);
    for (const auto& idx : rows)
        for (std::int64_t j = 0; j < split.inner_dim; ++j)
            for (std::int64_t i = 0; i < split.inner_dim; ++i) out(i, j) += rho(idx[i], idx[j]);
    return out;
}

CMatrix partial_transpose(const CMatrix& m, const PartyLayout& layout, std::span<const int> subset) {
    if (m.rows() != layout.total_dim() || m.cols() != layout.total_dim())
        throw InvalidArgument("partial_transpose: matrix size does not match layout");
    const auto sub = checked_subset(subset, layout.n_parties(), true, "partial_transpose");
    const auto& dims = layout.dims();
    const auto strides = strides_of(dims);
    const std::int64_t d = layout.total_dim();

    std::vector<std::int64_t> part(d, 0);
    for (std::int64_t f = 0; f < d; ++f)
        for (int p : sub) part[f] += ((f / strides[p]) % dims[p]) * strides[p];

    CMatrix out(d, d);
    for (std::int64_t c = 0; c < d; ++c)
        for (std::int64_t r = 0; r < d; ++r) {
            const std::int64_t r2 = r - part[r] + part[c];
            const std::int64_t c2 = c - part[c] + part[r];
            out(r2, c2) = m(r, c);
        }
    return out;
}

PptResult is_ppt(const CMatrix& m, const PartyLayout& layout, const Bipartition& cut, double tol) {
    if (tol < 0) throw InvalidArgument("is_ppt: negative tolerance");
    if (cut.n_parties() != layout.n_parties()) throw InvalidArgument("is_ppt: bipartition does not match layout");
    const CMatrix h = hermitian_part(m);
    const double lmin = hermitian_eigenvalues(partial_transpose(h, layout, cut.members()))(0);
    return {lmin >= -tol, lmin};
}

const Eigen::Matrix2cd& pauli_matrix(int index) {
    static const std::array<Eigen::Matrix2cd, 4> paulis = [] {
        std::array<Eigen::Matrix2cd, 4> p;
        const Complex i(0, 1);
        p[0] << 1, 0, 0, 1;
        p[1] << 0, 1, 1, 0;
        p[2] << 0, -i, i, 0;
        p[3] << 1, 0, 0, -1;
        return p;
    }();
    if (index < 0 || index > 3) throw InvalidArgument("pauli_matrix: index must be in 0..3");
    return paulis[index];
}

std::vector<PauliEntry> pauli_string_entries(std::span<const int> indices) {
    const int n = static_cast<int>(indices.size());
    if (n > 30) throw ResourceLimit("pauli_string_entries: too many qubits");
    std::uint64_t flip = 0;
    for (int k = 0; k < n; ++k) {
        if (indices[k] < 0 || indices[k] > 3) throw InvalidArgument("Pauli index must be in 0..3");
        if (indices[k] == 1 || indices[k] == 2) flip |= std::uint64_t{1} << (n - 1 - k);
    }
    const std::int64_t d = std::int64_t{1} << n;
    std::vector<PauliEntry> out;
    out.reserve(d);
    for (std::int64_t col = 0; col < d; ++col) {
        Complex v(1, 0);
        for (int k = 0; k < n; ++k) {
            const int bit = (col >> (n - 1 - k)) & 1;
            switch (indices[k]) {
                case 2: v *= bit ? Complex(0, -1) : Complex(0, 1); break;
                case 3: if (bit) v = -v; break;
                default: break;
            }
        }
        out.push_back({static_cast<std::int64_t>(col ^ flip), col, v});
    }
    return out;
}

CMatrix pauli_string(std::span<const int> indices) {
    const std::int64_t d = std::int64_t{1} << indices.size();
    CMatrix out = CMatrix::Zero(d, d);
    for (const auto& e : pauli_string_entries(indices)) out(e.row, e.col) = e.value;
    return out;
}

CMatrix pauli_operator(const PauliTerm& term, const PartyLayout& layout) {
    const auto [a, b] = term.edge;
    const int n = layout.n_parties();
    if (a < 0 || b < 0 || a >= n || b >= n || a == b) throw InvalidArgument("pauli_operator: invalid edge");
    if (layout.dim(a) != 2 || layout.dim(b) != 2) throw InvalidArgument("pauli_operator: edge parties must be qubits");
    pauli_matrix(term.indices.first);
    pauli_matrix(term.indices.second);

    CMatrix out = CMatrix::Identity(1, 1);
    for (int p = 0; p < n; ++p) {
        CMatrix factor;
        if (p == a)
            factor = pauli_matrix(term.indices.first);
        else if (p == b)
            factor = pauli_matrix(term.indices.second);
        else
            factor = CMatrix::Identity(layout.dim(p), layout.dim(p));
        out = kron(out, factor);
    }
    return out;
}

QuantumState random_pure_state(const PartyLayout& layout, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    CVector v(layout.total_dim());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        v(i) = Complex(re, im);
    }
    return QuantumState::pure(layout, std::move(v));
}

RVector schmidt_coefficients(const QuantumState& state, const Bipartition& cut) {
    if (!state.is_pure()) throw InvalidArgument("schmidt_rank: state must be pure");
    if (cut.n_parties() != state.layout().n_parties())
        throw InvalidArgument("schmidt_rank: bipartition does not match layout");
    const auto split = split_indices(state.layout(), cut.members());
    CMatrix psi(split.inner_dim, split.outer_dim);
    const auto& amp = state.amplitudes();
    for (std::int64_t f = 0; f < state.layout().total_dim(); ++f) psi(split.inner[f], split.outer[f]) = amp(f);
    Eigen::BDCSVD<CMatrix> svd(psi);
    RVector out = svd.singularValues();
    return out;
}

int schmidt_rank(const QuantumState& state, const Bipartition& cut, double tol) {
    const RVector s = schmidt_coefficients(state, cut);
    return static_cast<int>((s.array() > tol).count());
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

CVector kron(const CVector& a, const CVector& b) {
    CVector out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
    return out;
}

RVector hermitian_eigenvalues(const CMatrix& h) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw SolverFailure("Hermitian eigensolver did not converge");
    return es.eigenvalues();
}

}  // namespace sepmarg
