#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "sepmarg/errors.hpp"

// Dense complex linear algebra over multi-party Hilbert spaces.
//
// Index convention: party 0 is the most significant tensor factor, so for
// qubits the basis index of |b_0 b_1 ... b_{n-1}> is sum_k b_k 2^(n-1-k).
namespace sepmarg {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

class PartyLayout {
  public:
    PartyLayout() = default;
    explicit PartyLayout(std::vector<int> dims);
    static PartyLayout qubits(int n);

    int n_parties() const { return static_cast<int>(dims_.size()); }
    int dim(int party) const { return dims_.at(party); }
    const std::vector<int>& dims() const { return dims_; }
    std::int64_t total_dim() const { return total_; }
    bool all_qubits() const;
    std::int64_t dim_of(std::span<const int> parties) const;

    bool operator==(const PartyLayout&) const = default;

  private:
    std::vector<int> dims_;
    std::int64_t total_ = 1;
};

// Non-empty proper subset of parties. The stored set always contains party 0,
// so M|M' and M'|M have one representative.
class Bipartition {
  public:
    Bipartition(std::vector<int> members, int n_parties);

    const std::vector<int>& members() const { return members_; }
    std::vector<int> complement() const;
    int n_parties() const { return n_parties_; }
    bool contains(int party) const;

    // All 2^(n-1) - 1 canonical bipartitions, ordered by member bitmask.
    static std::vector<Bipartition> all(int n_parties);

    bool operator==(const Bipartition&) const = default;

  private:
    std::vector<int> members_;
    int n_parties_ = 0;
};

struct PauliTerm {
    std::pair<int, int> edge;     // (alpha, beta), alpha != beta
    std::pair<int, int> indices;  // Pauli index on alpha and on beta, 0 = identity
};

class QuantumState {
  public:
    QuantumState() = default;  // empty placeholder with no parties
    // Normalizes the vector; throws on zero norm or length mismatch.
    static QuantumState pure(PartyLayout layout, CVector amplitudes);
    // Validates Hermiticity/trace/positivity (symmetrizes small asymmetry).
    static QuantumState mixed(PartyLayout layout, CMatrix rho);

    const PartyLayout& layout() const { return layout_; }
    bool is_pure() const { return std::holds_alternative<CVector>(repr_); }
    const CVector& amplitudes() const;
    CMatrix density_matrix() const;

  private:
    QuantumState(PartyLayout layout, std::variant<CVector, CMatrix> repr)
        : layout_(std::move(layout)), repr_(std::move(repr)) {}

    PartyLayout layout_;
    std::variant<CVector, CMatrix> repr_;
};

// Hermitian part (A + A^dagger)/2, rejecting inputs whose asymmetry exceeds tol.
CMatrix hermitian_part(const CMatrix& a, double tol = 1e-10);

CMatrix partial_trace(const QuantumState& state, std::span<const int> keep);
CMatrix partial_trace(const CMatrix& rho, const PartyLayout& layout, std::span<const int> keep);

CMatrix partial_transpose(const CMatrix& m, const PartyLayout& layout, std::span<const int> subset);

struct PptResult {
    bool ppt = false;
    double min_eigenvalue = 0.0;
};

PptResult is_ppt(const CMatrix& m, const PartyLayout& layout, const Bipartition& cut, double tol);

// sigma_0..sigma_3 = 1, X, Y, Z.
const Eigen::Matrix2cd& pauli_matrix(int index);

CMatrix pauli_operator(const PauliTerm& term, const PartyLayout& layout);

// Pauli string on an all-qubit layout, one index (0..3) per party.
CMatrix pauli_string(std::span<const int> indices);

// Nonzeros of a qubit Pauli string: exactly one per column.
struct PauliEntry {
    std::int64_t row;
    std::int64_t col;
    Complex value;
};
std::vector<PauliEntry> pauli_string_entries(std::span<const int> indices);

QuantumState random_pure_state(const PartyLayout& layout, std::uint64_t seed);

int schmidt_rank(const QuantumState& state, const Bipartition& cut, double tol = 1e-10);

// Singular values of the amplitude vector reshaped across the cut.
RVector schmidt_coefficients(const QuantumState& state, const Bipartition& cut);

// Kronecker product with the first argument as the more significant factor.
CMatrix kron(const CMatrix& a, const CMatrix& b);
CVector kron(const CVector& a, const CVector& b);

// Eigenvalues of a Hermitian matrix in ascending order.
RVector hermitian_eigenvalues(const CMatrix& h);

}  // namespace sepmarg
