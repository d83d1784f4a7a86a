#include <cmath>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "sepmarg/certification.hpp"
#include "sepmarg/state_io.hpp"

using namespace sepmarg;

namespace {

QuantumState fixture(const char* name) {
    return load_state(std::filesystem::path(SEPMARG_FIXTURE_DIR) / name);
}

QuantumState from_amplitudes(int n, std::initializer_list<std::pair<int, Complex>> entries) {
    CVector v = CVector::Zero(1 << n);
    for (auto [i, a] : entries) v(i) = a;
    return QuantumState::pure(PartyLayout::qubits(n), v);
}

QuantumState ghz3() { return from_amplitudes(3, {{0, 1.0}, {7, 1.0}}); }
QuantumState w3() { return from_amplitudes(3, {{1, 1.0}, {2, 1.0}, {4, 1.0}}); }

LocalUnitary random_lu(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    LocalUnitary lu;
    for (int q = 0; q < n; ++q) lu.params.push_back({u(rng), u(rng), u(rng)});
    return lu;
}

const MarginalConfiguration star4(4, {{0, 1}, {1, 2}, {1, 3}});

}  // namespace

TEST_CASE("GHZ3 marginals are separable, W3 marginals are not") {
    const auto g = check_all_marginals_separable(ghz3());
    CHECK(g.pairs.size() == 3);
    CHECK(g.all_ppt);
    CHECK(g.all_separable);
    for (const auto& p : g.pairs) CHECK(p.min_eigenvalue == doctest::Approx(0.0).scale(1.0));

    // W3 pair marginal (|00><00| + 2|psi+><psi+|)/3 has PT spectrum
    // {1/3, 1/3, (1 +- sqrt 5)/6}.
    const auto w = check_all_marginals_separable(w3());
    CHECK(!w.all_ppt);
    for (const auto& p : w.pairs) {
        CHECK(!p.ppt);
        CHECK(p.ppt_implies_separable);
        CHECK(p.min_eigenvalue == doctest::Approx((1.0 - std::sqrt(5.0)) / 6.0).epsilon(1e-12));
    }
}

TEST_CASE("fixture marginal report matches a direct computation") {
    const auto s = fixture("psi4b.state.json");
    const auto rep = check_all_marginals_separable(s);
    REQUIRE(rep.pairs.size() == 6);
    const CMatrix rho = s.density_matrix();
    for (const auto& p : rep.pairs) {
        // Marginal by explicit summation over the other two qubits.
        CMatrix m = CMatrix::Zero(4, 4);
        for (int r = 0; r < 16; ++r)
            for (int c = 0; c < 16; ++c) {
                const int ra = r >> (3 - p.a) & 1, rb = r >> (3 - p.b) & 1;
                const int ca = c >> (3 - p.a) & 1, cb = c >> (3 - p.b) & 1;
                const int rest_mask = 15 & ~(1 << (3 - p.a)) & ~(1 << (3 - p.b));
                if ((r & rest_mask) != (c & rest_mask)) continue;
                // Transpose party a directly while accumulating.
                m(ca * 2 + rb, ra * 2 + cb) += rho(r, c);
            }
        const double direct = hermitian_eigenvalues(m)(0);
        CHECK(p.min_eigenvalue == doctest::Approx(direct).epsilon(1e-12).scale(1.0));
        CHECK(p.ppt == (direct >= -1e-9));
    }
}

TEST_CASE("robustness follows the affine noise law") {
    // Tr(W 1) is fixed for every feasible W, so the optimal value is exactly
    // affine in the noise weight: v(p) = (1 - p) v(0) + p 2^-N.
    const auto s = fixture("psi4b.state.json");
    const auto r = noise_robustness(s, star4, 1e-9, 24);
    const double v0 = r.value_at_zero;
    REQUIRE(v0 < 0.0);
    const double p_star = -v0 / (1.0 / 16 - v0);
    CHECK(r.p_max == doctest::Approx(p_star).epsilon(1e-4));
    CHECK(r.warning.empty());
    const double p = 0.5 * p_star;
    CMatrix noisy = (1 - p) * s.density_matrix() + p * CMatrix::Identity(16, 16) / 16.0;
    const double vp = detection_value(QuantumState::mixed(s.layout(), noisy), star4);
    CHECK(vp == doctest::Approx((1 - p) * v0 + p / 16).epsilon(1e-6));
}

TEST_CASE("undetected states have zero robustness") {
    const auto r = noise_robustness(ghz3(), parse_configuration("0-1,1-2"));
    CHECK(r.p_max == 0.0);
    CHECK(r.value_at_zero >= -1e-7);
}

TEST_CASE("uniqueness against a witness with a known ground state") {
    // W = 1/4 + a (-XX + YY - ZZ): ground state |Phi+> at 1/4 - 3a, gap 4a.
    const double a = 0.05;
    Witness w{PartyLayout::qubits(2), parse_configuration("0-1"), 0.25, {}};
    w.coeffs[{{0, 1}, {1, 1}}] = -a;
    w.coeffs[{{0, 1}, {2, 2}}] = a;
    w.coeffs[{{0, 1}, {3, 3}}] = -a;
    const auto bell = from_amplitudes(2, {{0, 1.0}, {3, 1.0}});
    const auto u = uniqueness_check(bell, w);
    CHECK(u.unique);
    CHECK(u.gap == doctest::Approx(4 * a));
    CHECK(u.ground_energy == doctest::Approx(0.25 - 3 * a));
    CHECK(u.overlap == doctest::Approx(1.0));
    const auto prod = from_amplitudes(2, {{0, 1.0}});
    const auto v = uniqueness_check(prod, w);
    CHECK(!v.unique);
    CHECK(v.overlap == doctest::Approx(0.5));

    const Witness flat{PartyLayout::qubits(2), parse_configuration("0-1"), 0.25, {}};
    CHECK(!uniqueness_check(bell, flat).unique);
    const auto mixed = QuantumState::mixed(PartyLayout::qubits(2), CMatrix::Identity(4, 4) / 4.0);
    CHECK_THROWS_AS(uniqueness_check(mixed, w), InvalidArgument);
}

TEST_CASE("local unitaries") {
    for (int k = 0; k < 10; ++k) {
        const auto lu = random_lu(1, 100 + k);
        const auto& p = lu.params[0];
        const Eigen::Matrix2cd f = LocalUnitary::factor(p[0], p[1], p[2]);
        CHECK((f.adjoint() * f - Eigen::Matrix2cd::Identity()).norm() < 1e-14);
        CHECK(std::abs(f.determinant() - 1.0) < 1e-14);
    }
    const auto lu = random_lu(3, 7);
    const CMatrix m = lu.matrix();
    const CMatrix expected = kron(kron(CMatrix(LocalUnitary::factor(lu.params[0][0], lu.params[0][1], lu.params[0][2])),
                                       CMatrix(LocalUnitary::factor(lu.params[1][0], lu.params[1][1], lu.params[1][2]))),
                                  CMatrix(LocalUnitary::factor(lu.params[2][0], lu.params[2][1], lu.params[2][2])));
    CHECK((m - expected).norm() < 1e-13);

    const auto s = random_pure_state(PartyLayout::qubits(3), 2);
    const auto same = apply_local_unitary(s, LocalUnitary::identity(3));
    CHECK((same.amplitudes() - s.amplitudes()).norm() < 1e-15);
    const auto moved = apply_local_unitary(s, lu);
    CHECK((moved.amplitudes() - m.adjoint() * s.amplitudes()).norm() < 1e-13);

    const auto zero = from_amplitudes(3, {{0, 1.0}});
    const auto rotated = apply_local_unitary(zero, lu);
    for (const auto& cut : Bipartition::all(3)) CHECK(schmidt_rank(rotated, cut) == 1);
    CHECK_THROWS_AS(apply_local_unitary(s, LocalUnitary::identity(2)), InvalidArgument);
}

TEST_CASE("detection value is invariant under local unitaries") {
    const auto s = fixture("psi4b.state.json");
    const double v = detection_value(s, star4);
    for (std::uint64_t seed : {1, 2}) {
        const auto t = apply_local_unitary(s, random_lu(4, seed));
        CHECK(std::abs(detection_value(t, star4) - v) < 2e-8);
    }
}

TEST_CASE("zero-pattern simplification") {
    const auto zero = from_amplitudes(4, {{0, 1.0}});
    const auto r = simplify_zero_pattern(zero);
    CHECK(r.initial_zero_count == 15);
    CHECK(r.zero_count == 15);

    const auto bell = from_amplitudes(2, {{0, 1.0}, {3, 1.0}});
    const auto scrambled = apply_local_unitary(bell, random_lu(2, 11));
    REQUIRE(count_zero_amplitudes(scrambled) == 0);
    const auto b = simplify_zero_pattern(scrambled);
    CHECK(b.zero_count >= 2);
    CHECK(count_zero_amplitudes(b.state) == b.zero_count);
    const auto replay = apply_local_unitary(scrambled, b.lu);
    CHECK(std::abs(std::abs(replay.amplitudes().dot(b.state.amplitudes())) - 1.0) < 1e-12);
}

TEST_CASE("certification of a state-step output") {
    // The state step returns marginals that are PPT by construction.
    const auto w = optimal_witness(fixture("psi4b.state.json"), star4).witness;
    const auto s = optimal_state(w).state;
    const auto rep = certify(s, star4);
    CHECK(rep.marginals.all_separable);
    CHECK(rep.witness_value < -3.0e-3);
    CHECK(rep.certificate.valid);
    CHECK(rep.certified());
    const auto j = report_to_json(rep);
    CHECK(j.contains("witness_value"));
    CHECK(j.contains("marginals"));
}

TEST_CASE("weak duality held at every iterate of every solve above") {
    const auto st = sdp::solve_statistics();
    CHECK(st.solves > 0);
    CHECK(st.weak_duality_violations == 0);
}
