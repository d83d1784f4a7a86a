#include "sepmarg/certification.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <random>

namespace sepmarg {

MarginalReport check_all_marginals_separable(const QuantumState& state, double tol) {
    const auto& layout = state.layout();
    const int n = layout.n_parties();
    MarginalReport rep;
    rep.all_ppt = true;
    rep.all_separable = true;
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
            const std::vector<int> keep{a, b};
            const PartyLayout two({layout.dim(a), layout.dim(b)});
            const auto r = is_ppt(partial_trace(state, keep), two, Bipartition({0}, 2), tol);
            PairMargin pm{a, b, r.min_eigenvalue, r.ppt, layout.dim(a) * layout.dim(b) <= 6};
            rep.all_ppt = rep.all_ppt && pm.ppt;
            rep.all_separable = rep.all_separable && pm.ppt && pm.ppt_implies_separable;
            rep.pairs.push_back(pm);
        }
    return rep;
}

double detection_value(const QuantumState& state, const MarginalConfiguration& config,
                       const sdp::SolverOptions& opts) {
    return optimal_witness(state, config, opts).value;
}

RobustnessResult noise_robustness(const QuantumState& state, const MarginalConfiguration& config, double tol,
                                  int bisection_steps, const sdp::SolverOptions& opts) {
    RobustnessResult res;
    const CMatrix rho = state.density_matrix();
    const auto d = rho.rows();
    auto value_at = [&](double p) {
        ++res.probes;
        const CMatrix mixed = (1.0 - p) * rho + p * CMatrix::Identity(d, d) / static_cast<double>(d);
        return detection_value(QuantumState::mixed(state.layout(), mixed), config, opts);
    };
    res.value_at_zero = value_at(0.0);
    if (!(res.value_at_zero < -tol)) return res;
    if (value_at(1.0) < -tol) {
        res.p_max = 1.0;
        res.warning = "still detected at p = 1; bisection not bracketed";
        return res;
    }
    double lo = 0.0, hi = 1.0;
    for (int k = 0; k < bisection_steps; ++k) {
        const double mid = 0.5 * (lo + hi);
        (value_at(mid) < -tol ? lo : hi) = mid;
    }
    res.p_max = lo;
    return res;
}

UniquenessResult uniqueness_check(const QuantumState& state, const Witness& witness) {
    if (!state.is_pure()) throw InvalidArgument("uniqueness_check needs a pure state");
    Eigen::SelfAdjointEigenSolver<CMatrix> es(expand_witness(witness));
    const auto& ev = es.eigenvalues();
    UniquenessResult r;
    r.ground_energy = ev(0);
    r.gap = ev.size() > 1 ? ev(1) - ev(0) : 0.0;
    r.overlap = std::norm(es.eigenvectors().col(0).dot(state.amplitudes()));
    r.unique = r.gap >= kUniquenessGap && r.overlap >= kUniquenessOverlap;
    return r;
}

LocalUnitary LocalUnitary::identity(int n_qubits) { return {std::vector<std::array<double, 3>>(n_qubits, {0, 0, 0})}; }

Eigen::Matrix2cd LocalUnitary::factor(double alpha, double theta, double phi) {
    const Complex i(0.0, 1.0);
    Eigen::Matrix2cd u;
    u << std::exp(i * alpha) * std::cos(phi), std::exp(i * theta) * std::sin(phi),
        -std::exp(-i * theta) * std::sin(phi), std::exp(-i * alpha) * std::cos(phi);
    return u;
}

CMatrix LocalUnitary::matrix() const {
    CMatrix u = CMatrix::Identity(1, 1);
    for (const auto& [a, t, f] : params) u = kron(u, CMatrix(factor(a, t, f)));
    return u;
}

namespace {

// U^dagger psi with U a product of 2x2 factors, one qubit at a time.
CVector apply_product_adjoint(const CVector& psi, const std::vector<Eigen::Matrix2cd>& factors) {
    CVector out = psi;
    const int n = static_cast<int>(factors.size());
    const std::int64_t dim = psi.size();
    for (int q = 0; q < n; ++q) {
        const Eigen::Matrix2cd ua = factors[q].adjoint();
        const std::int64_t stride = std::int64_t{1} << (n - 1 - q);
        for (std::int64_t base = 0; base < dim; ++base) {
            if (base & stride) continue;
            const Complex x0 = out(base), x1 = out(base + stride);
            out(base) = ua(0, 0) * x0 + ua(0, 1) * x1;
            out(base + stride) = ua(1, 0) * x0 + ua(1, 1) * x1;
        }
    }
    return out;
}

std::vector<Eigen::Matrix2cd> factors_of(const LocalUnitary& lu) {
    std::vector<Eigen::Matrix2cd> f;
    for (const auto& [a, t, p] : lu.params) f.push_back(LocalUnitary::factor(a, t, p));
    return f;
}

struct SimplifyData {
    const CVector* psi;
    int n;
};

// l1 norm of the transformed amplitudes: a smooth-ish sparsity surrogate.
double l1_objective(const gsl_vector* v, void* params) {
    const auto* data = static_cast<const SimplifyData*>(params);
    std::vector<Eigen::Matrix2cd> f;
    for (int q = 0; q < data->n; ++q)
        f.push_back(LocalUnitary::factor(gsl_vector_get(v, 3 * q), gsl_vector_get(v, 3 * q + 1),
                                         gsl_vector_get(v, 3 * q + 2)));
    return apply_product_adjoint(*data->psi, f).cwiseAbs().sum();
}

}  // namespace

QuantumState apply_local_unitary(const QuantumState& state, const LocalUnitary& lu) {
    const auto& layout = state.layout();
    if (!layout.all_qubits() || static_cast<int>(lu.params.size()) != layout.n_parties())
        throw InvalidArgument("local unitary arity does not match the qubit layout");
    if (state.is_pure()) return QuantumState::pure(layout, apply_product_adjoint(state.amplitudes(), factors_of(lu)));
    const CMatrix u = lu.matrix();
    return QuantumState::mixed(layout, u.adjoint() * state.density_matrix() * u);
}

int count_zero_amplitudes(const QuantumState& state, double threshold) {
    if (!state.is_pure()) throw InvalidArgument("zero pattern needs a pure state");
    return static_cast<int>((state.amplitudes().array().abs() < threshold).count());
}

SimplifyResult simplify_zero_pattern(const QuantumState& state, const SimplifyOptions& opts) {
    if (!state.is_pure() || !state.layout().all_qubits())
        throw InvalidArgument("simplify_zero_pattern needs a pure qubit state");
    const int n = state.layout().n_parties();
    SimplifyResult best{state, LocalUnitary::identity(n), 0, 0};
    best.initial_zero_count = best.zero_count = count_zero_amplitudes(state, opts.zero_threshold);

    SimplifyData data{&state.amplitudes(), n};
    gsl_multimin_function fn{&l1_objective, static_cast<std::size_t>(3 * n), &data};
    const auto dim = static_cast<std::size_t>(3 * n);
    gsl_vector* x = gsl_vector_alloc(dim);
    gsl_vector* step = gsl_vector_alloc(dim);
    gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, dim);
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> angle(-M_PI, M_PI);

    for (int r = 0; r < opts.restarts; ++r) {
        for (std::size_t k = 0; k < dim; ++k) gsl_vector_set(x, k, r == 0 ? 0.0 : angle(rng));
        gsl_vector_set_all(step, 0.5);
        gsl_multimin_fminimizer_set(s, &fn, x, step);
        for (int it = 0; it < opts.max_evaluations; ++it) {
            if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS) break;
            if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), 1e-12) == GSL_SUCCESS) break;
        }
        LocalUnitary lu;
        for (int q = 0; q < n; ++q)
            lu.params.push_back({gsl_vector_get(s->x, 3 * q), gsl_vector_get(s->x, 3 * q + 1),
                                 gsl_vector_get(s->x, 3 * q + 2)});
        QuantumState out = apply_local_unitary(state, lu);
        const int zeros = count_zero_amplitudes(out, opts.zero_threshold);
        if (zeros > best.zero_count) {
            best = {std::move(out), std::move(lu), zeros, best.initial_zero_count};
        }
    }
    gsl_multimin_fminimizer_free(s);
    gsl_vector_free(step);
    gsl_vector_free(x);
    return best;
}

CertificationReport certify(const QuantumState& state, const MarginalConfiguration& config,
                            const CertifyOptions& opts) {
    CertificationReport rep;
    rep.marginals = check_all_marginals_separable(state);
    const auto wr = optimal_witness(state, config, opts.solver);
    rep.witness_value = wr.value;
    rep.certificate = verify_certificate(wr.witness, wr.certificate);
    if (state.is_pure()) {
        rep.uniqueness_checked = true;
        rep.uniqueness = uniqueness_check(state, wr.witness);
    }
    if (opts.robustness) {
        rep.robustness_checked = true;
        rep.robustness = noise_robustness(state, config, 1e-9, 40, opts.solver);
    }
    return rep;
}

nlohmann::json report_to_json(const CertificationReport& r) {
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& p : r.marginals.pairs)
        pairs.push_back({{"pair", {p.a, p.b}},
                         {"min_pt_eigenvalue", p.min_eigenvalue},
                         {"ppt", p.ppt},
                         {"ppt_implies_separable", p.ppt_implies_separable}});
    nlohmann::json j = {
        {"marginals", {{"pairs", pairs}, {"all_ppt", r.marginals.all_ppt}, {"all_separable", r.marginals.all_separable}}},
        {"witness_value", r.witness_value},
        {"certificate",
         {{"valid", r.certificate.valid},
          {"complete", r.certificate.complete},
          {"min_eigenvalue_P", r.certificate.min_eigenvalue_P},
          {"min_eigenvalue_Q", r.certificate.min_eigenvalue_Q},
          {"max_residual", r.certificate.max_residual}}},
        {"certified", r.certified()}};
    if (r.uniqueness_checked)
        j["uniqueness"] = {{"unique", r.uniqueness.unique},
                           {"ground_energy", r.uniqueness.ground_energy},
                           {"gap", r.uniqueness.gap},
                           {"overlap", r.uniqueness.overlap}};
    if (r.robustness_checked) {
        j["robustness"] = {{"p_max", r.robustness.p_max},
                           {"value_at_zero", r.robustness.value_at_zero},
                           {"probes", r.robustness.probes}};
        if (!r.robustness.warning.empty()) j["robustness"]["warning"] = r.robustness.warning;
    }
    return j;
}

}  // namespace sepmarg
