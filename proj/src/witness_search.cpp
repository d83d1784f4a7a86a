#include "sepmarg/witness_search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sepmarg/state_io.hpp"

namespace sepmarg {
namespace {

using sdp::SdpProblem;

void require_qubits(const PartyLayout& layout, const char* what) {
    if (!layout.all_qubits()) throw Unsupported(std::string(what) + " requires every party to be a qubit");
}

std::vector<int> term_indices(int n, Edge e, int i, int j) {
    std::vector<int> idx(n, 0);
    idx[e.first] = i;
    idx[e.second] = j;
    return idx;
}

// Pauli terms of the witness parametrization. Single-body directions on a
// party are attached to the first edge containing it only, so the Pauli
// strings of distinct terms are distinct and the SDP has no redundant variables.
std::vector<Witness::Key> witness_terms(const MarginalConfiguration& config) {
    const int n = config.n_parties();
    std::vector<int> first_edge(n, -1);
    const auto& edges = config.edges();
    for (int k = 0; k < static_cast<int>(edges.size()); ++k) {
        if (first_edge[edges[k].first] < 0) first_edge[edges[k].first] = k;
        if (first_edge[edges[k].second] < 0) first_edge[edges[k].second] = k;
    }
    std::vector<Witness::Key> keys;
    for (int k = 0; k < static_cast<int>(edges.size()); ++k) {
        const auto [a, b] = edges[k];
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                if (i == 0 && j == 0) continue;
                if (j == 0 && first_edge[a] != k) continue;
                if (i == 0 && first_edge[b] != k) continue;
                keys.push_back({edges[k], {i, j}});
            }
    }
    return keys;
}

double pauli_expectation(const std::vector<int>& idx, const QuantumState& state) {
    const auto entries = pauli_string_entries(idx);
    Complex s = 0.0;
    if (state.is_pure()) {
        const CVector& psi = state.amplitudes();
        for (const auto& e : entries) s += std::conj(psi(e.row)) * e.value * psi(e.col);
    } else {
        const CMatrix rho = state.density_matrix();
        for (const auto& e : entries) s += e.value * rho(e.col, e.row);
    }
    return s.real();
}

// Basis-state index with the digits of the parties in `mask` exchanged
// between row and column: |r><c|^{T_M} = |r'><c'|.
std::pair<std::int64_t, std::int64_t> transpose_indices(std::int64_t r, std::int64_t c, std::int64_t mask) {
    return {(r & ~mask) | (c & mask), (c & ~mask) | (r & mask)};
}

std::int64_t party_mask(const std::vector<int>& parties, int n) {
    std::int64_t mask = 0;
    for (int p : parties) mask |= std::int64_t{1} << (n - 1 - p);
    return mask;
}

// Smallest t with (1 - t) A + t I/k >= 0 given lambda_min(A) = lmin.
double noise_to_fix(double lmin, double k) { return lmin >= 0.0 ? 0.0 : -lmin / (-lmin + 1.0 / k); }

double min_eigenvalue(const CMatrix& m) { return hermitian_eigenvalues(m).minCoeff(); }

}  // namespace

double Witness::coeff(Edge e, int i, int j) const {
    if (e.first > e.second) {
        std::swap(e.first, e.second);
        std::swap(i, j);
    }
    const auto it = coeffs.find({e, {i, j}});
    return it == coeffs.end() ? 0.0 : it->second;
}

std::map<std::vector<int>, double> Witness::pauli_coefficients() const {
    std::map<std::vector<int>, double> out;
    for (const auto& [key, v] : coeffs) out[term_indices(layout.n_parties(), key.first, key.second.first, key.second.second)] += v;
    return out;
}

CMatrix expand_witness(const Witness& w) {
    require_qubits(w.layout, "expand_witness");
    const auto d = w.layout.total_dim();
    CMatrix m = CMatrix::Identity(d, d) * w.identity_coeff;
    for (const auto& [idx, v] : w.pauli_coefficients()) {
        if (v == 0.0) continue;
        for (const auto& e : pauli_string_entries(idx)) m(e.row, e.col) += v * e.value;
    }
    return m;
}

double witness_expectation(const Witness& w, const QuantumState& state) {
    if (!(state.layout() == w.layout)) throw InvalidArgument("witness and state layouts differ");
    double s = w.identity_coeff;  // Tr(rho) = 1
    for (const auto& [idx, v] : w.pauli_coefficients()) s += v * pauli_expectation(idx, state);
    return s;
}

CertificateCheck verify_certificate(const Witness& w, const DecompositionCertificate& cert, double psd_tol,
                                    double residual_tol) {
    CertificateCheck out;
    const int n = w.layout.n_parties();
    const auto expected = Bipartition::all(n);
    out.complete = cert.cuts.size() == expected.size() && cert.P.size() == expected.size() &&
                   cert.Q.size() == expected.size();
    for (const auto& cut : expected)
        if (std::find(cert.cuts.begin(), cert.cuts.end(), cut) == cert.cuts.end()) out.complete = false;
    const CMatrix W = expand_witness(w);
    out.min_eigenvalue_P = std::numeric_limits<double>::infinity();
    out.min_eigenvalue_Q = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < std::min({cert.cuts.size(), cert.P.size(), cert.Q.size()}); ++k) {
        out.min_eigenvalue_P = std::min(out.min_eigenvalue_P, min_eigenvalue(hermitian_part(cert.P[k], 1e-8)));
        out.min_eigenvalue_Q = std::min(out.min_eigenvalue_Q, min_eigenvalue(hermitian_part(cert.Q[k], 1e-8)));
        const CMatrix qt = partial_transpose(cert.Q[k], w.layout, cert.cuts[k].members());
        const CMatrix r = W - cert.P[k] - qt;
        Eigen::JacobiSVD<CMatrix> svd(r);
        out.max_residual = std::max(out.max_residual, svd.singularValues()(0));
    }
    out.valid = out.complete && out.min_eigenvalue_P >= -psd_tol && out.min_eigenvalue_Q >= -psd_tol &&
                out.max_residual <= residual_tol;
    return out;
}

// Variables: the witness coefficients, then for every cut the real
// parameters of Q_M (diagonal, then real and imaginary parts above it).
// Blocks per cut: W - Q_M^{T_M} >= 0 and Q_M >= 0. The constant 2^-N of
// Tr(W rho) is left out of the objective.
SdpProblem witness_problem(const QuantumState& state, const MarginalConfiguration& config) {
    const auto& layout = state.layout();
    require_qubits(layout, "optimal_witness");
    const int n = layout.n_parties();
    if (config.n_parties() != n) throw InvalidArgument("configuration and state have different party counts");
    if (const auto v = is_valid(config); !v.valid) throw InvalidArgument("invalid configuration: " + v.reason);
    const int d = static_cast<int>(layout.total_dim());
    const auto keys = witness_terms(config);
    const auto cuts = Bipartition::all(n);
    const int n_omega = static_cast<int>(keys.size());
    const int per_cut = d * d;
    const int m = n_omega + static_cast<int>(cuts.size()) * per_cut;

    std::vector<int> blocks(2 * cuts.size(), 2 * d);
    SdpProblem p(blocks, m);
    for (std::size_t k = 0; k < cuts.size(); ++k)
        for (int r = 0; r < d; ++r) add_hermitian_entry(p.F[0], static_cast<int>(2 * k), d, r, r, 1.0 / d);

    for (int t = 0; t < n_omega; ++t) {
        const auto& [edge, ij] = keys[t];
        const auto idx = term_indices(n, edge, ij.first, ij.second);
        p.c(t) = pauli_expectation(idx, state);
        const auto entries = pauli_string_entries(idx);
        for (std::size_t k = 0; k < cuts.size(); ++k)
            for (const auto& e : entries)
                if (e.row <= e.col)
                    add_hermitian_entry(p.F[t + 1], static_cast<int>(2 * k), d, static_cast<int>(e.row),
                                        static_cast<int>(e.col), e.value);
    }

    for (std::size_t k = 0; k < cuts.size(); ++k) {
        const int pb = static_cast<int>(2 * k), qb = pb + 1;
        const auto mask = party_mask(cuts[k].members(), n);
        int var = n_omega + static_cast<int>(k) * per_cut + 1;
        auto add_basis = [&](int r, int c, Complex v) {
            auto& f = p.F[var++];
            add_hermitian_entry(f, qb, d, r, c, v);
            const auto [rt, ct] = transpose_indices(r, c, mask);
            add_hermitian_entry(f, pb, d, static_cast<int>(rt), static_cast<int>(ct), -v);
        };
        for (int r = 0; r < d; ++r) add_basis(r, r, 1.0);
        for (int r = 0; r < d; ++r)
            for (int c = r + 1; c < d; ++c) {
                add_basis(r, c, 1.0);
                add_basis(r, c, Complex(0.0, 1.0));
            }
    }
    p.finalize();
    return p;
}

WitnessResult optimal_witness(const QuantumState& state, const MarginalConfiguration& config,
                              const sdp::SolverOptions& opts) {
    const SdpProblem problem = witness_problem(state, config);
    WitnessResult out;
    out.solution = sdp::solve(problem, opts);
    if (out.solution.status != sdp::SolveStatus::Optimal && out.solution.status != sdp::SolveStatus::Stalled)
        throw SolverFailure("witness SDP ended with status " + std::string(sdp::status_name(out.solution.status)) +
                            " after " + std::to_string(out.solution.iterations) + " iterations");

    const auto& layout = state.layout();
    const int n = layout.n_parties();
    const int d = static_cast<int>(layout.total_dim());
    const auto keys = witness_terms(config);
    const RVector& x = out.solution.x;

    Witness& w = out.witness;
    w.layout = layout;
    w.config = config;
    w.identity_coeff = 1.0 / d;
    for (std::size_t t = 0; t < keys.size(); ++t) w.coeffs[keys[t]] = x(static_cast<Eigen::Index>(t));
    const CMatrix W = expand_witness(w);

    const auto cuts = Bipartition::all(n);
    int var = static_cast<int>(keys.size());
    for (const auto& cut : cuts) {
        CMatrix Q(d, d);
        for (int r = 0; r < d; ++r) Q(r, r) = x(var++);
        for (int r = 0; r < d; ++r)
            for (int c = r + 1; c < d; ++c) {
                Q(r, c) = Complex(x(var), x(var + 1));
                Q(c, r) = std::conj(Q(r, c));
                var += 2;
            }
        out.certificate.cuts.push_back(cut);
        out.certificate.P.push_back(W - partial_transpose(Q, layout, cut.members()));
        out.certificate.Q.push_back(std::move(Q));
    }
    out.value = witness_expectation(w, state);
    return out;
}

// Variables: expectation values of all non-identity Pauli strings,
// rho = (1 + sum_P x_P P) / 2^N. Blocks: rho and, for every pair a < b, the
// partial transpose on a of the two-body marginal (1 + sum x_P P_ab) / 4.
SdpProblem state_problem(const Witness& w) {
    require_qubits(w.layout, "optimal_state");
    const int n = w.layout.n_parties();
    const int d = static_cast<int>(w.layout.total_dim());
    const int m = d * d - 1;
    std::vector<std::pair<int, int>> pairs;
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) pairs.emplace_back(a, b);
    std::vector<int> blocks{2 * d};
    blocks.insert(blocks.end(), pairs.size(), 8);

    SdpProblem p(blocks, m);
    for (int r = 0; r < d; ++r) add_hermitian_entry(p.F[0], 0, d, r, r, 1.0 / d);
    for (std::size_t k = 0; k < pairs.size(); ++k)
        for (int r = 0; r < 4; ++r) add_hermitian_entry(p.F[0], static_cast<int>(k + 1), 4, r, r, 0.25);

    const auto coeffs = w.pauli_coefficients();
    std::vector<int> idx(n);
    for (int code = 1; code <= m; ++code) {
        for (int q = 0, rest = code; q < n; ++q, rest /= 4) idx[n - 1 - q] = rest % 4;
        auto& f = p.F[code];
        if (const auto it = coeffs.find(idx); it != coeffs.end()) p.c(code - 1) = it->second;
        for (const auto& e : pauli_string_entries(idx))
            if (e.row <= e.col)
                add_hermitian_entry(f, 0, d, static_cast<int>(e.row), static_cast<int>(e.col), e.value / static_cast<double>(d));
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            const auto [a, b] = pairs[k];
            bool local = true;
            for (int q = 0; q < n; ++q)
                if (q != a && q != b && idx[q] != 0) local = false;
            if (!local) continue;
            // sigma_y is the only antisymmetric Pauli matrix.
            const double sign = idx[a] == 2 ? -1.0 : 1.0;
            const std::vector<int> two{idx[a], idx[b]};
            for (const auto& e : pauli_string_entries(two))
                if (e.row <= e.col)
                    add_hermitian_entry(f, static_cast<int>(k + 1), 4, static_cast<int>(e.row),
                                        static_cast<int>(e.col), sign * e.value / 4.0);
        }
    }
    p.finalize();
    return p;
}

StateResult optimal_state(const Witness& w, const sdp::SolverOptions& opts) {
    const SdpProblem problem = state_problem(w);
    StateResult out;
    out.solution = sdp::solve(problem, opts);
    if (out.solution.status != sdp::SolveStatus::Optimal && out.solution.status != sdp::SolveStatus::Stalled)
        throw SolverFailure("state SDP ended with status " + std::string(sdp::status_name(out.solution.status)) +
                            " after " + std::to_string(out.solution.iterations) + " iterations");

    const int n = w.layout.n_parties();
    const int d = static_cast<int>(w.layout.total_dim());
    CMatrix rho = CMatrix::Identity(d, d) / static_cast<double>(d);
    std::vector<int> idx(n);
    for (int code = 1; code < d * d; ++code) {
        for (int q = 0, rest = code; q < n; ++q, rest /= 4) idx[n - 1 - q] = rest % 4;
        const double xv = out.solution.x(code - 1);
        for (const auto& e : pauli_string_entries(idx)) rho(e.row, e.col) += xv * e.value / static_cast<double>(d);
    }
    rho = hermitian_part(rho, 1e-9);

    // Interior-point iterates may sit a hair outside the cone; mix in just
    // enough white noise to make rho and every partially transposed marginal
    // positive semidefinite.
    double t = noise_to_fix(min_eigenvalue(rho), d);
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
            const std::vector<int> keep{a, b};
            const PartyLayout two = PartyLayout::qubits(2);
            const CMatrix marg = partial_trace(rho, w.layout, keep);
            const std::vector<int> first{0};
            t = std::max(t, noise_to_fix(min_eigenvalue(partial_transpose(marg, two, first)), 4));
        }
    if (t > 0.0) {
        t *= 1.0 + 1e-6;
        rho = (1.0 - t) * rho + t * CMatrix::Identity(d, d) / static_cast<double>(d);
    }
    out.state = QuantumState::mixed(w.layout, rho);
    out.value = witness_expectation(w, out.state);
    return out;
}

bool has_symmetric_marginal(const QuantumState& state, double tol) {
    const auto& layout = state.layout();
    const int n = layout.n_parties();
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
            if (layout.dim(a) != layout.dim(b)) continue;
            const std::vector<int> keep{a, b};
            const CMatrix marg = partial_trace(state, keep);
            const int k = layout.dim(a);
            CMatrix swapped(marg.rows(), marg.cols());
            for (int r = 0; r < k * k; ++r)
                for (int c = 0; c < k * k; ++c)
                    swapped((r % k) * k + r / k, (c % k) * k + c / k) = marg(r, c);
            if ((swapped - marg).norm() < tol) return true;
        }
    return false;
}

std::string_view search_status_name(SearchStatus s) {
    switch (s) {
        case SearchStatus::Converged: return "converged";
        case SearchStatus::MaxIterations: return "max-iterations";
        case SearchStatus::SolverFailure: return "solver-failure";
    }
    return "unknown";
}

SearchResult see_saw(const PartyLayout& layout, const MarginalConfiguration& config, const SeeSawOptions& opts) {
    require_qubits(layout, "see_saw");
    if (const auto v = is_valid(config); !v.valid) throw InvalidArgument("invalid configuration: " + v.reason);
    if (config.n_parties() != layout.n_parties())
        throw InvalidArgument("configuration and layout have different party counts");

    SearchResult res;
    QuantumState state = opts.initial_state ? *opts.initial_state : random_pure_state(layout, opts.seed);
    res.start_seed = opts.seed;
    if (!opts.initial_state) {
        // Symmetric starting points can be fixed points of the alternation.
        for (int attempt = 1; has_symmetric_marginal(state); ++attempt) {
            res.start_seed = opts.seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(attempt);
            state = random_pure_state(layout, res.start_seed);
            res.diagnostics.push_back("rejected symmetric starting state");
        }
    }
    res.state = state;

    // The first witness step sees the raw starting state, which need not have
    // PPT marginals; the trace starts at the first state step.
    double prev = std::numeric_limits<double>::infinity();
    bool have_result = false;
    for (int it = 1; it <= opts.max_iters; ++it) {
        WitnessResult wr;
        StateResult sr;
        try {
            wr = optimal_witness(state, config, opts.solver);
            if (have_result) res.objective_trace.push_back(wr.value);
            sr = optimal_state(wr.witness, opts.solver);
        } catch (const SolverFailure& e) {
            res.status = SearchStatus::SolverFailure;
            res.diagnostics.push_back(std::string("outer iteration ") + std::to_string(it) + ": " + e.what());
            break;
        }
        QuantumState next = sr.state;
        double value = sr.value;

        Eigen::SelfAdjointEigenSolver<CMatrix> es(next.density_matrix());
        const auto& ev = es.eigenvalues();
        if (ev.size() > 1 && ev(ev.size() - 2) < opts.purify_tol) {
            const QuantumState pure = QuantumState::pure(layout, es.eigenvectors().col(ev.size() - 1));
            const double pv = witness_expectation(wr.witness, pure);
            bool ppt = true;
            const int n = layout.n_parties();
            for (int a = 0; a < n && ppt; ++a)
                for (int b = a + 1; b < n && ppt; ++b) {
                    const std::vector<int> keep{a, b}, first{0};
                    ppt = is_ppt(partial_trace(pure, keep), PartyLayout::qubits(2), Bipartition(first, 2), 1e-9).ppt;
                }
            if (ppt && pv <= value + 1e-12) {
                next = pure;
                value = pv;
                ++res.purifications;
            }
        }
        res.objective_trace.push_back(value);
        res.state = next;
        res.witness = std::move(wr.witness);
        res.certificate = std::move(wr.certificate);
        res.outer_iterations = it;
        have_result = true;
        if (value < 0.0 && res.first_detection_iteration < 0) res.first_detection_iteration = it;
        state = std::move(next);
        if (std::abs(prev - value) < opts.conv_tol) {
            res.status = SearchStatus::Converged;
            break;
        }
        prev = value;
    }

    if (have_result) {
        res.detected = res.value() < 0.0;
        res.marginals_ppt = true;
        const int n = layout.n_parties();
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b) {
                const std::vector<int> keep{a, b}, first{0};
                if (!is_ppt(partial_trace(res.state, keep), PartyLayout::qubits(2), Bipartition(first, 2), 1e-9).ppt)
                    res.marginals_ppt = false;
            }
        res.certificate_valid = verify_certificate(res.witness, res.certificate).valid;
    }
    return res;
}

nlohmann::json witness_to_json(const Witness& w) {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& [key, v] : w.coeffs)
        terms.push_back({{"edge", {key.first.first, key.first.second}}, {"i", key.second.first},
                         {"j", key.second.second}, {"value", v}});
    return {{"format", "sepmarg-witness/1"},
            {"dims", w.layout.dims()},
            {"configuration", configuration_to_json(w.config)},
            {"identity_coeff", w.identity_coeff},
            {"terms", terms}};
}

Witness witness_from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "sepmarg-witness/1") throw FormatError("witness file: format must be sepmarg-witness/1");
    Witness w;
    try {
        w.layout = PartyLayout(j.at("dims").get<std::vector<int>>());
        w.config = configuration_from_json(j.at("configuration"));
        w.identity_coeff = j.at("identity_coeff").get<double>();
        const auto& terms = j.at("terms");
        for (std::size_t k = 0; k < terms.size(); ++k) {
            const auto& t = terms[k];
            Edge e{t.at("edge").at(0).get<int>(), t.at("edge").at(1).get<int>()};
            int i = t.at("i").get<int>(), jj = t.at("j").get<int>();
            if (e.first > e.second) {
                std::swap(e.first, e.second);
                std::swap(i, jj);
            }
            if (!w.config.has_edge(e.first, e.second) || i < 0 || i > 3 || jj < 0 || jj > 3 || (i == 0 && jj == 0))
                throw FormatError("witness file: terms[" + std::to_string(k) + "] is not a term on a configuration edge");
            w.coeffs[{e, {i, jj}}] = t.at("value").get<double>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("witness file: ") + e.what());
    }
    if (w.config.n_parties() != w.layout.n_parties()) throw FormatError("witness file: dims and configuration disagree");
    return w;
}

}  // namespace sepmarg
