#include "sepmarg/construction.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>

namespace sepmarg {
namespace {

constexpr std::size_t kMaxEnumeratedPaths = 2'000'000;

std::vector<std::vector<int>> adjacency(const MarginalConfiguration& g) {
    std::vector<std::vector<int>> adj(g.n_parties());
    for (const auto& [a, b] : g.edges()) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    return adj;
}

// Every simple path with `length` vertices, each listed once (first < last).
std::vector<std::vector<int>> simple_paths(const std::vector<std::vector<int>>& adj, int length) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur;
    std::vector<char> on(adj.size(), 0);
    auto dfs = [&](auto&& self, int v) -> void {
        cur.push_back(v);
        on[v] = 1;
        if (static_cast<int>(cur.size()) == length) {
            if (cur.front() < cur.back() || length == 1) out.push_back(cur);
            if (out.size() > kMaxEnumeratedPaths) throw ResourceLimit("path_cover: too many candidate paths");
        } else {
            for (int w : adj[v])
                if (!on[w]) self(self, w);
        }
        on[v] = 0;
        cur.pop_back();
    };
    for (int v = 0; v < static_cast<int>(adj.size()); ++v) dfs(dfs, v);
    return out;
}

std::vector<int> coverage(int n, const std::vector<std::vector<int>>& paths, const std::vector<int>& chosen) {
    std::vector<int> cov(n, 0);
    for (int k : chosen)
        for (int v : paths[k]) ++cov[v];
    return cov;
}

// Drops paths whose vertices are all covered by the others, then replaces
// pairs of paths by a single path covering what only they covered.
void improve(int n, const std::vector<std::vector<int>>& paths, std::vector<int>& chosen) {
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i < chosen.size(); ++i) {
            auto cov = coverage(n, paths, chosen);
            if (std::all_of(paths[chosen[i]].begin(), paths[chosen[i]].end(), [&](int v) { return cov[v] > 1; })) {
                chosen.erase(chosen.begin() + static_cast<std::ptrdiff_t>(i));
                changed = true;
                break;
            }
        }
        if (changed) continue;
        for (std::size_t i = 0; i < chosen.size() && !changed; ++i)
            for (std::size_t j = i + 1; j < chosen.size() && !changed; ++j) {
                std::vector<int> rest;
                for (std::size_t k = 0; k < chosen.size(); ++k)
                    if (k != i && k != j) rest.push_back(chosen[k]);
                const auto cov = coverage(n, paths, rest);
                for (int p = 0; p < static_cast<int>(paths.size()); ++p) {
                    std::vector<int> with = cov;
                    for (int v : paths[p]) ++with[v];
                    if (std::all_of(with.begin(), with.end(), [](int c) { return c > 0; })) {
                        rest.push_back(p);
                        chosen = std::move(rest);
                        changed = true;
                        break;
                    }
                }
            }
    }
}

// Copies sharing no party with the rest would split off as a product factor,
// so covers whose paths overlap in a connected pattern are preferred.
bool overlaps_connected(int n, const std::vector<std::vector<int>>& paths, const std::vector<int>& chosen) {
    const std::size_t k = chosen.size();
    std::vector<std::vector<char>> on(k, std::vector<char>(n, 0));
    for (std::size_t i = 0; i < k; ++i)
        for (int v : paths[chosen[i]]) on[i][v] = 1;
    std::vector<char> seen(k, 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    std::size_t reached = 1;
    while (!stack.empty()) {
        const std::size_t i = stack.back();
        stack.pop_back();
        for (std::size_t j = 0; j < k; ++j) {
            if (seen[j]) continue;
            for (int v = 0; v < n; ++v)
                if (on[i][v] && on[j][v]) {
                    seen[j] = 1;
                    ++reached;
                    stack.push_back(j);
                    break;
                }
        }
    }
    return reached == k;
}

// Reorders the qubits of an operator: output qubit k is input qubit src[k].
CMatrix permute_qubits(const CMatrix& m, const std::vector<int>& src) {
    const int q = static_cast<int>(src.size());
    const std::int64_t d = std::int64_t{1} << q;
    std::vector<std::int64_t> map(d);
    for (std::int64_t out = 0; out < d; ++out) {
        std::int64_t in = 0;
        for (int k = 0; k < q; ++k)
            if ((out >> (q - 1 - k)) & 1) in |= std::int64_t{1} << (q - 1 - src[k]);
        map[out] = in;
    }
    CMatrix r(d, d);
    for (std::int64_t i = 0; i < d; ++i)
        for (std::int64_t j = 0; j < d; ++j) r(i, j) = m(map[i], map[j]);
    return r;
}

}  // namespace

std::vector<std::vector<int>> path_cover(const MarginalConfiguration& graph, int length, std::uint64_t seed) {
    const int n = graph.n_parties();
    if (length < 2) throw InvalidArgument("path_cover: block size must be at least 2");
    const auto adj = adjacency(graph);
    for (int v = 0; v < n; ++v)
        if (adj[v].empty()) throw InvalidArgument("path_cover: vertex " + std::to_string(v) + " has no edges");
    if (const auto valid = is_valid(graph); !valid.valid) throw InvalidArgument("path_cover: " + valid.reason);
    const auto paths = simple_paths(adj, length);
    std::vector<char> coverable(n, 0);
    for (const auto& p : paths)
        for (int v : p) coverable[v] = 1;
    for (int v = 0; v < n; ++v)
        if (!coverable[v])
            throw InvalidArgument("path_cover: vertex " + std::to_string(v) + " lies on no path of " +
                                  std::to_string(length) + " vertices");

    std::mt19937_64 rng(seed);
    std::vector<int> best;
    bool best_linked = false;
    const int starts = 64;
    for (int s = 0; s < starts; ++s) {
        std::vector<int> chosen;
        std::vector<char> covered(n, 0);
        int remaining = n;
        while (remaining > 0) {
            int best_gain = 0;
            std::vector<int> ties;
            for (int p = 0; p < static_cast<int>(paths.size()); ++p) {
                int gain = 0;
                for (int v : paths[p]) gain += !covered[v];
                if (gain > best_gain) {
                    best_gain = gain;
                    ties.assign(1, p);
                } else if (gain == best_gain && gain > 0) {
                    ties.push_back(p);
                }
            }
            const int pick = s == 0 ? ties.front() : ties[std::uniform_int_distribution<std::size_t>(0, ties.size() - 1)(rng)];
            chosen.push_back(pick);
            for (int v : paths[pick])
                if (!covered[v]) {
                    covered[v] = 1;
                    --remaining;
                }
        }
        improve(n, paths, chosen);
        const bool linked = overlaps_connected(n, paths, chosen);
        if (best.empty() || chosen.size() < best.size() || (chosen.size() == best.size() && linked && !best_linked)) {
            best = chosen;
            best_linked = linked;
        }
    }
    std::vector<std::vector<int>> out;
    for (int k : best) out.push_back(paths[k]);
    return out;
}

MarginalConfiguration grid_graph(int rows, int cols) {
    if (rows < 1 || cols < 1 || rows * cols < 2) throw InvalidArgument("grid needs at least two nodes");
    std::vector<Edge> edges;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            const int v = r * cols + c;
            if (c + 1 < cols) edges.emplace_back(v, v + 1);
            if (r + 1 < rows) edges.emplace_back(v, v + cols);
        }
    return {rows * cols, std::move(edges)};
}

MarginalConfiguration parse_grid(const std::string& text) {
    const auto x = text.find('x');
    try {
        if (x == std::string::npos) throw std::invalid_argument("no x");
        std::size_t p1 = 0, p2 = 0;
        const int r = std::stoi(text.substr(0, x), &p1);
        const int c = std::stoi(text.substr(x + 1), &p2);
        if (p1 != x || p2 != text.size() - x - 1) throw std::invalid_argument("trailing");
        return grid_graph(r, c);
    } catch (const std::logic_error&) {
        throw InvalidArgument("grid shorthand must look like 4x4, got '" + text + "'");
    }
}

void GlueAssignment::validate() const {
    const int L = block.n_parties();
    const int n = target.n_parties();
    if (placements.empty()) throw InvalidArgument("assignment has no placements");
    for (std::size_t k = 0; k < placements.size(); ++k) {
        const auto& pl = placements[k];
        if (static_cast<int>(pl.size()) != L)
            throw InvalidArgument("placement " + std::to_string(k) + " does not match the block size");
        for (int v : pl)
            if (v < 0 || v >= n) throw InvalidArgument("placement " + std::to_string(k) + " leaves the target graph");
        if (std::set<int>(pl.begin(), pl.end()).size() != pl.size())
            throw InvalidArgument("placement " + std::to_string(k) + " puts two block qubits on one party");
        for (const auto& [a, b] : block.edges())
            if (!target.has_edge(pl[a], pl[b]))
                throw InvalidArgument("placement " + std::to_string(k) + " maps block edge " + std::to_string(a) +
                                      "-" + std::to_string(b) + " off the target edges");
    }
    const auto counts = hosted_counts();
    for (int v = 0; v < n; ++v)
        if (counts[v] == 0) throw InvalidArgument("target party " + std::to_string(v) + " hosts no block qubit");
}

std::vector<int> GlueAssignment::hosted_counts() const {
    std::vector<int> counts(target.n_parties(), 0);
    for (const auto& pl : placements)
        for (int v : pl)
            if (v >= 0 && v < target.n_parties()) ++counts[v];
    return counts;
}

PartyLayout GlueAssignment::layout() const {
    std::vector<int> dims;
    for (int c : hosted_counts()) dims.push_back(1 << c);
    return PartyLayout(dims);
}

GlueAssignment path_assignment(const MarginalConfiguration& target, int block_qubits,
                               const std::vector<std::vector<int>>& paths) {
    std::vector<Edge> chain;
    for (int q = 0; q + 1 < block_qubits; ++q) chain.emplace_back(q, q + 1);
    GlueAssignment a{target, MarginalConfiguration(block_qubits, chain), paths};
    a.validate();
    return a;
}

CompositeState glue_states(const BlockRecord& block, const GlueAssignment& assignment) {
    assignment.validate();
    const auto& bs = block.state;
    const int L = assignment.block.n_parties();
    if (!bs.is_pure()) throw InvalidArgument("glue_states: block state must be pure");
    if (!bs.layout().all_qubits() || bs.layout().n_parties() != L)
        throw InvalidArgument("glue_states: block state does not match the block graph");
    const int copies = static_cast<int>(assignment.placements.size());
    const int total = copies * L;
    if (total > kMaxCompositeQubits)
        throw ResourceLimit("composite of " + std::to_string(total) + " qubits exceeds the 2^" +
                            std::to_string(kMaxCompositeQubits) + " dimension cap");

    CompositeState out;
    out.assignment = assignment;
    out.block = block;
    out.hosted.resize(assignment.target.n_parties());
    for (int p = 0; p < copies; ++p)
        for (int q = 0; q < L; ++q) out.hosted[assignment.placements[p][q]].push_back({p, q});

    // Source order: placement-major, block qubit minor. Target order: party by party.
    std::vector<int> target_pos(total);
    int pos = 0;
    for (const auto& party : out.hosted)
        for (const auto& h : party) target_pos[h.placement * L + h.block_qubit] = pos++;

    CVector product = CVector::Ones(1);
    for (int p = 0; p < copies; ++p) product = kron(product, bs.amplitudes());
    const std::int64_t dim = product.size();
    CVector psi(dim);
    for (std::int64_t i = 0; i < dim; ++i) {
        std::int64_t j = 0;
        for (int s = 0; s < total; ++s)
            if ((i >> (total - 1 - s)) & 1) j |= std::int64_t{1} << (total - 1 - target_pos[s]);
        psi(j) = product(i);
    }
    out.state = QuantumState::pure(assignment.layout(), std::move(psi));
    return out;
}

ConstructionReport verify_construction(const CompositeState& c, bool force_svd) {
    ConstructionReport rep;
    const auto& layout = c.state.layout();
    const int n = layout.n_parties();
    const int L = c.assignment.block.n_parties();
    rep.norm_error = std::abs(c.state.amplitudes().norm() - 1.0);
    rep.pure = c.state.is_pure() && rep.norm_error < 1e-10;

    // (b) entangled across every bipartition of the target parties.
    const bool direct = force_svd || layout.total_dim() <= kDirectSvdMaxDim;
    rep.cut_method = direct ? "svd" : "block-product";
    std::map<std::uint32_t, int> block_rank;  // block qubit mask -> Schmidt rank
    auto rank_of_block_cut = [&](std::uint32_t mask) {
        const std::uint32_t full = (1u << L) - 1;
        if (mask == 0 || mask == full) return 1;
        if (auto it = block_rank.find(mask); it != block_rank.end()) return it->second;
        std::vector<int> members;
        for (int q = 0; q < L; ++q)
            if (mask & (1u << q)) members.push_back(q);
        const int r = schmidt_rank(c.block.state, Bipartition(members, L));
        block_rank[mask] = r;
        return r;
    };
    rep.min_schmidt_rank = std::numeric_limits<int>::max();
    for (const auto& cut : Bipartition::all(n)) {
        int rank = 1;
        if (direct) {
            rank = schmidt_rank(c.state, cut);
        } else {
            std::vector<std::uint32_t> masks(c.assignment.placements.size(), 0);
            for (int party : cut.members())
                for (const auto& h : c.hosted[party]) masks[h.placement] |= 1u << h.block_qubit;
            for (auto m : masks) rank = std::min<std::int64_t>(std::int64_t{rank} * rank_of_block_cut(m), 1 << 30);
        }
        ++rep.cuts_checked;
        if (rank < rep.min_schmidt_rank) {
            rep.min_schmidt_rank = rank;
            if (rank < 2) rep.failing_cut = cut.members();
        }
    }
    rep.all_cuts_entangled = rep.min_schmidt_rank >= 2;

    // (c) target-edge marginals equal products of block marginals.
    for (const auto& [a, b] : c.assignment.target.edges()) {
        const std::vector<int> keep{a, b};
        const CMatrix actual = partial_trace(c.state, keep);
        std::vector<HostedQubit> kept = c.hosted[a];
        kept.insert(kept.end(), c.hosted[b].begin(), c.hosted[b].end());
        std::vector<HostedQubit> sorted = kept;
        std::sort(sorted.begin(), sorted.end(), [](const HostedQubit& x, const HostedQubit& y) {
            return x.placement != y.placement ? x.placement < y.placement : x.block_qubit < y.block_qubit;
        });
        CMatrix expected = CMatrix::Identity(1, 1);
        for (std::size_t k = 0; k < sorted.size();) {
            std::vector<int> qubits;
            const int p = sorted[k].placement;
            for (; k < sorted.size() && sorted[k].placement == p; ++k) qubits.push_back(sorted[k].block_qubit);
            expected = kron(expected, partial_trace(c.block.state, qubits));
        }
        std::vector<int> src;
        for (const auto& h : kept) {
            const auto it = std::find_if(sorted.begin(), sorted.end(), [&](const HostedQubit& s) {
                return s.placement == h.placement && s.block_qubit == h.block_qubit;
            });
            src.push_back(static_cast<int>(it - sorted.begin()));
        }
        const CMatrix diff = actual - permute_qubits(expected, src);
        rep.max_marginal_residual = std::max(rep.max_marginal_residual, diff.cwiseAbs().maxCoeff());
    }
    rep.marginals_factorize = rep.max_marginal_residual < 1e-10;
    rep.pedigree_complete = c.block.detected.value_or(false) && c.block.unique.value_or(false);
    return rep;
}

nlohmann::json construction_report_to_json(const ConstructionReport& r) {
    nlohmann::json j = {{"pure", r.pure},
                        {"norm_error", r.norm_error},
                        {"cuts_checked", r.cuts_checked},
                        {"cut_method", r.cut_method},
                        {"min_schmidt_rank", r.min_schmidt_rank},
                        {"all_cuts_entangled", r.all_cuts_entangled},
                        {"max_marginal_residual", r.max_marginal_residual},
                        {"marginals_factorize", r.marginals_factorize},
                        {"pedigree_complete", r.pedigree_complete},
                        {"structural_ok", r.structural_ok()}};
    if (!r.failing_cut.empty()) j["failing_cut"] = r.failing_cut;
    return j;
}

}  // namespace sepmarg
