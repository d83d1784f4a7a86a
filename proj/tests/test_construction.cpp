#include <algorithm>
#include <filesystem>
#include <set>

#include "doctest.h"
#include "sepmarg/construction.hpp"
#include "sepmarg/state_io.hpp"

using namespace sepmarg;

namespace {

BlockRecord block5a() {
    return {load_state(std::filesystem::path(SEPMARG_FIXTURE_DIR) / "psi5a.state.json"), "5a", true, true};
}

MarginalConfiguration path_graph(int n) {
    std::vector<Edge> e;
    for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
    return {n, e};
}

void check_cover(const MarginalConfiguration& g, const std::vector<std::vector<int>>& paths, int length) {
    std::set<int> seen;
    for (const auto& p : paths) {
        CHECK(p.size() == static_cast<std::size_t>(length));
        CHECK(std::set<int>(p.begin(), p.end()).size() == p.size());
        for (std::size_t k = 0; k + 1 < p.size(); ++k) CHECK(g.has_edge(p[k], p[k + 1]));
        seen.insert(p.begin(), p.end());
    }
    CHECK(seen.size() == static_cast<std::size_t>(g.n_parties()));
}

// Kronecker product of the copies (copy 0 most significant) with qubits then
// reordered party by party, following the hosted table.
CVector composite_oracle(const CompositeState& c) {
    const CVector& b = c.block.state.amplitudes();
    const int L = c.block.state.layout().n_parties();
    const int copies = static_cast<int>(c.assignment.placements.size());
    CVector prod = b;
    for (int k = 1; k < copies; ++k) prod = kron(prod, b);
    std::vector<int> order;  // composite qubit position -> product qubit position
    for (const auto& party : c.hosted)
        for (const auto& h : party) order.push_back(h.placement * L + h.block_qubit);
    const int n = static_cast<int>(order.size());
    CVector out(prod.size());
    for (Eigen::Index idx = 0; idx < prod.size(); ++idx) {
        Eigen::Index src = 0;
        for (int q = 0; q < n; ++q)
            if (idx >> (n - 1 - q) & 1) src |= Eigen::Index{1} << (n - 1 - order[q]);
        out(idx) = prod(src);
    }
    return out;
}

}  // namespace

TEST_CASE("path covers") {
    const auto p6 = path_cover(path_graph(6), 5);
    CHECK(p6.size() == 2);
    check_cover(path_graph(6), p6, 5);
    CHECK(path_cover(path_graph(5), 5).size() == 1);
    const auto grid = parse_grid("4x4");
    CHECK(grid.edges().size() == 24);
    const auto g = path_cover(grid, 5);
    CHECK(g.size() == 4);
    check_cover(grid, g, 5);
    CHECK(path_cover(grid, 5, 9) == path_cover(grid, 5, 9));
    CHECK_THROWS_AS(path_cover(MarginalConfiguration(3, {{0, 1}}), 2), InvalidArgument);
    CHECK_THROWS_AS(path_cover(path_graph(3), 5), InvalidArgument);
    CHECK_THROWS(parse_grid("4by4"));
}

TEST_CASE("two copies over six parties") {
    const auto target = path_graph(6);
    const auto a = path_assignment(target, 5, {{0, 1, 2, 3, 4}, {1, 2, 3, 4, 5}});
    const auto c = glue_states(block5a(), a);
    CHECK(c.state.layout().dims() == std::vector<int>{2, 4, 4, 4, 4, 2});
    CHECK((c.state.amplitudes() - composite_oracle(c)).norm() < 1e-14);

    const auto r = verify_construction(c);
    CHECK(r.cut_method == "svd");
    CHECK(r.cuts_checked == 31);
    CHECK(r.min_schmidt_rank >= 2);
    CHECK(r.all_cuts_entangled);
    CHECK(r.max_marginal_residual < 1e-10);
    CHECK(r.marginals_factorize);
    CHECK(r.pedigree_complete);
    CHECK(r.ok());
    const auto j = construction_report_to_json(r);
    CHECK(j.at("cuts_checked") == 31);
}

TEST_CASE("a single copy is the block itself") {
    const auto b = block5a();
    const auto c = glue_states(b, path_assignment(path_graph(5), 5, {{0, 1, 2, 3, 4}}));
    CHECK((c.state.amplitudes() - b.state.amplitudes()).norm() < 1e-15);
}

TEST_CASE("cut ranks from block products agree with direct SVD") {
    const auto a = path_assignment(path_graph(7), 5, {{0, 1, 2, 3, 4}, {1, 2, 3, 4, 5}, {2, 3, 4, 5, 6}});
    const auto c = glue_states(block5a(), a);
    REQUIRE(c.state.layout().total_dim() > kDirectSvdMaxDim);
    const auto fast = verify_construction(c);
    const auto slow = verify_construction(c, true);
    CHECK(fast.cut_method == "block-product");
    CHECK(slow.cut_method == "svd");
    CHECK(fast.cuts_checked == 63);
    CHECK(fast.min_schmidt_rank == slow.min_schmidt_rank);
    CHECK(fast.all_cuts_entangled == slow.all_cuts_entangled);
    CHECK(slow.all_cuts_entangled);
}

TEST_CASE("four copies over the 4x4 grid") {
    const auto grid = parse_grid("4x4");
    const auto a = path_assignment(grid, 5, path_cover(grid, 5));
    const auto counts = a.hosted_counts();
    CHECK(std::count(counts.begin(), counts.end(), 2) == 4);
    CHECK(std::count(counts.begin(), counts.end(), 1) == 12);
    const auto c = glue_states(block5a(), a);
    CHECK(c.state.layout().total_dim() == (std::int64_t{1} << 20));
    const auto r = verify_construction(c);
    CHECK(r.all_cuts_entangled);
    CHECK(r.cuts_checked == (1 << 15) - 1);
    CHECK(r.marginals_factorize);
}

TEST_CASE("failure modes") {
    CVector zero = CVector::Zero(32);
    zero(0) = 1.0;
    BlockRecord product{QuantumState::pure(PartyLayout::qubits(5), zero), "product", std::nullopt, std::nullopt};
    const auto c = glue_states(product, path_assignment(path_graph(6), 5, {{0, 1, 2, 3, 4}, {1, 2, 3, 4, 5}}));
    const auto r = verify_construction(c);
    CHECK(!r.all_cuts_entangled);
    CHECK(r.min_schmidt_rank == 1);
    CHECK(!r.failing_cut.empty());
    CHECK(!r.pedigree_complete);
    CHECK(!r.ok());

    // A target party left empty.
    CHECK_THROWS_AS(path_assignment(path_graph(7), 5, {{0, 1, 2, 3, 4}}).validate(), InvalidArgument);
    // Placement that does not follow target edges.
    CHECK_THROWS_AS(path_assignment(path_graph(5), 5, {{0, 2, 1, 3, 4}}).validate(), InvalidArgument);
    // 25 qubits exceed the cap.
    const auto big = path_assignment(path_graph(9), 5,
                                     {{0, 1, 2, 3, 4}, {1, 2, 3, 4, 5}, {2, 3, 4, 5, 6}, {3, 4, 5, 6, 7}, {4, 5, 6, 7, 8}});
    CHECK_THROWS_AS(glue_states(block5a(), big), ResourceLimit);
}
