#include <algorithm>
#include <filesystem>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "doctest.h"
#include "sepmarg/configurations.hpp"
#include "sepmarg/state_io.hpp"

using namespace sepmarg;

namespace {

// Prüfer decoding, written independently of the library.
std::vector<Edge> prufer_decode(const std::vector<int>& seq, int n) {
    std::vector<int> degree(n, 1);
    for (int v : seq) ++degree[v];
    std::vector<Edge> edges;
    for (int v : seq) {
        for (int leaf = 0; leaf < n; ++leaf)
            if (degree[leaf] == 1) {
                edges.emplace_back(leaf, v);
                --degree[leaf];
                --degree[v];
                break;
            }
    }
    int u = -1, w = -1;
    for (int i = 0; i < n; ++i)
        if (degree[i] == 1) (u < 0 ? u : w) = i;
    edges.emplace_back(u, w);
    return edges;
}

// Automorphism count by brute force over all vertex permutations.
long automorphisms(int n, const std::vector<Edge>& edges) {
    std::set<Edge> es;
    for (auto [a, b] : edges) es.emplace(std::min(a, b), std::max(a, b));
    std::vector<int> p(n);
    std::iota(p.begin(), p.end(), 0);
    long count = 0;
    do {
        bool ok = true;
        for (auto [a, b] : edges)
            if (!es.count({std::min(p[a], p[b]), std::max(p[a], p[b])})) {
                ok = false;
                break;
            }
        count += ok;
    } while (std::next_permutation(p.begin(), p.end()));
    return count;
}

long factorial(int n) { return n <= 1 ? 1 : n * factorial(n - 1); }

std::vector<Edge> relabel(const std::vector<Edge>& edges, const std::vector<int>& perm) {
    std::vector<Edge> out;
    for (auto [a, b] : edges) out.emplace_back(perm[a], perm[b]);
    return out;
}

}  // namespace

TEST_CASE("configuration normalization and errors") {
    MarginalConfiguration c(4, {{2, 1}, {0, 1}, {3, 2}});
    CHECK(c.edges() == std::vector<Edge>{{0, 1}, {1, 2}, {2, 3}});
    CHECK(c.has_edge(2, 1));
    CHECK(!c.has_edge(0, 3));
    CHECK(c.to_string() == "0-1,1-2,2-3");
    CHECK_THROWS_AS(MarginalConfiguration(3, {{0, 0}}), InvalidArgument);
    CHECK_THROWS_AS(MarginalConfiguration(3, {{0, 1}, {1, 0}}), InvalidArgument);
    CHECK_THROWS_AS(MarginalConfiguration(3, {{0, 3}}), InvalidArgument);
}

TEST_CASE("validity") {
    CHECK(is_valid(MarginalConfiguration(4, {{0, 1}, {1, 2}, {2, 3}})).valid);
    const auto disc = is_valid(MarginalConfiguration(4, {{0, 1}, {2, 3}}));
    CHECK(!disc.valid);
    CHECK(disc.reason == "disconnected");
    CHECK(is_valid(MarginalConfiguration(5, {{0, 1}, {1, 2}, {1, 3}, {3, 4}})).valid);
    const auto uncovered = is_valid(MarginalConfiguration(4, {{0, 1}, {1, 2}}));
    CHECK(!uncovered.valid);
    CHECK(uncovered.reason.find("3") != std::string::npos);
    CHECK(is_valid(MarginalConfiguration(1, {})).valid);
}

TEST_CASE("minimality") {
    CHECK(is_minimal(parse_configuration("0-1,1-2,2-3,3-4")));
    CHECK(!is_minimal(parse_configuration("0-1,1-2,2-3,3-4,0-4")));
    CHECK(is_minimal(parse_configuration("0-1,0-2,0-3,0-4,0-5")));
    CHECK_THROWS_AS(is_minimal(MarginalConfiguration(4, {{0, 1}, {2, 3}})), InvalidArgument);
}

TEST_CASE("parse inline configurations") {
    const auto c = parse_configuration(" 0-1, 1-2 ");
    CHECK(c.n_parties() == 3);
    CHECK(parse_configuration("0-1", 4).n_parties() == 4);
    CHECK_THROWS(parse_configuration("0-"));
    CHECK_THROWS(parse_configuration("a-b"));
    CHECK_THROWS(parse_configuration("0-5", 3));
    const auto j = configuration_to_json(c);
    CHECK(configuration_from_json(j) == c);
}

TEST_CASE("canonical ids") {
    const std::vector<Edge> path{{0, 1}, {1, 2}, {2, 3}};
    const std::vector<Edge> path2{{2, 0}, {0, 3}, {3, 1}};
    const std::vector<Edge> star{{0, 1}, {0, 2}, {0, 3}};
    CHECK(canonical_id(4, path) == canonical_id(4, path2));
    CHECK(canonical_id(4, path) != canonical_id(4, star));
    CHECK_THROWS_AS(canonical_id(4, {{0, 1}, {1, 2}, {2, 0}}), InvalidArgument);
    CHECK_THROWS_AS(canonical_id(4, {{0, 1}, {2, 3}}), InvalidArgument);
    const auto t = canonical_tree(4, path2);
    CHECK(canonical_id(4, t.edges) == t.id);
}

TEST_CASE("tree counts") {
    const std::vector<std::size_t> expected{1, 1, 1, 2, 3, 6, 11, 23, 47, 106, 235, 551};
    for (int n = 1; n <= 12; ++n) {
        CAPTURE(n);
        const auto trees = enumerate_trees(n);
        CHECK(trees.size() == expected[n - 1]);
        std::set<std::string> ids;
        for (const auto& t : trees) {
            ids.insert(t.id);
            CHECK(t.edges.size() == static_cast<std::size_t>(n - 1));
            CHECK(is_minimal(t.config()));
        }
        CHECK(ids.size() == trees.size());
    }
    CHECK_THROWS_AS(enumerate_trees(0), InvalidArgument);
    CHECK_THROWS_AS(enumerate_trees(13), InvalidArgument);
}

TEST_CASE("Prüfer brute force agrees with enumeration") {
    for (int n = 3; n <= 7; ++n) {
        CAPTURE(n);
        long total = 1;
        for (int i = 0; i < n - 2; ++i) total *= n;
        std::map<std::string, std::vector<Edge>> classes;
        std::vector<int> seq(n - 2, 0);
        for (long k = 0; k < total; ++k) {
            long r = k;
            for (int i = 0; i < n - 2; ++i, r /= n) seq[i] = static_cast<int>(r % n);
            const auto edges = prufer_decode(seq, n);
            classes.emplace(canonical_id(n, edges), edges);
        }
        const auto trees = enumerate_trees(n);
        CHECK(classes.size() == trees.size());
        for (const auto& t : trees) CHECK(classes.count(t.id) == 1);
        // Orbit-stabilizer: labeled trees per class sum to Cayley's n^(n-2).
        long labeled = 0;
        for (const auto& [id, edges] : classes) labeled += factorial(n) / automorphisms(n, edges);
        CHECK(labeled == total);
    }
}

TEST_CASE("ids are invariant under random relabeling") {
    std::mt19937_64 rng(17);
    for (int n = 2; n <= 10; ++n)
        for (const auto& t : enumerate_trees(n)) {
            std::vector<int> perm(n);
            std::iota(perm.begin(), perm.end(), 0);
            std::shuffle(perm.begin(), perm.end(), rng);
            CHECK(canonical_id(n, relabel(t.edges, perm)) == t.id);
        }
}

TEST_CASE("enumeration order puts the path first") {
    for (int n = 2; n <= 8; ++n) {
        const auto first = enumerate_trees(n).front();
        std::vector<Edge> path;
        for (int i = 0; i + 1 < n; ++i) path.emplace_back(i, i + 1);
        CHECK(first.id == canonical_id(n, path));
    }
}

TEST_CASE("label mapping is consistent with its edges") {
    const auto doc = read_json_file(std::filesystem::path(SEPMARG_FIXTURE_DIR) / "table1_labels.json");
    int assigned = 0;
    for (const auto& [label, entry] : doc.at("labels").items()) {
        if (!entry.contains("edges")) continue;
        ++assigned;
        const auto cfg = configuration_from_json(entry);
        CHECK(is_minimal(cfg));
        CHECK(canonical_id(cfg.n_parties(), cfg.edges()) == entry.at("tree_id").get<std::string>());
    }
    CHECK(assigned >= 3);
}
