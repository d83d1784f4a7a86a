#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sepmarg/errors.hpp"
#include "json.hpp"

// Sets of known two-body marginals, viewed as graphs over the parties.
namespace sepmarg {

using Edge = std::pair<int, int>;

class MarginalConfiguration {
  public:
    MarginalConfiguration() = default;
    // Edges are stored as (min, max) and sorted. Self-loops, duplicates and
    // out-of-range parties throw InvalidArgument.
    MarginalConfiguration(int n_parties, std::vector<Edge> edges);

    int n_parties() const { return n_parties_; }
    const std::vector<Edge>& edges() const { return edges_; }
    bool has_edge(int a, int b) const;
    std::string to_string() const;  // "0-1,1-2"

    bool operator==(const MarginalConfiguration&) const = default;

  private:
    int n_parties_ = 0;
    std::vector<Edge> edges_;
};

struct Validity {
    bool valid = false;
    std::string reason;  // empty when valid
};

// Valid iff every party lies on an edge and the graph is connected. A single
// party (the one-vertex tree) is valid with no edges.
Validity is_valid(const MarginalConfiguration& config);

// A valid configuration is minimal iff it is a tree.
bool is_minimal(const MarginalConfiguration& config);

struct CanonicalTree {
    int n_parties = 0;
    std::vector<Edge> edges;  // vertices relabeled in canonical BFS order
    std::string id;

    MarginalConfiguration config() const { return {n_parties, edges}; }
};

// AHU encoding rooted at the centroid(s). Equal iff isomorphic.
std::string canonical_id(int n_parties, const std::vector<Edge>& edges);
CanonicalTree canonical_tree(int n_parties, const std::vector<Edge>& edges);

// One tree per isomorphism class, ordered by (edge count of the longest path, id).
std::vector<CanonicalTree> enumerate_trees(int n);

// Inline form "0-1,1-2,2-3". n_parties < 0 infers max index + 1.
MarginalConfiguration parse_configuration(std::string_view text, int n_parties = -1);

nlohmann::json configuration_to_json(const MarginalConfiguration& config);
MarginalConfiguration configuration_from_json(const nlohmann::json& j);
MarginalConfiguration load_configuration(const std::string& path);

}  // namespace sepmarg
