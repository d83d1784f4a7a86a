#include "sepmarg/configurations.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <queue>
#include <set>

#include "sepmarg/state_io.hpp"

namespace sepmarg {

MarginalConfiguration::MarginalConfiguration(int n_parties, std::vector<Edge> edges) : n_parties_(n_parties) {
    if (n_parties < 1) throw InvalidArgument("configuration needs at least one party");
    for (auto& [a, b] : edges) {
        if (a == b) throw InvalidArgument("self-loop at party " + std::to_string(a));
        if (a < 0 || b < 0 || a >= n_parties || b >= n_parties)
            throw InvalidArgument("edge " + std::to_string(a) + "-" + std::to_string(b) + " out of range");
        if (a > b) std::swap(a, b);
    }
    std::sort(edges.begin(), edges.end());
    if (std::adjacent_find(edges.begin(), edges.end()) != edges.end()) throw InvalidArgument("duplicate edge");
    edges_ = std::move(edges);
}

bool MarginalConfiguration::has_edge(int a, int b) const {
    if (a > b) std::swap(a, b);
    return std::binary_search(edges_.begin(), edges_.end(), Edge{a, b});
}

std::string MarginalConfiguration::to_string() const {
    std::string out;
    for (const auto& [a, b] : edges_) {
        if (!out.empty()) out += ',';
        out += std::to_string(a) + "-" + std::to_string(b);
    }
    return out;
}

namespace {

std::vector<std::vector<int>> adjacency(int n, const std::vector<Edge>& edges) {
    std::vector<std::vector<int>> adj(n);
    for (const auto& [a, b] : edges) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    return adj;
}

int count_reachable(const std::vector<std::vector<int>>& adj, int start) {
    std::vector<char> seen(adj.size(), 0);
    std::vector<int> stack{start};
    seen[start] = 1;
    int count = 0;
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        ++count;
        for (int w : adj[v])
            if (!seen[w]) {
                seen[w] = 1;
                stack.push_back(w);
            }
    }
    return count;
}

void require_tree(int n, const std::vector<Edge>& edges) {
    if (n < 1) throw InvalidArgument("tree needs at least one vertex");
    if (static_cast<int>(edges.size()) != n - 1) throw InvalidArgument("not a tree: wrong edge count");
    for (const auto& [a, b] : edges)
        if (a < 0 || b < 0 || a >= n || b >= n || a == b) throw InvalidArgument("not a tree: bad edge");
    if (count_reachable(adjacency(n, edges), 0) != n) throw InvalidArgument("not a tree: disconnected");
}

std::vector<int> centroids(const std::vector<std::vector<int>>& adj) {
    const int n = static_cast<int>(adj.size());
    std::vector<int> parent(n, -1), order, size(n, 1);
    order.reserve(n);
    std::vector<char> seen(n, 0);
    order.push_back(0);
    seen[0] = 1;
    for (std::size_t k = 0; k < order.size(); ++k)
        for (int w : adj[order[k]])
            if (!seen[w]) {
                seen[w] = 1;
                parent[w] = order[k];
                order.push_back(w);
            }
    for (int k = n - 1; k > 0; --k) size[parent[order[k]]] += size[order[k]];
    std::vector<int> out;
    for (int v = 0; v < n; ++v) {
        int heaviest = n - size[v];
        for (int w : adj[v])
            if (w != parent[v]) heaviest = std::max(heaviest, size[w]);
        if (2 * heaviest <= n) out.push_back(v);
    }
    return out;
}

std::string encode(const std::vector<std::vector<int>>& adj, int v, int parent) {
    std::vector<std::string> kids;
    for (int w : adj[v])
        if (w != parent) kids.push_back(encode(adj, w, v));
    std::sort(kids.begin(), kids.end());
    std::string s = "(";
    for (const auto& k : kids) s += k;
    return s + ")";
}

// Relabels vertices in BFS order from the root, visiting children in
// encoding order, so isomorphic trees get identical edge lists.
std::vector<Edge> canonical_edges(const std::vector<std::vector<int>>& adj, int root) {
    const int n = static_cast<int>(adj.size());
    std::vector<int> label(n, -1);
    std::vector<Edge> edges;
    std::queue<std::pair<int, int>> q;
    q.push({root, -1});
    label[root] = 0;
    int next = 1;
    while (!q.empty()) {
        const auto [v, parent] = q.front();
        q.pop();
        std::vector<std::pair<std::string, int>> kids;
        for (int w : adj[v])
            if (w != parent) kids.emplace_back(encode(adj, w, v), w);
        std::sort(kids.begin(), kids.end());
        for (const auto& [code, w] : kids) {
            label[w] = next++;
            edges.emplace_back(label[v], label[w]);
            q.push({w, v});
        }
    }
    std::sort(edges.begin(), edges.end());
    return edges;
}

int diameter(const std::vector<std::vector<int>>& adj) {
    auto farthest = [&](int s) {
        std::vector<int> dist(adj.size(), -1);
        std::queue<int> q;
        q.push(s);
        dist[s] = 0;
        int last = s;
        while (!q.empty()) {
            last = q.front();
            q.pop();
            for (int w : adj[last])
                if (dist[w] < 0) {
                    dist[w] = dist[last] + 1;
                    q.push(w);
                }
        }
        return std::pair{last, dist[last]};
    };
    return farthest(farthest(0).first).second;
}

}  // namespace

Validity is_valid(const MarginalConfiguration& config) {
    const int n = config.n_parties();
    if (n < 1) return {false, "no parties"};
    if (n == 1) return {true, ""};
    const auto adj = adjacency(n, config.edges());
    for (int v = 0; v < n; ++v)
        if (adj[v].empty()) return {false, "party " + std::to_string(v) + " not covered"};
    if (count_reachable(adj, 0) != n) return {false, "disconnected"};
    return {true, ""};
}

bool is_minimal(const MarginalConfiguration& config) {
    const auto v = is_valid(config);
    if (!v.valid) throw InvalidArgument("invalid configuration: " + v.reason);
    return static_cast<int>(config.edges().size()) == config.n_parties() - 1;
}

CanonicalTree canonical_tree(int n, const std::vector<Edge>& edges) {
    require_tree(n, edges);
    const auto adj = adjacency(n, edges);
    int best_root = -1;
    std::string best;
    for (int c : centroids(adj)) {
        std::string code = encode(adj, c, -1);
        if (best_root < 0 || code < best) {
            best = std::move(code);
            best_root = c;
        }
    }
    return {n, canonical_edges(adj, best_root), best};
}

std::string canonical_id(int n, const std::vector<Edge>& edges) { return canonical_tree(n, edges).id; }

std::vector<CanonicalTree> enumerate_trees(int n) {
    if (n < 1 || n > 12) throw InvalidArgument("enumerate_trees: n must be in 1..12");
    std::vector<CanonicalTree> level{canonical_tree(1, {})};
    for (int k = 2; k <= n; ++k) {
        std::set<std::string> seen;
        std::vector<CanonicalTree> next;
        for (const auto& t : level)
            for (int v = 0; v < k - 1; ++v) {
                auto edges = t.edges;
                edges.emplace_back(v, k - 1);
                auto c = canonical_tree(k, edges);
                if (seen.insert(c.id).second) next.push_back(std::move(c));
            }
        level = std::move(next);
    }
    std::vector<std::pair<int, CanonicalTree>> keyed;
    for (auto& t : level) keyed.emplace_back(diameter(adjacency(n, t.edges)), std::move(t));
    std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second.id < b.second.id;
    });
    std::vector<CanonicalTree> out;
    for (auto& [d, t] : keyed) out.push_back(std::move(t));
    return out;
}

MarginalConfiguration parse_configuration(std::string_view text, int n_parties) {
    std::vector<Edge> edges;
    int max_index = -1;
    std::size_t pos = 0;
    auto parse_int = [&](std::string_view s) {
        int v = 0;
        const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size() || s.empty())
            throw InvalidArgument("bad party index '" + std::string(s) + "' in configuration");
        return v;
    };
    while (pos <= text.size() && !text.empty()) {
        const auto comma = std::min(text.find(',', pos), text.size());
        std::string_view item = text.substr(pos, comma - pos);
        while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
        while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
        const auto dash = item.find('-');
        if (dash == std::string_view::npos)
            throw InvalidArgument("configuration edge '" + std::string(item) + "' is not of the form a-b");
        const int a = parse_int(item.substr(0, dash));
        const int b = parse_int(item.substr(dash + 1));
        edges.emplace_back(a, b);
        max_index = std::max({max_index, a, b});
        pos = comma + 1;
    }
    if (edges.empty() && n_parties < 0) throw InvalidArgument("empty configuration");
    return {n_parties < 0 ? max_index + 1 : n_parties, std::move(edges)};
}

nlohmann::json configuration_to_json(const MarginalConfiguration& config) {
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& [a, b] : config.edges()) edges.push_back({a, b});
    return {{"n_parties", config.n_parties()}, {"edges", edges}};
}

MarginalConfiguration configuration_from_json(const nlohmann::json& j) {
    if (!j.contains("n_parties") || !j["n_parties"].is_number_integer())
        throw FormatError("configuration file: n_parties missing or not an integer");
    if (!j.contains("edges") || !j["edges"].is_array()) throw FormatError("configuration file: edges missing or not a list");
    std::vector<Edge> edges;
    for (std::size_t k = 0; k < j["edges"].size(); ++k) {
        const auto& e = j["edges"][k];
        if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer())
            throw FormatError("configuration file: edges[" + std::to_string(k) + "] must be a pair of party indices");
        edges.emplace_back(e[0].get<int>(), e[1].get<int>());
    }
    return {j["n_parties"].get<int>(), std::move(edges)};
}

MarginalConfiguration load_configuration(const std::string& path) {
    return configuration_from_json(read_json_file(path));
}

}  // namespace sepmarg
