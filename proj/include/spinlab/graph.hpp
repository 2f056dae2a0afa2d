#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace spinlab {

// Thrown when an operation would exceed a configured resource budget
// (state-space caps, SAW-tree node budgets, term counts).
struct BudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Graph {
    int n_vertices = 0;
    std::vector<std::pair<int, int>> edges;  // unordered pairs, repeats iff multigraph
    bool multigraph = false;
    // 0 = L, 1 = R; every edge must cross when present.
    std::optional<std::vector<uint8_t>> bipartition;
    int max_degree = 0;
    std::vector<std::vector<int>> adj;  // neighbor lists with multiplicity

    int degree(int v) const { return static_cast<int>(adj[static_cast<size_t>(v)].size()); }
    bool has_edge(int u, int v) const;
    bool is_connected() const;
};

Graph make_graph(int n, std::vector<std::pair<int, int>> edges, bool multigraph = false,
                 std::optional<std::vector<uint8_t>> bipartition = std::nullopt);

// Union of delta matchings on [2n] lifted symmetrically to L,R of size 2n each
// (edges (l_u, r_v) and (l_v, r_u) per matched pair), coincident edges collapsed.
Graph gen_symmetric_bipartite(int n, int delta, uint64_t seed);

// Union of delta uniform perfect matchings between sides of size n;
// multiset union when multigraph is set, deduplicated otherwise.
Graph gen_regular_bipartite(int n, int delta, uint64_t seed, bool multigraph);

// Finite truncations of the Delta-regular / d-ary tree, root = vertex 0.
Graph tree_graph_regular(int delta, int depth, long long node_budget = 10'000'000);
Graph tree_graph_ary(int d, int depth, long long node_budget = 10'000'000);

void write_graph_file(const Graph& g, const std::string& path);
Graph read_graph_file(const std::string& path);

struct SawTreeNode {
    int origin_vertex = -1;
    int parent = -1;
    int8_t pinning = 0;  // 0 = free, +1/-1 on closure leaves
};

struct SawTree {
    std::vector<SawTreeNode> nodes;  // node 0 is the root
    int root = 0;
    std::vector<int> order_rank;  // rank of each source vertex under the order
};

// Enumerates all self-avoiding walks from root. A walk closing a cycle at
// v_l = v_i ends in a leaf pinned +1 iff v_{i+1} precedes v_{l-1} in the order.
// order, when given, lists vertices from smallest to largest; default is by id.
SawTree build_saw_tree(const Graph& g, int root, std::span<const int> order = {},
                       std::optional<int> depth_limit = std::nullopt,
                       long long node_budget = 10'000'000);

}  // namespace spinlab
