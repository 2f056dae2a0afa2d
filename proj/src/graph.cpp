#include "spinlab/graph.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "spinlab/rng.hpp"

namespace spinlab {

bool Graph::has_edge(int u, int v) const {
    const auto& nb = adj[static_cast<size_t>(u)];
    return std::find(nb.begin(), nb.end(), v) != nb.end();
}

bool Graph::is_connected() const {
    if (n_vertices == 0) return true;
    std::vector<char> seen(static_cast<size_t>(n_vertices), 0);
    std::vector<int> stack = {0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int u : adj[static_cast<size_t>(v)]) {
            if (!seen[static_cast<size_t>(u)]) {
                seen[static_cast<size_t>(u)] = 1;
                ++count;
                stack.push_back(u);
            }
        }
    }
    return count == n_vertices;
}

Graph make_graph(int n, std::vector<std::pair<int, int>> edges, bool multigraph,
                 std::optional<std::vector<uint8_t>> bipartition) {
    if (n < 0) throw std::invalid_argument("make_graph: negative vertex count");
    if (bipartition && static_cast<int>(bipartition->size()) != n)
        throw std::invalid_argument("make_graph: bipartition size mismatch");
    std::set<std::pair<int, int>> seen;
    for (auto& [u, v] : edges) {
        if (u < 0 || u >= n || v < 0 || v >= n) throw std::invalid_argument("make_graph: edge endpoint out of range");
        if (u == v) throw std::invalid_argument("make_graph: self-loop rejected");
        if (u > v) std::swap(u, v);
        if (!multigraph && !seen.insert({u, v}).second)
            throw std::invalid_argument("make_graph: duplicate edge in simple graph");
        if (bipartition && (*bipartition)[static_cast<size_t>(u)] == (*bipartition)[static_cast<size_t>(v)])
            throw std::invalid_argument("make_graph: edge does not cross bipartition");
    }
    Graph g;
    g.n_vertices = n;
    g.edges = std::move(edges);
    g.multigraph = multigraph;
    g.bipartition = std::move(bipartition);
    g.adj.assign(static_cast<size_t>(n), {});
    for (auto [u, v] : g.edges) {
        g.adj[static_cast<size_t>(u)].push_back(v);
        g.adj[static_cast<size_t>(v)].push_back(u);
    }
    g.max_degree = 0;
    for (const auto& nb : g.adj) g.max_degree = std::max(g.max_degree, static_cast<int>(nb.size()));
    return g;
}

namespace {
// Uniform permutation by Fisher-Yates on the counter stream.
std::vector<int> random_permutation(int n, CounterRng& rng) {
    std::vector<int> p(static_cast<size_t>(n));
    std::iota(p.begin(), p.end(), 0);
    for (int i = n - 1; i > 0; --i) {
        auto j = static_cast<int>(rng.next_below(static_cast<uint64_t>(i) + 1));
        std::swap(p[static_cast<size_t>(i)], p[static_cast<size_t>(j)]);
    }
    return p;
}
}  // namespace

Graph gen_symmetric_bipartite(int n, int delta, uint64_t seed) {
    if (n < 1 || delta < 1) throw std::invalid_argument("gen_symmetric_bipartite: n >= 1 and delta >= 1 required");
    const int side = 2 * n;  // |L| = |R| = 2n
    std::set<std::pair<int, int>> edge_set;
    CounterRng rng(seed, 0, /*purpose=*/1);
    for (int m = 0; m < delta; ++m) {
        // A uniform perfect matching on [2n]: pair up a uniform permutation.
        auto perm = random_permutation(side, rng);
        for (int i = 0; i < n; ++i) {
            int u = perm[static_cast<size_t>(2 * i)];
            int v = perm[static_cast<size_t>(2 * i + 1)];
            // l_u - r_v and l_v - r_u; right side offset by `side`.
            edge_set.insert({u, side + v});
            edge_set.insert({v, side + u});
        }
    }
    std::vector<std::pair<int, int>> edges(edge_set.begin(), edge_set.end());
    std::vector<uint8_t> labels(static_cast<size_t>(2 * side), 0);
    for (int i = side; i < 2 * side; ++i) labels[static_cast<size_t>(i)] = 1;
    return make_graph(2 * side, std::move(edges), false, std::move(labels));
}

Graph gen_regular_bipartite(int n, int delta, uint64_t seed, bool multigraph) {
    if (n < 1 || delta < 1) throw std::invalid_argument("gen_regular_bipartite: n >= 1 and delta >= 1 required");
    std::vector<std::pair<int, int>> edges;
    std::set<std::pair<int, int>> edge_set;
    CounterRng rng(seed, 0, /*purpose=*/2);
    for (int m = 0; m < delta; ++m) {
        auto perm = random_permutation(n, rng);
        for (int i = 0; i < n; ++i) {
            std::pair<int, int> e{i, n + perm[static_cast<size_t>(i)]};
            if (multigraph)
                edges.push_back(e);
            else
                edge_set.insert(e);
        }
    }
    if (!multigraph) edges.assign(edge_set.begin(), edge_set.end());
    std::sort(edges.begin(), edges.end());
    std::vector<uint8_t> labels(static_cast<size_t>(2 * n), 0);
    for (int i = n; i < 2 * n; ++i) labels[static_cast<size_t>(i)] = 1;
    return make_graph(2 * n, std::move(edges), multigraph, std::move(labels));
}

namespace {
Graph build_tree(int root_children, int inner_children, int depth, long long node_budget) {
    if (depth < 0) throw std::invalid_argument("tree graphs: depth must be >= 0");
    std::vector<std::pair<int, int>> edges;
    std::vector<int> level = {0};
    long long next_id = 1;
    for (int d = 0; d < depth; ++d) {
        std::vector<int> next;
        int fanout = (d == 0) ? root_children : inner_children;
        for (int v : level) {
            for (int c = 0; c < fanout; ++c) {
                if (next_id >= node_budget) throw BudgetError("tree graph exceeds node budget");
                edges.push_back({v, static_cast<int>(next_id)});
                next.push_back(static_cast<int>(next_id));
                ++next_id;
            }
        }
        level = std::move(next);
    }
    return make_graph(static_cast<int>(next_id), std::move(edges));
}
}  // namespace

Graph tree_graph_regular(int delta, int depth, long long node_budget) {
    if (delta < 1) throw std::invalid_argument("tree_graph_regular: delta >= 1 required");
    return build_tree(delta, delta - 1, depth, node_budget);
}

Graph tree_graph_ary(int d, int depth, long long node_budget) {
    if (d < 1) throw std::invalid_argument("tree_graph_ary: d >= 1 required");
    return build_tree(d, d, depth, node_budget);
}

void write_graph_file(const Graph& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open graph file for writing: " + path);
    out << g.n_vertices << ' ' << g.edges.size();
    if (g.bipartition) {
        // File format stores the bipartition as an L-prefix length.
        int l_count = 0;
        const auto& lab = *g.bipartition;
        while (l_count < g.n_vertices && lab[static_cast<size_t>(l_count)] == 0) ++l_count;
        for (int v = l_count; v < g.n_vertices; ++v)
            if (lab[static_cast<size_t>(v)] == 0)
                throw std::invalid_argument("write_graph_file: bipartition is not in L-prefix form");
        out << " bipartite " << l_count;
    }
    if (g.multigraph) out << " multigraph";
    out << '\n';
    for (auto [u, v] : g.edges) out << u << ' ' << v << '\n';
}

Graph read_graph_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open graph file: " + path);
    std::string header;
    std::getline(in, header);
    std::istringstream hs(header);
    int n = 0;
    long long m = 0;
    if (!(hs >> n >> m)) throw std::runtime_error("bad graph file header: " + path);
    std::optional<std::vector<uint8_t>> bipartition;
    bool multigraph = false;
    std::string tok;
    while (hs >> tok) {
        if (tok == "bipartite") {
            int l_count = 0;
            if (!(hs >> l_count)) throw std::runtime_error("bad bipartite header: " + path);
            std::vector<uint8_t> labels(static_cast<size_t>(n), 1);
            for (int v = 0; v < l_count; ++v) labels[static_cast<size_t>(v)] = 0;
            bipartition = std::move(labels);
        } else if (tok == "multigraph") {
            multigraph = true;
        } else {
            throw std::runtime_error("unknown graph header token: " + tok);
        }
    }
    std::vector<std::pair<int, int>> edges;
    edges.reserve(static_cast<size_t>(m));
    for (long long i = 0; i < m; ++i) {
        int u = 0, v = 0;
        if (!(in >> u >> v)) throw std::runtime_error("truncated graph file: " + path);
        edges.push_back({u, v});
    }
    return make_graph(n, std::move(edges), multigraph, std::move(bipartition));
}

SawTree build_saw_tree(const Graph& g, int root, std::span<const int> order, std::optional<int> depth_limit,
                       long long node_budget) {
    if (root < 0 || root >= g.n_vertices) throw std::invalid_argument("build_saw_tree: root out of range");
    SawTree tree;
    tree.order_rank.assign(static_cast<size_t>(g.n_vertices), 0);
    if (order.empty()) {
        std::iota(tree.order_rank.begin(), tree.order_rank.end(), 0);
    } else {
        if (static_cast<int>(order.size()) != g.n_vertices)
            throw std::invalid_argument("build_saw_tree: order must list every vertex");
        for (int r = 0; r < g.n_vertices; ++r) tree.order_rank[static_cast<size_t>(order[static_cast<size_t>(r)])] = r;
    }
    tree.nodes.push_back({root, -1, 0});

    // DFS over walks; a frame holds the tree node, its depth, and the walk so far.
    struct Frame {
        int node;
        int depth;
    };
    std::vector<int> walk = {root};
    std::vector<char> on_walk(static_cast<size_t>(g.n_vertices), 0);
    on_walk[static_cast<size_t>(root)] = 1;

    // Recursive expansion; iterative DFS would need explicit child bookkeeping,
    // and walk depth is bounded by n, so recursion depth is fine.
    auto expand = [&](auto&& self, int node, int depth) -> void {
        if (depth_limit && depth >= *depth_limit) return;
        int w = tree.nodes[static_cast<size_t>(node)].origin_vertex;
        int prev = tree.nodes[static_cast<size_t>(node)].parent >= 0
                       ? tree.nodes[static_cast<size_t>(tree.nodes[static_cast<size_t>(node)].parent)].origin_vertex
                       : -1;
        bool prev_used = false;  // skip exactly one copy of the entering edge
        for (int u : g.adj[static_cast<size_t>(w)]) {
            if (u == prev && !prev_used) {
                prev_used = true;
                continue;
            }
            if (static_cast<long long>(tree.nodes.size()) >= node_budget)
                throw BudgetError("build_saw_tree: node budget exceeded");
            if (on_walk[static_cast<size_t>(u)]) {
                // Closure leaf: walk v_0..v_l with v_l = v_i, pin by the order rule.
                int i = -1;
                for (int k = 0; k < static_cast<int>(walk.size()); ++k)
                    if (walk[static_cast<size_t>(k)] == u) {
                        i = k;
                        break;
                    }
                int succ = walk[static_cast<size_t>(i + 1)];
                int last = walk.back();
                int8_t pin = tree.order_rank[static_cast<size_t>(succ)] < tree.order_rank[static_cast<size_t>(last)]
                                 ? int8_t{1}
                                 : int8_t{-1};
                tree.nodes.push_back({u, node, pin});
            } else {
                tree.nodes.push_back({u, node, 0});
                int child = static_cast<int>(tree.nodes.size()) - 1;
                walk.push_back(u);
                on_walk[static_cast<size_t>(u)] = 1;
                self(self, child, depth + 1);
                on_walk[static_cast<size_t>(u)] = 0;
                walk.pop_back();
            }
        }
    };
    expand(expand, 0, 0);
    return tree;
}

}  // namespace spinlab
