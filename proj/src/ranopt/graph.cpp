#include "graph.hpp"

#include <algorithm>

namespace ranopt {

DirectedGraph::DirectedGraph(int n, std::vector<std::pair<int, int>> edges)
    : n_(n), edges_(std::move(edges)) {
    if (n <= 0) fail(ErrorCode::InvalidArgument, "graph needs at least one vertex");
    for (auto [from, to] : edges_) {
        if (from < 0 || from >= n || to < 0 || to >= n)
            fail(ErrorCode::IndexOutOfRange, "edge endpoint outside [n]");
    }
    std::sort(edges_.begin(), edges_.end());
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
}

bool DirectedGraph::has_edge(int from, int to) const {
    return std::binary_search(edges_.begin(), edges_.end(), std::make_pair(from, to));
}

DirectedGraph graph_of(const StochasticMatrix& a, double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0))
        fail(ErrorCode::GammaOutOfRange, "gamma must lie in (0, 1)");
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < a.dim(); ++i)
        for (int j = 0; j < a.dim(); ++j)
            if (a(i, j) > gamma) edges.emplace_back(j, i);
    return DirectedGraph(a.dim(), std::move(edges));
}

DirectedGraph union_graphs(std::span<const DirectedGraph> graphs) {
    if (graphs.empty()) fail(ErrorCode::InvalidArgument, "empty graph union");
    int n = graphs[0].vertices();
    std::vector<std::pair<int, int>> edges;
    for (const auto& g : graphs) {
        if (g.vertices() != n)
            fail(ErrorCode::DimensionMismatch, "graph union vertex-count mismatch");
        edges.insert(edges.end(), g.edges().begin(), g.edges().end());
    }
    return DirectedGraph(n, std::move(edges));
}

bool has_spanning_rooted_tree(const DirectedGraph& g) {
    int n = g.vertices();
    std::vector<std::vector<int>> out(n);
    for (auto [from, to] : g.edges())
        if (from != to) out[from].push_back(to);

    std::vector<char> seen(n);
    std::vector<int> stack;
    for (int root = 0; root < n; ++root) {
        std::fill(seen.begin(), seen.end(), 0);
        stack.assign(1, root);
        seen[root] = 1;
        int reached = 1;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            for (int w : out[v]) {
                if (!seen[w]) {
                    seen[w] = 1;
                    ++reached;
                    stack.push_back(w);
                }
            }
        }
        if (reached == n) return true;
    }
    return false;
}

UndirectedGraph::UndirectedGraph(int n, std::vector<std::pair<int, int>> edges)
    : n_(n), adj_(static_cast<size_t>(std::max(n, 0))) {
    if (n <= 0) fail(ErrorCode::InvalidArgument, "graph needs at least one vertex");
    for (auto [u, v] : edges) {
        if (u < 0 || u >= n || v < 0 || v >= n)
            fail(ErrorCode::IndexOutOfRange, "edge endpoint outside [n]");
        if (u == v) fail(ErrorCode::InvalidArgument, "self-loop in undirected graph");
        auto e = std::minmax(u, v);
        edges_.emplace_back(e.first, e.second);
    }
    std::sort(edges_.begin(), edges_.end());
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
    for (auto [u, v] : edges_) {
        adj_[u].push_back(v);
        adj_[v].push_back(u);
    }
    for (auto& nbrs : adj_) std::sort(nbrs.begin(), nbrs.end());
}

UndirectedGraph UndirectedGraph::cycle(int n) {
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
    return UndirectedGraph(n, std::move(edges));
}

UndirectedGraph UndirectedGraph::complete(int n) {
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) edges.emplace_back(i, j);
    return UndirectedGraph(n, std::move(edges));
}

UndirectedGraph UndirectedGraph::path(int n) {
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
    return UndirectedGraph(n, std::move(edges));
}

bool UndirectedGraph::connected() const {
    std::vector<char> seen(n_, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int reached = 1;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int w : adj_[v]) {
            if (!seen[w]) {
                seen[w] = 1;
                ++reached;
                stack.push_back(w);
            }
        }
    }
    return reached == n_;
}

} // namespace ranopt
