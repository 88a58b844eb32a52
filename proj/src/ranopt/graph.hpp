#ifndef RANOPT_GRAPH_HPP
#define RANOPT_GRAPH_HPP

#include <span>
#include <utility>
#include <vector>

#include "matrix.hpp"

namespace ranopt {

/// Directed graph on [n]. An edge (j, i) means information flows j -> i,
/// matching the edge set E^gamma(A) = {(j, i) : a_ij > gamma}.
class DirectedGraph {
public:
    DirectedGraph(int n, std::vector<std::pair<int, int>> edges);

    int vertices() const { return n_; }
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }
    bool has_edge(int from, int to) const;

private:
    int n_ = 0;
    std::vector<std::pair<int, int>> edges_; // sorted, deduplicated
};

/// Threshold graph of A at level gamma in (0, 1): edge (j, i) iff a_ij > gamma,
/// strictly (ties at gamma excluded).
DirectedGraph graph_of(const StochasticMatrix& a, double gamma);

DirectedGraph union_graphs(std::span<const DirectedGraph> graphs);

/// True iff some vertex reaches every vertex along directed edges.
/// Decided exactly by breadth-first search from each candidate root.
bool has_spanning_rooted_tree(const DirectedGraph& g);

/// Simple undirected graph, the substrate for gossip-style chains.
class UndirectedGraph {
public:
    UndirectedGraph(int n, std::vector<std::pair<int, int>> edges);

    static UndirectedGraph cycle(int n);
    static UndirectedGraph complete(int n);
    static UndirectedGraph path(int n);

    int vertices() const { return n_; }
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }
    const std::vector<int>& neighbors(int v) const { return adj_[v]; }
    int degree(int v) const { return static_cast<int>(adj_[v].size()); }
    bool connected() const;

private:
    int n_ = 0;
    std::vector<std::pair<int, int>> edges_;
    std::vector<std::vector<int>> adj_;
};

} // namespace ranopt

#endif
