#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "core/sparse.hpp"

namespace sign {

// Immutable after construction; safe to share across threads.
struct Graph {
    std::size_t num_nodes = 0;
    SparseMatrix adjacency; // square, num_nodes x num_nodes
    bool directed = false;
};

// Builds a graph from raw edges. For undirected graphs every edge (i,j), i != j,
// is stored in both directions; duplicates merge by summing weights. Weights
// must be > 0.
Graph graph_from_edges(std::size_t num_nodes, const std::vector<Triplet>& edges, bool directed);

// Text edge list: one "src dst [weight]" per line, 0-based ids, weight defaults
// to 1.0, '#'-prefixed comment lines and blank lines ignored. If num_nodes is
// absent it becomes max(id)+1.
Graph load_edge_list(const std::string& path, bool directed,
                     std::optional<std::size_t> num_nodes = std::nullopt);

// One line per edge: undirected graphs emit the upper triangle once, directed
// graphs emit every stored entry. Weight is omitted when exactly 1.
void save_edge_list(const Graph& g, const std::string& path);

// W = (W_d + W_d^T) / 2; requires a directed input.
Graph symmetrize(const Graph& g);

// I + W; an existing self-loop weight is incremented by 1.
Graph add_self_loops(const Graph& g);

// Drops diagonal entries.
Graph strip_self_loops(const Graph& g);

// Row sums of the adjacency (the diagonal degree matrix's diagonal).
std::vector<double> degrees(const Graph& g);

std::size_t num_stored_edges(const Graph& g); // nnz of the adjacency

// FNV-1a over the canonical CSR arrays plus the directed flag; detects stale
// feature caches after graph edits.
std::uint64_t graph_fingerprint(const Graph& g);

} // namespace sign
