#include "core/graph.hpp"

#include <bit>
#include <cctype>
#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "core/error.hpp"
#include "core/kvfile.hpp"

namespace sign {

namespace {

[[noreturn]] void line_error(const std::string& path, std::size_t line_no, const std::string& what) {
    fail(ErrorCode::Parse, path + ":" + std::to_string(line_no) + ": " + what);
}

} // namespace

Graph graph_from_edges(std::size_t num_nodes, const std::vector<Triplet>& edges, bool directed) {
    std::vector<Triplet> triplets;
    triplets.reserve(directed ? edges.size() : edges.size() * 2);
    for (const Triplet& e : edges) {
        require(e.row < num_nodes && e.col < num_nodes, ErrorCode::InvalidArgument,
                "edge endpoint out of range");
        require(e.value > 0.0, ErrorCode::InvalidArgument, "edge weight must be positive");
        triplets.push_back(e);
        if (!directed && e.row != e.col) triplets.push_back({e.col, e.row, e.value});
    }
    Graph g;
    g.num_nodes = num_nodes;
    g.directed = directed;
    g.adjacency = sparse_from_triplets(num_nodes, num_nodes, std::move(triplets));
    return g;
}

Graph load_edge_list(const std::string& path, bool directed,
                     std::optional<std::size_t> num_nodes) {
    std::ifstream in(path);
    require(in.good(), ErrorCode::Io, "cannot open edge list: " + path);

    std::vector<Triplet> edges;
    std::size_t max_id = 0;
    bool any = false;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::size_t start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos || line[start] == '#') continue;

        std::istringstream tok(line);
        long long src = -1, dst = -1;
        double w = 1.0;
        if (!(tok >> src >> dst)) line_error(path, line_no, "expected 'src dst [weight]'");
        std::string rest;
        if (tok >> rest) {
            char* endp = nullptr;
            w = std::strtod(rest.c_str(), &endp);
            if (endp == rest.c_str() || *endp != '\0')
                line_error(path, line_no, "malformed weight '" + rest + "'");
            std::string extra;
            if (tok >> extra) line_error(path, line_no, "trailing token '" + extra + "'");
        }
        if (src < 0 || dst < 0) line_error(path, line_no, "node ids must be non-negative");
        if (!(w > 0.0)) line_error(path, line_no, "edge weight must be positive");
        const auto s = static_cast<std::size_t>(src);
        const auto d = static_cast<std::size_t>(dst);
        if (num_nodes && (s >= *num_nodes || d >= *num_nodes))
            line_error(path, line_no,
                       "node id exceeds num_nodes=" + std::to_string(*num_nodes));
        max_id = std::max({max_id, s, d});
        any = true;
        edges.push_back({s, d, w});
    }
    const std::size_t n = num_nodes ? *num_nodes : (any ? max_id + 1 : 0);
    return graph_from_edges(n, edges, directed);
}

void save_edge_list(const Graph& g, const std::string& path) {
    std::string out;
    char buf[80];
    const SparseMatrix& a = g.adjacency;
    for (std::size_t r = 0; r < a.n_rows; ++r) {
        for (std::size_t k = a.row_begin(r); k < a.row_end(r); ++k) {
            const std::size_t c = a.col_indices[k];
            if (!g.directed && c < r) continue; // upper triangle only
            const double w = a.values[k];
            if (w == 1.0) {
                std::snprintf(buf, sizeof(buf), "%zu %zu\n", r, c);
            } else {
                std::snprintf(buf, sizeof(buf), "%zu %zu %.17g\n", r, c, w);
            }
            out += buf;
        }
    }
    write_file_bytes_atomic(path, out.data(), out.size());
}

Graph symmetrize(const Graph& g) {
    require(g.directed, ErrorCode::InvalidArgument, "symmetrize: graph is already undirected");
    const SparseMatrix t = g.adjacency.transpose();
    std::vector<Triplet> triplets;
    triplets.reserve(g.adjacency.nnz() * 2);
    for (std::size_t r = 0; r < g.num_nodes; ++r) {
        for (std::size_t k = g.adjacency.row_begin(r); k < g.adjacency.row_end(r); ++k)
            triplets.push_back({r, g.adjacency.col_indices[k], 0.5 * g.adjacency.values[k]});
        for (std::size_t k = t.row_begin(r); k < t.row_end(r); ++k)
            triplets.push_back({r, t.col_indices[k], 0.5 * t.values[k]});
    }
    Graph out;
    out.num_nodes = g.num_nodes;
    out.directed = false;
    out.adjacency = sparse_from_triplets(g.num_nodes, g.num_nodes, std::move(triplets));
    return out;
}

Graph add_self_loops(const Graph& g) {
    std::vector<Triplet> triplets;
    triplets.reserve(g.adjacency.nnz() + g.num_nodes);
    for (std::size_t r = 0; r < g.num_nodes; ++r) {
        triplets.push_back({r, r, 1.0});
        for (std::size_t k = g.adjacency.row_begin(r); k < g.adjacency.row_end(r); ++k)
            triplets.push_back({r, g.adjacency.col_indices[k], g.adjacency.values[k]});
    }
    Graph out;
    out.num_nodes = g.num_nodes;
    out.directed = g.directed;
    out.adjacency = sparse_from_triplets(g.num_nodes, g.num_nodes, std::move(triplets));
    return out;
}

Graph strip_self_loops(const Graph& g) {
    std::vector<Triplet> triplets;
    triplets.reserve(g.adjacency.nnz());
    for (std::size_t r = 0; r < g.num_nodes; ++r)
        for (std::size_t k = g.adjacency.row_begin(r); k < g.adjacency.row_end(r); ++k)
            if (g.adjacency.col_indices[k] != r)
                triplets.push_back({r, g.adjacency.col_indices[k], g.adjacency.values[k]});
    Graph out;
    out.num_nodes = g.num_nodes;
    out.directed = g.directed;
    out.adjacency = sparse_from_triplets(g.num_nodes, g.num_nodes, std::move(triplets));
    return out;
}

std::vector<double> degrees(const Graph& g) { return g.adjacency.row_sums(); }

std::size_t num_stored_edges(const Graph& g) { return g.adjacency.nnz(); }

std::uint64_t graph_fingerprint(const Graph& g) {
    Fnv1a h;
    h.add_byte(g.directed ? 1 : 0);
    h.add_u64(g.num_nodes);
    h.add_u64(g.adjacency.n_cols);
    for (std::size_t v : g.adjacency.row_offsets) h.add_u64(v);
    for (std::size_t v : g.adjacency.col_indices) h.add_u64(v);
    for (double v : g.adjacency.values) h.add_u64(std::bit_cast<std::uint64_t>(v));
    return h.value();
}

} // namespace sign
