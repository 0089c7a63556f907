#include "core/operators.hpp"

#include <algorithm>
#include <cmath>

#include "core/error.hpp"
#include "core/parallel.hpp"

namespace sign {

namespace {

void require_undirected(const Graph& g, const char* what) {
    require(!g.directed, ErrorCode::InvalidArgument,
            std::string(what) + " requires an undirected graph");
}

// D^{-1/2} M D^{-1/2} with row sums of M as degrees; zero degrees map to zero.
SparseMatrix sym_scale(const SparseMatrix& m) {
    const std::vector<double> deg = m.row_sums();
    std::vector<double> inv_sqrt(deg.size());
    for (std::size_t i = 0; i < deg.size(); ++i)
        inv_sqrt[i] = deg[i] > 0.0 ? 1.0 / std::sqrt(deg[i]) : 0.0;
    SparseMatrix out = m;
    for (std::size_t r = 0; r < out.n_rows; ++r)
        for (std::size_t k = out.row_begin(r); k < out.row_end(r); ++k)
            out.values[k] *= inv_sqrt[r] * inv_sqrt[out.col_indices[k]];
    return out;
}

} // namespace

const char* operator_kind_name(OperatorKind kind) {
    switch (kind) {
        case OperatorKind::SimpleGcnAdj: return "gcn";
        case OperatorKind::SymNormAdj: return "sym";
        case OperatorKind::RowNormAdj: return "rownorm";
        case OperatorKind::NormLaplacian: return "laplacian";
        case OperatorKind::Ppr: return "ppr";
        case OperatorKind::Triangle: return "triangle";
        case OperatorKind::DirectedOut: return "directed_out";
        case OperatorKind::DirectedInTranspose: return "directed_in";
    }
    fail(ErrorCode::Internal, "unknown operator kind");
}

OperatorKind operator_kind_from_name(const std::string& name) {
    if (name == "gcn") return OperatorKind::SimpleGcnAdj;
    if (name == "sym") return OperatorKind::SymNormAdj;
    if (name == "rownorm") return OperatorKind::RowNormAdj;
    if (name == "laplacian") return OperatorKind::NormLaplacian;
    if (name == "ppr") return OperatorKind::Ppr;
    if (name == "triangle") return OperatorKind::Triangle;
    if (name == "directed_out") return OperatorKind::DirectedOut;
    if (name == "directed_in") return OperatorKind::DirectedInTranspose;
    fail(ErrorCode::Parse, "unknown operator kind '" + name + "'");
}

bool OperatorSpec::requires_directed() const {
    return kind == OperatorKind::DirectedOut || kind == OperatorKind::DirectedInTranspose;
}

void OperatorSpec::validate(bool graph_directed) const {
    require(power >= 1, ErrorCode::InvalidArgument, "operator power must be >= 1");
    if (kind == OperatorKind::Ppr) {
        require(alpha > 0.0 && alpha <= 1.0, ErrorCode::InvalidArgument,
                "ppr alpha must be in (0, 1]");
        require(iterations >= 1, ErrorCode::InvalidArgument, "ppr iterations must be >= 1");
    }
    if (requires_directed()) {
        require(graph_directed, ErrorCode::InvalidArgument,
                std::string(operator_kind_name(kind)) + " operator requires a directed graph");
    } else {
        require(!graph_directed, ErrorCode::InvalidArgument,
                std::string(operator_kind_name(kind)) + " operator requires undirected graph");
    }
}

bool OperatorSpec::same_family(const OperatorSpec& o) const {
    if (kind != o.kind) return false;
    if (kind != OperatorKind::Ppr) return true;
    return alpha == o.alpha && iterations == o.iterations &&
           ppr_row_normalize == o.ppr_row_normalize;
}

SparseMatrix gcn_normalized(const Graph& g) {
    require_undirected(g, "gcn operator");
    return sym_scale(add_self_loops(g).adjacency);
}

SparseMatrix sym_normalized(const Graph& g) {
    require_undirected(g, "sym operator");
    return sym_scale(g.adjacency);
}

SparseMatrix norm_laplacian(const Graph& g) {
    require_undirected(g, "laplacian operator");
    const SparseMatrix a = sym_normalized(g);
    std::vector<Triplet> triplets;
    triplets.reserve(a.nnz() + g.num_nodes);
    for (std::size_t r = 0; r < g.num_nodes; ++r) {
        triplets.push_back({r, r, 1.0});
        for (std::size_t k = a.row_begin(r); k < a.row_end(r); ++k)
            triplets.push_back({r, a.col_indices[k], -a.values[k]});
    }
    return sparse_from_triplets(g.num_nodes, g.num_nodes, std::move(triplets));
}

SparseMatrix row_normalized(const SparseMatrix& m) {
    require(m.n_rows == m.n_cols, ErrorCode::InvalidArgument, "row_normalized: matrix not square");
    for (double v : m.values)
        require(v >= 0.0, ErrorCode::InvalidArgument, "row_normalized: negative entry");
    SparseMatrix out = m;
    const std::vector<double> sums = m.row_sums();
    for (std::size_t r = 0; r < out.n_rows; ++r) {
        if (sums[r] <= 0.0) continue;
        const double inv = 1.0 / sums[r];
        for (std::size_t k = out.row_begin(r); k < out.row_end(r); ++k) out.values[k] *= inv;
    }
    return out;
}

SparseMatrix directed_normalized(const Graph& g, bool transpose) {
    require(g.directed, ErrorCode::InvalidArgument,
            "directed operator requires a directed graph");
    return row_normalized(transpose ? g.adjacency.transpose() : g.adjacency);
}

SparseMatrix triangle_counts(const Graph& g) {
    require_undirected(g, "triangle operator");
    const SparseMatrix& a = g.adjacency;
    const std::size_t n = g.num_nodes;

    std::vector<std::vector<Triplet>> per_row(n);
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            for (std::size_t k = a.row_begin(i); k < a.row_end(i); ++k) {
                const std::size_t j = a.col_indices[k];
                if (j == i) continue; // self-loops take no part in triangles
                // sorted-merge intersection of N(i) and N(j), skipping i and j
                std::size_t pi = a.row_begin(i), pj = a.row_begin(j);
                const std::size_t ei = a.row_end(i), ej = a.row_end(j);
                std::size_t count = 0;
                while (pi < ei && pj < ej) {
                    const std::size_t ci = a.col_indices[pi];
                    const std::size_t cj = a.col_indices[pj];
                    if (ci < cj) {
                        ++pi;
                    } else if (cj < ci) {
                        ++pj;
                    } else {
                        if (ci != i && ci != j) ++count;
                        ++pi;
                        ++pj;
                    }
                }
                if (count > 0)
                    per_row[i].push_back({i, j, static_cast<double>(count)});
            }
        }
    });

    std::vector<Triplet> triplets;
    for (auto& row : per_row)
        triplets.insert(triplets.end(), row.begin(), row.end());
    return sparse_from_triplets(n, n, std::move(triplets));
}

SparseMatrix triangle_operator(const Graph& g) {
    return row_normalized(triangle_counts(g));
}

DenseMatrix ppr_diffuse(const Graph& g, const DenseMatrix& x, double alpha,
                        std::size_t iterations) {
    require_undirected(g, "ppr operator");
    require(alpha > 0.0 && alpha <= 1.0, ErrorCode::InvalidArgument, "ppr alpha must be in (0, 1]");
    require(iterations >= 1, ErrorCode::InvalidArgument, "ppr iterations must be >= 1");
    require(x.n_rows == g.num_nodes, ErrorCode::InvalidArgument,
            "ppr_diffuse: feature rows != num_nodes");
    const SparseMatrix a = sym_normalized(g);
    DenseMatrix z = x;
    for (std::size_t it = 0; it < iterations; ++it) {
        DenseMatrix az = spmm(a, z);
        for (std::size_t i = 0; i < az.data.size(); ++i)
            az.data[i] = (1.0 - alpha) * az.data[i] + alpha * x.data[i];
        z = std::move(az);
    }
    return z;
}

DenseMatrix ppr_matrix_dense(const Graph& g, double alpha, std::size_t dense_limit) {
    require_undirected(g, "ppr operator");
    require(alpha > 0.0 && alpha <= 1.0, ErrorCode::InvalidArgument, "ppr alpha must be in (0, 1]");
    require(g.num_nodes <= dense_limit, ErrorCode::InvalidArgument,
            "ppr_matrix_dense: graph exceeds dense limit of " + std::to_string(dense_limit));
    const std::size_t n = g.num_nodes;
    const DenseMatrix a = sparse_to_dense(sym_normalized(g));
    DenseMatrix system(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) system.at(i, j) = -(1.0 - alpha) * a.at(i, j);
        system.at(i, i) += 1.0;
    }
    DenseMatrix rhs(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) rhs.at(i, i) = alpha;
    return dense_solve(std::move(system), std::move(rhs));
}

DenseMatrix dense_solve(DenseMatrix a, DenseMatrix b) {
    require(a.n_rows == a.n_cols, ErrorCode::InvalidArgument, "dense_solve: matrix not square");
    require(a.n_rows == b.n_rows, ErrorCode::InvalidArgument, "dense_solve: shape mismatch");
    const std::size_t n = a.n_rows;
    const std::size_t m = b.n_cols;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::fabs(a.at(r, col)) > std::fabs(a.at(pivot, col))) pivot = r;
        require(a.at(pivot, col) != 0.0, ErrorCode::InvalidArgument, "dense_solve: singular matrix");
        if (pivot != col) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a.at(col, j), a.at(pivot, j));
            for (std::size_t j = 0; j < m; ++j) std::swap(b.at(col, j), b.at(pivot, j));
        }
        const double inv = 1.0 / a.at(col, col);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a.at(r, col) * inv;
            if (f == 0.0) continue;
            a.at(r, col) = 0.0;
            for (std::size_t j = col + 1; j < n; ++j) a.at(r, j) -= f * a.at(col, j);
            for (std::size_t j = 0; j < m; ++j) b.at(r, j) -= f * b.at(col, j);
        }
    }
    for (std::size_t col = n; col-- > 0;) {
        const double inv = 1.0 / a.at(col, col);
        for (std::size_t j = 0; j < m; ++j) b.at(col, j) *= inv;
        for (std::size_t r = 0; r < col; ++r) {
            const double f = a.at(r, col);
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < m; ++j) b.at(r, j) -= f * b.at(col, j);
        }
    }
    return b;
}

DiffusionOperator DiffusionOperator::build(const OperatorSpec& spec, const Graph& g) {
    spec.validate(g.directed);
    DiffusionOperator op;
    op.spec_ = spec;
    switch (spec.kind) {
        case OperatorKind::SimpleGcnAdj: op.matrix_ = gcn_normalized(g); break;
        case OperatorKind::SymNormAdj: op.matrix_ = sym_normalized(g); break;
        case OperatorKind::RowNormAdj:
            require_undirected(g, "rownorm operator");
            op.matrix_ = row_normalized(g.adjacency);
            break;
        case OperatorKind::NormLaplacian: op.matrix_ = norm_laplacian(g); break;
        case OperatorKind::Ppr: op.matrix_ = sym_normalized(g); break;
        case OperatorKind::Triangle: op.matrix_ = triangle_operator(g); break;
        case OperatorKind::DirectedOut: op.matrix_ = directed_normalized(g, false); break;
        case OperatorKind::DirectedInTranspose:
            op.matrix_ = directed_normalized(g, true);
            break;
    }
    return op;
}

DenseMatrix DiffusionOperator::apply_once(const DenseMatrix& x) const {
    require(x.n_rows == matrix_.n_cols, ErrorCode::InvalidArgument,
            "operator apply: feature rows != num_nodes");
    if (spec_.kind != OperatorKind::Ppr) return spmm(matrix_, x);

    const double alpha = spec_.alpha;
    DenseMatrix z = x;
    for (std::size_t it = 0; it < spec_.iterations; ++it) {
        DenseMatrix az = spmm(matrix_, z);
        for (std::size_t i = 0; i < az.data.size(); ++i)
            az.data[i] = (1.0 - alpha) * az.data[i] + alpha * x.data[i];
        z = std::move(az);
    }
    if (spec_.ppr_row_normalize) {
        // Row sums of the truncated operator, obtained by diffusing the ones
        // vector; dividing Z by them equals applying the row-normalized matrix.
        DenseMatrix ones(x.n_rows, 1, 1.0);
        DenseMatrix s = ones;
        for (std::size_t it = 0; it < spec_.iterations; ++it) {
            DenseMatrix as = spmm(matrix_, s);
            for (std::size_t i = 0; i < as.data.size(); ++i)
                as.data[i] = (1.0 - alpha) * as.data[i] + alpha;
            s = std::move(as);
        }
        for (std::size_t r = 0; r < z.n_rows; ++r) {
            const double inv = 1.0 / s.at(r, 0); // >= alpha > 0 always
            for (std::size_t j = 0; j < z.n_cols; ++j) z.at(r, j) *= inv;
        }
    }
    return z;
}

DenseMatrix DiffusionOperator::apply(const DenseMatrix& x) const {
    DenseMatrix z = apply_once(x);
    for (std::size_t p = 1; p < spec_.power; ++p) z = apply_once(z);
    return z;
}

} // namespace sign
