#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/graph.hpp"

namespace sign {

enum class OperatorKind {
    SimpleGcnAdj,        // D~^{-1/2} (I + W) D~^{-1/2}
    SymNormAdj,          // D^{-1/2} W D^{-1/2}
    RowNormAdj,          // D^{-1} W
    NormLaplacian,       // I - D^{-1/2} W D^{-1/2}
    Ppr,                 // truncated alpha (I - (1-alpha) A_sym)^{-1}
    Triangle,            // row-normalized per-edge triangle counts
    DirectedOut,         // row-normalized W_d
    DirectedInTranspose, // row-normalized W_d^T
};

const char* operator_kind_name(OperatorKind kind);
OperatorKind operator_kind_from_name(const std::string& name);

struct OperatorSpec {
    OperatorKind kind = OperatorKind::SimpleGcnAdj;
    std::size_t power = 1;
    // Ppr only:
    double alpha = 0.05;
    std::size_t iterations = 50;
    bool ppr_row_normalize = false; // normalize rows of the truncated operator

    void validate(bool graph_directed) const;
    bool requires_directed() const;
    // Same base operator (kind + Ppr parameters); such specs share one
    // incremental power sweep during precompute.
    bool same_family(const OperatorSpec& o) const;
};

SparseMatrix gcn_normalized(const Graph& g);  // undirected only
SparseMatrix sym_normalized(const Graph& g);  // undirected only; zero degrees give zero rows
SparseMatrix norm_laplacian(const Graph& g);  // undirected only
SparseMatrix row_normalized(const SparseMatrix& m); // square, nonnegative; zero rows stay zero
SparseMatrix directed_normalized(const Graph& g, bool transpose); // directed only

// Raw per-edge triangle counts: entry (i,j) = number of triangles containing
// edge (i,j). Self-loops are ignored and weights play no role in counting.
SparseMatrix triangle_counts(const Graph& g); // undirected only
// Row-normalized counts (the operator actually used for diffusion).
SparseMatrix triangle_operator(const Graph& g);

// `iterations` steps of Z <- (1-alpha) A_sym Z + alpha X starting from Z = X,
// i.e. the truncated Neumann series of alpha (I - (1-alpha) A_sym)^{-1} X.
DenseMatrix ppr_diffuse(const Graph& g, const DenseMatrix& x, double alpha,
                        std::size_t iterations);

// Exact diffusion matrix via dense solve; test/oracle path, refuses large graphs.
DenseMatrix ppr_matrix_dense(const Graph& g, double alpha, std::size_t dense_limit = 2000);

// An applicable diffusion operator: one build per spec family, `power`
// successive applications per use. The Ppr kind stays matrix-free (it holds
// only the sparse transition matrix).
class DiffusionOperator {
public:
    static DiffusionOperator build(const OperatorSpec& spec, const Graph& g);

    // One application of the base operator.
    DenseMatrix apply_once(const DenseMatrix& x) const;
    // spec().power successive applications.
    DenseMatrix apply(const DenseMatrix& x) const;

    const OperatorSpec& spec() const { return spec_; }

private:
    OperatorSpec spec_;
    SparseMatrix matrix_; // the operator itself, or A_sym for Ppr
};

// Dense LU solve of A X = B with partial pivoting (small systems only).
DenseMatrix dense_solve(DenseMatrix a, DenseMatrix b);

} // namespace sign
