#pragma once

#include <cstddef>
#include <vector>

#include "core/dense.hpp"

namespace sign {

struct Triplet {
    std::size_t row = 0;
    std::size_t col = 0;
    double value = 0.0;
};

// CSR, canonical form: per-row column indices strictly increasing, duplicates
// merged, no explicit zeros.
struct SparseMatrix {
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<std::size_t> row_offsets; // n_rows + 1
    std::vector<std::size_t> col_indices;
    std::vector<double> values;

    SparseMatrix() : row_offsets(1, 0) {}
    SparseMatrix(std::size_t rows, std::size_t cols)
        : n_rows(rows), n_cols(cols), row_offsets(rows + 1, 0) {}

    std::size_t nnz() const { return col_indices.size(); }
    std::size_t row_begin(std::size_t r) const { return row_offsets[r]; }
    std::size_t row_end(std::size_t r) const { return row_offsets[r + 1]; }

    // Canonical-form walk; throws Internal on violation.
    void validate() const;

    SparseMatrix transpose() const;
    bool is_symmetric() const; // exact, entry-for-entry
    std::vector<double> row_sums() const;
    double get(std::size_t r, std::size_t c) const; // 0.0 if absent
};

// Duplicates merged by summation; entries whose merged value is exactly zero
// are dropped.
SparseMatrix sparse_from_triplets(std::size_t n_rows, std::size_t n_cols,
                                  std::vector<Triplet> triplets);

SparseMatrix sparse_identity(std::size_t n);
DenseMatrix sparse_to_dense(const SparseMatrix& a);

// Sparse * dense. Per output row the accumulation follows CSR entry order, so
// the result is bitwise-identical for any thread count.
DenseMatrix spmm(const SparseMatrix& a, const DenseMatrix& x);

} // namespace sign
