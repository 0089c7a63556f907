#include "core/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "core/error.hpp"
#include "core/parallel.hpp"

namespace sign {

void SparseMatrix::validate() const {
    require(row_offsets.size() == n_rows + 1, ErrorCode::Internal, "csr: bad row_offsets length");
    require(row_offsets.front() == 0, ErrorCode::Internal, "csr: row_offsets[0] != 0");
    require(row_offsets.back() == col_indices.size(), ErrorCode::Internal,
            "csr: row_offsets end != nnz");
    require(col_indices.size() == values.size(), ErrorCode::Internal,
            "csr: col/value length mismatch");
    for (std::size_t r = 0; r < n_rows; ++r) {
        require(row_offsets[r] <= row_offsets[r + 1], ErrorCode::Internal,
                "csr: decreasing row_offsets at row " + std::to_string(r));
        for (std::size_t k = row_offsets[r]; k < row_offsets[r + 1]; ++k) {
            require(col_indices[k] < n_cols, ErrorCode::Internal,
                    "csr: column out of range at row " + std::to_string(r));
            if (k > row_offsets[r])
                require(col_indices[k - 1] < col_indices[k], ErrorCode::Internal,
                        "csr: unsorted or duplicate column in row " + std::to_string(r));
            require(values[k] != 0.0, ErrorCode::Internal,
                    "csr: explicit zero stored at row " + std::to_string(r));
        }
    }
}

SparseMatrix SparseMatrix::transpose() const {
    SparseMatrix t(n_cols, n_rows);
    std::vector<std::size_t> counts(n_cols, 0);
    for (std::size_t c : col_indices) counts[c]++;
    t.row_offsets.assign(n_cols + 1, 0);
    for (std::size_t c = 0; c < n_cols; ++c) t.row_offsets[c + 1] = t.row_offsets[c] + counts[c];
    t.col_indices.resize(nnz());
    t.values.resize(nnz());
    std::vector<std::size_t> cursor(t.row_offsets.begin(), t.row_offsets.end() - 1);
    for (std::size_t r = 0; r < n_rows; ++r) {
        for (std::size_t k = row_offsets[r]; k < row_offsets[r + 1]; ++k) {
            const std::size_t c = col_indices[k];
            t.col_indices[cursor[c]] = r;
            t.values[cursor[c]] = values[k];
            cursor[c]++;
        }
    }
    // Row-major scan of the source emits ascending rows per target row.
    return t;
}

bool SparseMatrix::is_symmetric() const {
    if (n_rows != n_cols) return false;
    const SparseMatrix t = transpose();
    return t.row_offsets == row_offsets && t.col_indices == col_indices && t.values == values;
}

std::vector<double> SparseMatrix::row_sums() const {
    std::vector<double> sums(n_rows, 0.0);
    for (std::size_t r = 0; r < n_rows; ++r)
        for (std::size_t k = row_offsets[r]; k < row_offsets[r + 1]; ++k) sums[r] += values[k];
    return sums;
}

double SparseMatrix::get(std::size_t r, std::size_t c) const {
    const auto begin = col_indices.begin() + static_cast<std::ptrdiff_t>(row_offsets[r]);
    const auto end = col_indices.begin() + static_cast<std::ptrdiff_t>(row_offsets[r + 1]);
    const auto it = std::lower_bound(begin, end, c);
    if (it == end || *it != c) return 0.0;
    return values[static_cast<std::size_t>(it - col_indices.begin())];
}

SparseMatrix sparse_from_triplets(std::size_t n_rows, std::size_t n_cols,
                                  std::vector<Triplet> triplets) {
    for (const Triplet& t : triplets) {
        require(t.row < n_rows && t.col < n_cols, ErrorCode::InvalidArgument,
                "triplet index out of range");
    }
    std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    SparseMatrix m(n_rows, n_cols);
    m.col_indices.reserve(triplets.size());
    m.values.reserve(triplets.size());
    std::size_t i = 0;
    for (std::size_t r = 0; r < n_rows; ++r) {
        while (i < triplets.size() && triplets[i].row == r) {
            const std::size_t c = triplets[i].col;
            double v = 0.0;
            while (i < triplets.size() && triplets[i].row == r && triplets[i].col == c) {
                v += triplets[i].value;
                ++i;
            }
            if (v != 0.0) {
                m.col_indices.push_back(c);
                m.values.push_back(v);
            }
        }
        m.row_offsets[r + 1] = m.col_indices.size();
    }
    return m;
}

SparseMatrix sparse_identity(std::size_t n) {
    SparseMatrix m(n, n);
    m.col_indices.resize(n);
    m.values.assign(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        m.col_indices[i] = i;
        m.row_offsets[i + 1] = i + 1;
    }
    return m;
}

DenseMatrix sparse_to_dense(const SparseMatrix& a) {
    DenseMatrix d(a.n_rows, a.n_cols, 0.0);
    for (std::size_t r = 0; r < a.n_rows; ++r)
        for (std::size_t k = a.row_begin(r); k < a.row_end(r); ++k)
            d.at(r, a.col_indices[k]) = a.values[k];
    return d;
}

DenseMatrix spmm(const SparseMatrix& a, const DenseMatrix& x) {
    require(a.n_cols == x.n_rows, ErrorCode::InvalidArgument,
            "spmm: inner dimension mismatch (" + std::to_string(a.n_cols) + " vs " +
                std::to_string(x.n_rows) + ")");
    DenseMatrix out(a.n_rows, x.n_cols, 0.0);
    const std::size_t d = x.n_cols;
    parallel_for(a.n_rows, [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) {
            double* dst = out.row(r);
            for (std::size_t k = a.row_begin(r); k < a.row_end(r); ++k) {
                const double v = a.values[k];
                const double* src = x.row(a.col_indices[k]);
                for (std::size_t j = 0; j < d; ++j) dst[j] += v * src[j];
            }
        }
    });
    return out;
}

} // namespace sign
