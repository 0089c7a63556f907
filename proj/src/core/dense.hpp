#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace sign {

// Row-major dense matrix, 64-bit internally. Persisted form ("SGNM") is 32-bit.
struct DenseMatrix {
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<double> data; // n_rows * n_cols, row-major

    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : n_rows(rows), n_cols(cols), data(rows * cols, fill) {}

    double& at(std::size_t i, std::size_t j) { return data[i * n_cols + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * n_cols + j]; }

    double* row(std::size_t i) { return data.data() + i * n_cols; }
    const double* row(std::size_t i) const { return data.data() + i * n_cols; }

    bool same_shape(const DenseMatrix& o) const {
        return n_rows == o.n_rows && n_cols == o.n_cols;
    }
};

DenseMatrix dense_identity(std::size_t n);

// Dense products with a fixed accumulation order (deterministic for any
// thread count). matmul: A(n,k)·B(k,m); matmul_at_b: Aᵀ·B for A(n,k), B(n,m);
// matmul_a_bt: A·Bᵀ for A(n,m), B(k,m).
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix matmul_at_b(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix matmul_a_bt(const DenseMatrix& a, const DenseMatrix& b);

// Exact elementwise equality (bit-for-bit on the doubles).
bool bitwise_equal(const DenseMatrix& a, const DenseMatrix& b);

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);

// SGNM binary format: magic "SGNM", version byte 1, u64 LE rows, u64 LE cols,
// then rows*cols little-endian IEEE-754 binary32 values, row-major. Values are
// rounded to nearest-even on save and widened back to f64 on load.
void save_sgnm(const DenseMatrix& m, const std::string& path);
DenseMatrix load_sgnm(const std::string& path);
DenseMatrix parse_sgnm(const std::vector<std::uint8_t>& bytes, const std::string& origin);

std::vector<std::uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes_atomic(const std::string& path, const void* data, std::size_t size);

} // namespace sign
