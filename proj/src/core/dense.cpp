#include "core/dense.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "core/error.hpp"
#include "core/parallel.hpp"

namespace sign {

namespace {

constexpr std::uint8_t kMagic[4] = {0x53, 0x47, 0x4E, 0x4D}; // "SGNM"
constexpr std::uint8_t kVersion = 1;

void put_u64_le(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_u64_le(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
}

} // namespace

DenseMatrix dense_identity(std::size_t n) {
    DenseMatrix m(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    require(a.n_cols == b.n_rows, ErrorCode::InvalidArgument,
            "matmul: inner dimensions disagree");
    DenseMatrix out(a.n_rows, b.n_cols, 0.0);
    parallel_for(a.n_rows, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            double* dst = out.row(i);
            const double* ai = a.row(i);
            for (std::size_t k = 0; k < a.n_cols; ++k) {
                const double v = ai[k];
                if (v == 0.0) continue;
                const double* bk = b.row(k);
                for (std::size_t j = 0; j < b.n_cols; ++j) dst[j] += v * bk[j];
            }
        }
    });
    return out;
}

DenseMatrix matmul_at_b(const DenseMatrix& a, const DenseMatrix& b) {
    require(a.n_rows == b.n_rows, ErrorCode::InvalidArgument,
            "matmul_at_b: row counts disagree");
    DenseMatrix out(a.n_cols, b.n_cols, 0.0);
    parallel_for(a.n_cols, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            double* dst = out.row(i);
            for (std::size_t k = 0; k < a.n_rows; ++k) {
                const double v = a.at(k, i);
                if (v == 0.0) continue;
                const double* bk = b.row(k);
                for (std::size_t j = 0; j < b.n_cols; ++j) dst[j] += v * bk[j];
            }
        }
    });
    return out;
}

DenseMatrix matmul_a_bt(const DenseMatrix& a, const DenseMatrix& b) {
    require(a.n_cols == b.n_cols, ErrorCode::InvalidArgument,
            "matmul_a_bt: column counts disagree");
    DenseMatrix out(a.n_rows, b.n_rows, 0.0);
    parallel_for(a.n_rows, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            double* dst = out.row(i);
            const double* ai = a.row(i);
            for (std::size_t k = 0; k < b.n_rows; ++k) {
                const double* bk = b.row(k);
                double acc = 0.0;
                for (std::size_t j = 0; j < a.n_cols; ++j) acc += ai[j] * bk[j];
                dst[k] = acc;
            }
        }
    });
    return out;
}

bool bitwise_equal(const DenseMatrix& a, const DenseMatrix& b) {
    if (!a.same_shape(b)) return false;
    return std::memcmp(a.data.data(), b.data.data(), a.data.size() * sizeof(double)) == 0;
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
    require(a.same_shape(b), ErrorCode::InvalidArgument, "max_abs_diff: shape mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i)
        m = std::max(m, std::fabs(a.data[i] - b.data[i]));
    return m;
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), ErrorCode::Io, "cannot open file: " + path);
    in.seekg(0, std::ios::end);
    const auto size = in.tellg();
    require(size >= 0, ErrorCode::Io, "cannot stat file: " + path);
    in.seekg(0, std::ios::beg);
    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(size));
    if (size > 0) in.read(reinterpret_cast<char*>(bytes.data()), size);
    require(in.good(), ErrorCode::Io, "read failed: " + path);
    return bytes;
}

// Writes to <path>.tmp then renames, so an interrupted write never leaves a
// plausible-looking file at the final path.
void write_file_bytes_atomic(const std::string& path, const void* data, std::size_t size) {
    const std::filesystem::path parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) {
        std::error_code dir_ec;
        std::filesystem::create_directories(parent, dir_ec);
        // A failure here surfaces as "cannot open for write" below.
    }
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        require(out.good(), ErrorCode::Io, "cannot open for write: " + tmp);
        if (size > 0) out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
        require(out.good(), ErrorCode::Io, "write failed: " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    require(!ec, ErrorCode::Io, "rename failed: " + tmp + " -> " + path + ": " + ec.message());
}

void save_sgnm(const DenseMatrix& m, const std::string& path) {
    std::vector<std::uint8_t> bytes;
    bytes.reserve(13 + m.data.size() * 4);
    bytes.insert(bytes.end(), kMagic, kMagic + 4);
    bytes.push_back(kVersion);
    put_u64_le(bytes, m.n_rows);
    put_u64_le(bytes, m.n_cols);
    for (double d : m.data) {
        const auto u = std::bit_cast<std::uint32_t>(static_cast<float>(d));
        for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
    }
    write_file_bytes_atomic(path, bytes.data(), bytes.size());
}

DenseMatrix parse_sgnm(const std::vector<std::uint8_t>& bytes, const std::string& origin) {
    require(bytes.size() >= 21, ErrorCode::Corrupt, origin + ": truncated SGNM header");
    require(std::memcmp(bytes.data(), kMagic, 4) == 0, ErrorCode::Corrupt,
            origin + ": bad SGNM magic");
    require(bytes[4] == kVersion, ErrorCode::Corrupt,
            origin + ": unsupported SGNM version " + std::to_string(bytes[4]));
    const std::uint64_t rows = get_u64_le(bytes.data() + 5);
    const std::uint64_t cols = get_u64_le(bytes.data() + 13);
    const std::uint64_t count = rows * cols;
    require(bytes.size() == 21 + count * 4, ErrorCode::Corrupt,
            origin + ": SGNM payload size mismatch");
    DenseMatrix m(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols));
    const std::uint8_t* p = bytes.data() + 21;
    for (std::uint64_t i = 0; i < count; ++i, p += 4) {
        std::uint32_t u = 0;
        for (int b = 0; b < 4; ++b) u |= static_cast<std::uint32_t>(p[b]) << (8 * b);
        m.data[i] = static_cast<double>(std::bit_cast<float>(u));
    }
    return m;
}

DenseMatrix load_sgnm(const std::string& path) {
    return parse_sgnm(read_file_bytes(path), path);
}

} // namespace sign
