#include "core/bundle.hpp"

#include <algorithm>
#include <filesystem>
#include <numeric>

#include "core/error.hpp"

namespace sign {

namespace {

std::string block_file_name(std::size_t index) {
    return "block_" + std::to_string(index) + ".sgnm";
}

std::string key_n(const char* stem, std::size_t n, const char* field = nullptr) {
    std::string k = std::string(stem) + "." + std::to_string(n);
    if (field != nullptr) k += std::string(".") + field;
    return k;
}

} // namespace

void append_operator_spec(KvFile& kv, std::size_t index, const OperatorSpec& spec) {
    kv.set(key_n("operator", index, "kind"), operator_kind_name(spec.kind));
    kv.set_u64(key_n("operator", index, "power"), spec.power);
    if (spec.kind == OperatorKind::Ppr) {
        kv.set_double(key_n("operator", index, "alpha"), spec.alpha);
        kv.set_u64(key_n("operator", index, "iterations"), spec.iterations);
        if (spec.ppr_row_normalize)
            kv.set_bool(key_n("operator", index, "rownorm"), true);
    }
}

OperatorSpec read_operator_spec(const KvFile& kv, std::size_t index) {
    OperatorSpec spec;
    const OperatorSpec defaults;
    spec.kind = operator_kind_from_name(kv.get(key_n("operator", index, "kind")));
    spec.power = kv.get_u64_or(key_n("operator", index, "power"), defaults.power);
    if (spec.kind == OperatorKind::Ppr) {
        spec.alpha = kv.get_double_or(key_n("operator", index, "alpha"), defaults.alpha);
        spec.iterations =
            kv.get_u64_or(key_n("operator", index, "iterations"), defaults.iterations);
        spec.ppr_row_normalize = kv.get_bool_or(key_n("operator", index, "rownorm"), false);
    }
    return spec;
}

FeatureBundle precompute_features(const Graph& g, const DenseMatrix& x,
                                  const std::vector<OperatorSpec>& specs) {
    require(x.n_rows == g.num_nodes, ErrorCode::InvalidArgument,
            "precompute: feature rows (" + std::to_string(x.n_rows) +
                ") != num_nodes (" + std::to_string(g.num_nodes) + ")");
    for (const OperatorSpec& s : specs) s.validate(g.directed);

    FeatureBundle b;
    b.base = x;
    b.specs = specs;
    b.graph_fingerprint = graph_fingerprint(g);
    b.diffused.resize(specs.size());

    std::vector<bool> done(specs.size(), false);
    for (std::size_t i = 0; i < specs.size(); ++i) {
        if (done[i]) continue;
        std::vector<std::size_t> family;
        for (std::size_t j = i; j < specs.size(); ++j)
            if (!done[j] && specs[i].same_family(specs[j])) family.push_back(j);
        std::stable_sort(family.begin(), family.end(), [&](std::size_t a, std::size_t c) {
            return specs[a].power < specs[c].power;
        });

        const DiffusionOperator op = DiffusionOperator::build(specs[i], g);
        DenseMatrix y = x;
        std::size_t current_power = 0;
        for (std::size_t j : family) {
            while (current_power < specs[j].power) {
                y = op.apply_once(y);
                ++current_power;
            }
            b.diffused[j] = y;
            done[j] = true;
        }
    }
    return b;
}

std::string save_bundle(const FeatureBundle& b, const std::string& dir) {
    require(b.diffused.size() == b.specs.size(), ErrorCode::Internal,
            "bundle: diffused count != spec count");
    for (const DenseMatrix& m : b.diffused)
        require(m.n_rows == b.base.n_rows && m.n_cols == b.base.n_cols, ErrorCode::Internal,
                "bundle: block shape mismatch");

    std::filesystem::create_directories(dir);
    const std::size_t r = b.specs.size();

    KvFile kv;
    kv.set_u64("version", 1);
    kv.set_u64("num_nodes", b.num_nodes());
    kv.set_u64("feature_dim", b.feature_dim());
    kv.set("graph_fingerprint", hex_u64(b.graph_fingerprint));
    kv.set_u64("num_operators", r);
    for (std::size_t n = 1; n <= r; ++n) append_operator_spec(kv, n, b.specs[n - 1]);
    for (std::size_t n = 0; n <= r; ++n) {
        const std::string name = block_file_name(n);
        const std::string path = (std::filesystem::path(dir) / name).string();
        save_sgnm(n == 0 ? b.base : b.diffused[n - 1], path);
        kv.set(key_n("file", n), name);
        kv.set(key_n("checksum", n), hex_u64(fnv1a_file(path)));
    }

    const std::string manifest = (std::filesystem::path(dir) / "manifest.txt").string();
    kv.write_file(manifest);
    return manifest;
}

FeatureBundle load_bundle(const std::string& dir, std::uint64_t expected_fingerprint,
                          std::string* warning) {
    const std::string manifest = (std::filesystem::path(dir) / "manifest.txt").string();
    require(std::filesystem::exists(manifest), ErrorCode::Io,
            "bundle manifest missing: " + manifest);
    const KvFile kv = KvFile::parse_file(manifest);

    const std::uint64_t version = kv.get_u64("version");
    require(version == 1, ErrorCode::Parse,
            manifest + ": unsupported bundle version " + std::to_string(version));

    FeatureBundle b;
    const std::uint64_t n = kv.get_u64("num_nodes");
    const std::uint64_t d = kv.get_u64("feature_dim");
    b.graph_fingerprint = parse_hex_u64(kv.get("graph_fingerprint"), manifest);
    const std::uint64_t r = kv.get_u64("num_operators");

    for (std::size_t i = 1; i <= r; ++i) b.specs.push_back(read_operator_spec(kv, i));
    b.diffused.resize(r);
    for (std::size_t i = 0; i <= r; ++i) {
        const std::string name = kv.get(key_n("file", i));
        const std::string path = (std::filesystem::path(dir) / name).string();
        require(std::filesystem::exists(path), ErrorCode::Io, "bundle block missing: " + path);
        const std::uint64_t expect = parse_hex_u64(kv.get(key_n("checksum", i)), manifest);
        const std::uint64_t actual = fnv1a_file(path);
        require(actual == expect, ErrorCode::Corrupt,
                path + ": checksum mismatch (manifest " + hex_u64(expect) + ", file " +
                    hex_u64(actual) + ")");
        DenseMatrix m = load_sgnm(path);
        require(m.n_rows == n && m.n_cols == d, ErrorCode::Corrupt,
                path + ": block shape disagrees with manifest");
        if (i == 0)
            b.base = std::move(m);
        else
            b.diffused[i - 1] = std::move(m);
    }

    if (expected_fingerprint != 0 && expected_fingerprint != b.graph_fingerprint &&
        warning != nullptr) {
        *warning += "bundle graph_fingerprint " + hex_u64(b.graph_fingerprint) +
                    " does not match expected " + hex_u64(expected_fingerprint) +
                    " (stale cache?)";
    }
    return b;
}

FeatureBundle slice_rows(const FeatureBundle& b, const std::vector<std::size_t>& rows) {
    const std::size_t n = b.num_nodes();
    const std::size_t d = b.feature_dim();
    for (std::size_t r : rows)
        require(r < n, ErrorCode::InvalidArgument,
                "slice_rows: index " + std::to_string(r) + " out of range for " +
                    std::to_string(n) + " rows");

    const auto gather = [&](const DenseMatrix& src) {
        DenseMatrix out(rows.size(), d, 0.0);
        for (std::size_t i = 0; i < rows.size(); ++i)
            std::copy(src.row(rows[i]), src.row(rows[i]) + d, out.row(i));
        return out;
    };

    FeatureBundle out;
    out.base = gather(b.base);
    out.diffused.reserve(b.diffused.size());
    for (const DenseMatrix& m : b.diffused) out.diffused.push_back(gather(m));
    out.specs = b.specs;
    out.graph_fingerprint = b.graph_fingerprint;
    return out;
}

} // namespace sign
