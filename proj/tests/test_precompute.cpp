#include <filesystem>

#include "doctest.h"

#include "core/bundle.hpp"
#include "core/error.hpp"
#include "core/kvfile.hpp"
#include "test_util.hpp"

using namespace sign;
using namespace testutil;

namespace {

OperatorSpec make_spec(OperatorKind kind, std::size_t power) {
    OperatorSpec s;
    s.kind = kind;
    s.power = power;
    return s;
}

} // namespace

TEST_CASE("precompute: empty spec list keeps only the base features") {
    Rng rng(501);
    const auto g = random_undirected_graph(10, 0.3, rng);
    const auto x = random_dense(10, 4, rng);
    const auto b = precompute_features(g, x, {});
    CHECK(b.num_operators() == 0);
    CHECK(bitwise_equal(b.base, x));
    CHECK(b.graph_fingerprint == graph_fingerprint(g));
}

TEST_CASE("precompute: GCN powers one and two on a single edge") {
    const auto g = path_graph(2);
    DenseMatrix x(2, 1);
    x.at(0, 0) = 1.0;
    x.at(1, 0) = 0.0;
    const auto b = precompute_features(
        g, x, {make_spec(OperatorKind::SimpleGcnAdj, 1), make_spec(OperatorKind::SimpleGcnAdj, 2)});
    REQUIRE(b.num_operators() == 2);
    // A~ = [[.5,.5],[.5,.5]] is idempotent, so both powers give [[0.5],[0.5]].
    for (const auto& z : b.diffused) {
        CHECK(z.at(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(z.at(1, 0) == doctest::Approx(0.5).epsilon(1e-15));
    }
}

TEST_CASE("precompute: triangle operator on a triangle-free graph gives zeros") {
    Rng rng(503);
    const auto g = path_graph(6);
    const auto x = random_dense(6, 3, rng);
    const auto b = precompute_features(g, x, {make_spec(OperatorKind::Triangle, 1)});
    CHECK(max_abs(b.diffused[0]) == 0.0);
}

TEST_CASE("precompute: incremental power sweep equals independent applications bitwise") {
    Rng rng(507);
    const auto g = random_weighted_graph(25, 0.2, rng);
    const auto x = random_dense(25, 4, rng);

    // Shared sweep over powers 1..3 (scrambled request order).
    const std::vector<OperatorSpec> specs = {make_spec(OperatorKind::SymNormAdj, 3),
                                             make_spec(OperatorKind::SymNormAdj, 1),
                                             make_spec(OperatorKind::SymNormAdj, 2)};
    const auto b = precompute_features(g, x, specs);
    REQUIRE(b.num_operators() == 3);
    CHECK(b.specs[0].power == 3);
    CHECK(b.specs[1].power == 1);
    CHECK(b.specs[2].power == 2);

    for (std::size_t i = 0; i < specs.size(); ++i) {
        const auto op = DiffusionOperator::build(specs[i], g);
        CHECK(bitwise_equal(b.diffused[i], op.apply(x)));
    }
}

TEST_CASE("precompute: mixed families each match the dense oracle") {
    Rng rng(509);
    const auto g = random_weighted_graph(20, 0.25, rng);
    const auto x = random_dense(20, 3, rng);
    OperatorSpec ppr;
    ppr.kind = OperatorKind::Ppr;
    ppr.alpha = 0.3;
    ppr.iterations = 40;
    const std::vector<OperatorSpec> specs = {make_spec(OperatorKind::SimpleGcnAdj, 2), ppr,
                                             make_spec(OperatorKind::NormLaplacian, 1)};
    const auto b = precompute_features(g, x, specs);

    // gcn^2 against dense oracle
    const auto a1 = sparse_to_dense(gcn_normalized(g));
    CHECK(max_abs_diff(b.diffused[0], naive_matmul(naive_matmul(a1, a1), x)) <= 1e-10);
    // ppr against its direct diffusion
    CHECK(bitwise_equal(b.diffused[1], ppr_diffuse(g, x, 0.3, 40)));
    // laplacian
    CHECK(max_abs_diff(b.diffused[2], naive_matmul(sparse_to_dense(norm_laplacian(g)), x)) <=
          1e-10);
}

TEST_CASE("precompute: rejects mismatched feature rows and invalid specs") {
    Rng rng(511);
    const auto g = random_undirected_graph(8, 0.3, rng);
    CHECK_THROWS_AS(precompute_features(g, DenseMatrix(7, 2, 1.0), {}), Error);
    CHECK_THROWS_AS(
        precompute_features(g, DenseMatrix(8, 2, 1.0), {make_spec(OperatorKind::DirectedOut, 1)}),
        Error);
}

TEST_CASE("bundle: save/load round-trip") {
    TempDir td;
    Rng rng(513);
    const auto g = random_undirected_graph(15, 0.3, rng);
    const auto x = random_dense(15, 4, rng);
    OperatorSpec ppr;
    ppr.kind = OperatorKind::Ppr;
    ppr.alpha = 0.25;
    ppr.iterations = 12;
    const auto b = precompute_features(
        g, x, {make_spec(OperatorKind::SimpleGcnAdj, 1), ppr, make_spec(OperatorKind::Triangle, 1)});

    const auto dir = td.file("bundle");
    const auto manifest_path = save_bundle(b, dir);
    CHECK(std::filesystem::exists(manifest_path));
    CHECK(std::filesystem::exists(dir + "/block_0.sgnm"));
    CHECK(std::filesystem::exists(dir + "/block_3.sgnm"));

    const auto back = load_bundle(dir);
    CHECK(back.num_nodes() == 15);
    CHECK(back.feature_dim() == 4);
    REQUIRE(back.num_operators() == 3);
    CHECK(back.graph_fingerprint == b.graph_fingerprint);
    CHECK(back.specs[1].kind == OperatorKind::Ppr);
    CHECK(back.specs[1].alpha == 0.25);
    CHECK(back.specs[1].iterations == 12);

    // Values round-trip through binary32.
    for (std::size_t i = 0; i < x.data.size(); ++i)
        CHECK(back.base.data[i] == static_cast<double>(static_cast<float>(b.base.data[i])));

    // Saving the loaded bundle reproduces every byte.
    const auto dir2 = td.file("bundle2");
    save_bundle(back, dir2);
    CHECK(same_file_bytes(dir + "/manifest.txt", dir2 + "/manifest.txt"));
    for (int i = 0; i <= 3; ++i)
        CHECK(same_file_bytes(dir + "/block_" + std::to_string(i) + ".sgnm",
                              dir2 + "/block_" + std::to_string(i) + ".sgnm"));
}

TEST_CASE("bundle: manifest carries the documented keys") {
    TempDir td;
    Rng rng(517);
    const auto g = random_undirected_graph(6, 0.5, rng);
    const auto x = random_dense(6, 2, rng);
    const auto b = precompute_features(g, x, {make_spec(OperatorKind::SymNormAdj, 2)});
    save_bundle(b, td.file("bundle"));

    const auto kv = KvFile::parse_file(td.file("bundle") + "/manifest.txt");
    CHECK(kv.get_u64("version") == 1);
    CHECK(kv.get_u64("num_nodes") == 6);
    CHECK(kv.get_u64("feature_dim") == 2);
    CHECK(kv.get_u64("num_operators") == 1);
    CHECK(kv.get("operator.1.kind") == "sym");
    CHECK(kv.get_u64("operator.1.power") == 2);
    CHECK(kv.get("file.0") == "block_0.sgnm");
    CHECK(kv.get("file.1") == "block_1.sgnm");
    CHECK(kv.has("checksum.0"));
    CHECK(kv.has("checksum.1"));
    CHECK(parse_hex_u64(kv.get("graph_fingerprint")) == graph_fingerprint(g));

    // Stored checksums match the files on disk.
    CHECK(parse_hex_u64(kv.get("checksum.0")) == fnv1a_file(td.file("bundle") + "/block_0.sgnm"));
    CHECK(parse_hex_u64(kv.get("checksum.1")) == fnv1a_file(td.file("bundle") + "/block_1.sgnm"));
}

TEST_CASE("bundle: corruption and missing files are detected") {
    TempDir td;
    Rng rng(519);
    const auto g = random_undirected_graph(8, 0.4, rng);
    const auto x = random_dense(8, 3, rng);
    const auto b = precompute_features(g, x, {make_spec(OperatorKind::SimpleGcnAdj, 1)});
    const auto dir = td.file("bundle");
    save_bundle(b, dir);

    SUBCASE("flipped payload byte fails the checksum") {
        auto bytes = read_file_bytes(dir + "/block_1.sgnm");
        bytes[bytes.size() - 1] ^= 0x01;
        write_file_bytes_atomic(dir + "/block_1.sgnm", bytes.data(), bytes.size());
        try {
            load_bundle(dir);
            FAIL("expected error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::Corrupt);
        }
    }
    SUBCASE("missing manifest") {
        std::filesystem::remove(dir + "/manifest.txt");
        CHECK_THROWS_AS(load_bundle(dir), Error);
    }
    SUBCASE("missing block file") {
        std::filesystem::remove(dir + "/block_1.sgnm");
        CHECK_THROWS_AS(load_bundle(dir), Error);
    }
    SUBCASE("unsupported version") {
        auto kv = KvFile::parse_file(dir + "/manifest.txt");
        KvFile out;
        for (const auto& [k, v] : kv.entries()) out.set(k, k == "version" ? "2" : v);
        out.write_file(dir + "/manifest.txt");
        CHECK_THROWS_AS(load_bundle(dir), Error);
    }
}

TEST_CASE("bundle: fingerprint mismatch warns instead of failing") {
    TempDir td;
    Rng rng(521);
    const auto g = random_undirected_graph(8, 0.4, rng);
    const auto x = random_dense(8, 2, rng);
    const auto b = precompute_features(g, x, {});
    const auto dir = td.file("bundle");
    save_bundle(b, dir);

    std::string warning;
    const auto ok = load_bundle(dir, b.graph_fingerprint, &warning);
    CHECK(warning.empty());
    CHECK(ok.num_nodes() == 8);

    const auto mismatched = load_bundle(dir, b.graph_fingerprint + 1, &warning);
    CHECK_FALSE(warning.empty());
    CHECK(mismatched.num_nodes() == 8);
}

TEST_CASE("slice_rows: gathers rows of every block") {
    Rng rng(523);
    const auto g = random_undirected_graph(10, 0.3, rng);
    const auto x = random_dense(10, 3, rng);
    const auto b = precompute_features(g, x, {make_spec(OperatorKind::SimpleGcnAdj, 1)});

    SUBCASE("reordering subset") {
        const auto s = slice_rows(b, {7, 0, 3});
        CHECK(s.num_nodes() == 3);
        CHECK(s.num_operators() == 1);
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(s.base.at(0, j) == b.base.at(7, j));
            CHECK(s.base.at(1, j) == b.base.at(0, j));
            CHECK(s.base.at(2, j) == b.base.at(3, j));
            CHECK(s.diffused[0].at(0, j) == b.diffused[0].at(7, j));
        }
    }
    SUBCASE("identity row set is bitwise identical") {
        std::vector<std::size_t> all(10);
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        const auto s = slice_rows(b, all);
        CHECK(bitwise_equal(s.base, b.base));
        CHECK(bitwise_equal(s.diffused[0], b.diffused[0]));
    }
    SUBCASE("out-of-range row is rejected") {
        CHECK_THROWS_AS(slice_rows(b, {10}), Error);
    }
}

TEST_CASE("operator spec kv mapping round-trips") {
    KvFile kv;
    OperatorSpec ppr;
    ppr.kind = OperatorKind::Ppr;
    ppr.power = 2;
    ppr.alpha = 0.15;
    ppr.iterations = 33;
    ppr.ppr_row_normalize = true;
    append_operator_spec(kv, 1, ppr);
    OperatorSpec simple;
    simple.kind = OperatorKind::Triangle;
    simple.power = 1;
    append_operator_spec(kv, 2, simple);

    const auto p = read_operator_spec(kv, 1);
    CHECK(p.kind == OperatorKind::Ppr);
    CHECK(p.power == 2);
    CHECK(p.alpha == 0.15);
    CHECK(p.iterations == 33);
    CHECK(p.ppr_row_normalize);

    const auto t = read_operator_spec(kv, 2);
    CHECK(t.kind == OperatorKind::Triangle);
    CHECK(t.power == 1);
    CHECK_FALSE(t.ppr_row_normalize);

    // Non-PPR specs do not emit PPR keys; rownorm appears only when set.
    CHECK_FALSE(kv.has("operator.2.alpha"));
    CHECK_FALSE(kv.has("operator.2.iterations"));
    CHECK_FALSE(kv.has("operator.2.rownorm"));
    CHECK(kv.has("operator.1.rownorm"));
}
