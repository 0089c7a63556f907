#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "doctest.h"

#include "core/error.hpp"
#include "core/operators.hpp"
#include "test_util.hpp"

using namespace sign;
using namespace testutil;

namespace {

Eigen::MatrixXd to_eigen(const SparseMatrix& m) {
    Eigen::MatrixXd e = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m.n_rows),
                                              static_cast<Eigen::Index>(m.n_cols));
    for (std::size_t r = 0; r < m.n_rows; ++r)
        for (std::size_t k = m.row_begin(r); k < m.row_end(r); ++k)
            e(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(m.col_indices[k])) =
                m.values[k];
    return e;
}

Eigen::MatrixXd to_eigen(const DenseMatrix& m) {
    Eigen::MatrixXd e(static_cast<Eigen::Index>(m.n_rows), static_cast<Eigen::Index>(m.n_cols));
    for (std::size_t i = 0; i < m.n_rows; ++i)
        for (std::size_t j = 0; j < m.n_cols; ++j)
            e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m.at(i, j);
    return e;
}

DenseMatrix from_eigen(const Eigen::MatrixXd& e) {
    DenseMatrix m(static_cast<std::size_t>(e.rows()), static_cast<std::size_t>(e.cols()));
    for (Eigen::Index i = 0; i < e.rows(); ++i)
        for (Eigen::Index j = 0; j < e.cols(); ++j)
            m.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = e(i, j);
    return m;
}

// Independent O(n^3) triangle enumeration: count(i,j) = #{k : i-j, i-k, j-k}.
DenseMatrix brute_force_triangle_counts(const Graph& g) {
    const std::size_t n = g.num_nodes;
    const auto a = sparse_to_dense(g.adjacency);
    auto connected = [&](std::size_t i, std::size_t j) { return i != j && a.at(i, j) != 0.0; };
    DenseMatrix c(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (!connected(i, j)) continue;
            double count = 0.0;
            for (std::size_t k = 0; k < n; ++k)
                if (connected(i, k) && connected(j, k)) count += 1.0;
            c.at(i, j) = count;
        }
    return c;
}

} // namespace

// ---------------------------------------------------------------------------
// Normalized adjacencies
// ---------------------------------------------------------------------------

TEST_CASE("gcn_normalized: hand examples") {
    SUBCASE("isolated node gives [[1]]") {
        const auto g = graph_from_edges(1, {}, false);
        const auto a = gcn_normalized(g);
        CHECK(a.get(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
    }
    SUBCASE("single edge gives all entries 1/2") {
        const auto a = gcn_normalized(path_graph(2));
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 2; ++j)
                CHECK(a.get(i, j) == doctest::Approx(0.5).epsilon(1e-15));
    }
    SUBCASE("triangle gives all entries 1/3") {
        const auto a = gcn_normalized(complete_graph(3));
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j)
                CHECK(a.get(i, j) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    }
}

TEST_CASE("gcn_normalized: symmetric with spectral radius <= 1") {
    Rng rng(301);
    for (int trial = 0; trial < 4; ++trial) {
        const auto g = random_weighted_graph(60, 0.1 + 0.1 * trial, rng);
        const auto a = gcn_normalized(g);
        CHECK(a.is_symmetric());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(a));
        REQUIRE(es.info() == Eigen::Success);
        const auto& ev = es.eigenvalues();
        CHECK(ev.minCoeff() >= -1.0 - 1e-10);
        CHECK(ev.maxCoeff() <= 1.0 + 1e-10);
    }
}

TEST_CASE("sym_normalized: hand examples and zero-degree rows") {
    SUBCASE("single edge gives the permutation [[0,1],[1,0]]") {
        const auto a = sym_normalized(path_graph(2));
        CHECK(a.get(0, 0) == 0.0);
        CHECK(a.get(0, 1) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(a.get(1, 0) == doctest::Approx(1.0).epsilon(1e-15));
    }
    SUBCASE("star S3 hub-leaf entries are 1/sqrt(3)") {
        const auto g = graph_from_edges(4, {{0, 1, 1.0}, {0, 2, 1.0}, {0, 3, 1.0}}, false);
        const auto a = sym_normalized(g);
        const double expect = 1.0 / std::sqrt(3.0);
        for (std::size_t leaf = 1; leaf < 4; ++leaf) {
            CHECK(a.get(0, leaf) == doctest::Approx(expect).epsilon(1e-15));
            CHECK(a.get(leaf, 0) == doctest::Approx(expect).epsilon(1e-15));
        }
    }
    SUBCASE("isolated node row stays zero") {
        const auto g = graph_from_edges(3, {{0, 1, 1.0}}, false);
        const auto a = sym_normalized(g);
        CHECK(a.get(2, 0) == 0.0);
        CHECK(a.get(2, 1) == 0.0);
        CHECK(a.get(2, 2) == 0.0);
    }
}

TEST_CASE("row_normalized: hand examples") {
    SUBCASE("zero rows stay zero") {
        const auto m = sparse_from_triplets(2, 2, {{0, 0, 2.0}, {0, 1, 2.0}});
        const auto r = row_normalized(m);
        CHECK(r.get(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(r.get(0, 1) == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(r.row_begin(1) == r.row_end(1));
    }
    SUBCASE("weighted rows") {
        const auto m = sparse_from_triplets(2, 2, {{0, 0, 1.0}, {0, 1, 3.0}, {1, 0, 4.0}});
        const auto r = row_normalized(m);
        CHECK(r.get(0, 0) == doctest::Approx(0.25).epsilon(1e-15));
        CHECK(r.get(0, 1) == doctest::Approx(0.75).epsilon(1e-15));
        CHECK(r.get(1, 0) == doctest::Approx(1.0).epsilon(1e-15));
    }
    SUBCASE("negative entries are rejected") {
        const auto m = sparse_from_triplets(1, 1, {{0, 0, -1.0}});
        CHECK_THROWS_AS(row_normalized(m), Error);
    }
    SUBCASE("nonzero rows sum to 1") {
        Rng rng(311);
        std::vector<Triplet> t;
        for (std::size_t i = 0; i < 25; ++i)
            for (std::size_t j = 0; j < 25; ++j)
                if (rng.uniform() < 0.25) t.push_back({i, j, rng.uniform(0.1, 5.0)});
        const auto r = row_normalized(sparse_from_triplets(25, 25, t));
        for (double s : r.row_sums())
            if (s != 0.0) CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("norm_laplacian: hand examples") {
    SUBCASE("isolated node gives [[1]]") {
        const auto l = norm_laplacian(graph_from_edges(1, {}, false));
        CHECK(l.get(0, 0) == 1.0);
    }
    SUBCASE("single edge gives [[1,-1],[-1,1]]") {
        const auto l = norm_laplacian(path_graph(2));
        CHECK(l.get(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(l.get(0, 1) == doctest::Approx(-1.0).epsilon(1e-15));
        CHECK(l.get(1, 0) == doctest::Approx(-1.0).epsilon(1e-15));
        CHECK(l.get(1, 1) == doctest::Approx(1.0).epsilon(1e-15));
    }
}

TEST_CASE("norm_laplacian: spectrum in [0,2], kernel is D^{1/2} * ones") {
    Rng rng(321);
    const auto g = random_connected_graph(50, 0.05, rng);
    const auto l = norm_laplacian(g);
    CHECK(l.is_symmetric());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(l));
    REQUIRE(es.info() == Eigen::Success);
    const auto& ev = es.eigenvalues();
    CHECK(ev.minCoeff() >= -1e-10);
    CHECK(ev.maxCoeff() <= 2.0 + 1e-10);
    CHECK(std::abs(ev(0)) <= 1e-10);

    // Kernel vector: v_i = sqrt(deg(i)); check L v = 0.
    const auto deg = degrees(g);
    Eigen::VectorXd v(static_cast<Eigen::Index>(g.num_nodes));
    for (std::size_t i = 0; i < g.num_nodes; ++i)
        v(static_cast<Eigen::Index>(i)) = std::sqrt(deg[i]);
    CHECK((to_eigen(l) * v).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("directed_normalized: hand examples and direction handling") {
    const auto d = graph_from_edges(2, {{0, 1, 1.0}, {1, 0, 3.0}}, true);
    SUBCASE("out-neighbor normalization") {
        const auto a = directed_normalized(d, false);
        CHECK(a.get(0, 1) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(a.get(1, 0) == doctest::Approx(1.0).epsilon(1e-15));
    }
    SUBCASE("transpose normalizes in-neighborhoods") {
        const auto g = graph_from_edges(3, {{0, 2, 1.0}, {1, 2, 3.0}}, true);
        const auto a = directed_normalized(g, true);
        // W^T row 2 = [1, 3, 0] -> [0.25, 0.75, 0]
        CHECK(a.get(2, 0) == doctest::Approx(0.25).epsilon(1e-15));
        CHECK(a.get(2, 1) == doctest::Approx(0.75).epsilon(1e-15));
    }
    SUBCASE("undirected input is rejected") {
        CHECK_THROWS_AS(directed_normalized(path_graph(2), false), Error);
    }
    SUBCASE("undirected-only builders reject directed input") {
        CHECK_THROWS_AS(gcn_normalized(d), Error);
        CHECK_THROWS_AS(sym_normalized(d), Error);
        CHECK_THROWS_AS(norm_laplacian(d), Error);
        CHECK_THROWS_AS(triangle_counts(d), Error);
    }
}

// ---------------------------------------------------------------------------
// PPR
// ---------------------------------------------------------------------------

TEST_CASE("ppr_diffuse: alpha = 1 returns X unchanged") {
    Rng rng(331);
    const auto g = random_undirected_graph(12, 0.3, rng);
    const auto x = random_dense(12, 3, rng);
    const auto z = ppr_diffuse(g, x, 1.0, 25);
    CHECK(bitwise_equal(z, x));
}

TEST_CASE("ppr_diffuse: single edge, alpha 0.5, converges to [[2/3,1/3],[1/3,2/3]]") {
    const auto g = path_graph(2);
    const auto x = dense_identity(2);
    const auto z = ppr_diffuse(g, x, 0.5, 60);
    CHECK(std::abs(z.at(0, 0) - 2.0 / 3.0) <= 1e-6);
    CHECK(std::abs(z.at(0, 1) - 1.0 / 3.0) <= 1e-6);
    CHECK(std::abs(z.at(1, 0) - 1.0 / 3.0) <= 1e-6);
    CHECK(std::abs(z.at(1, 1) - 2.0 / 3.0) <= 1e-6);
}

TEST_CASE("ppr_matrix_dense: alpha = 1 is the identity") {
    Rng rng(333);
    const auto g = random_undirected_graph(10, 0.4, rng);
    const auto m = ppr_matrix_dense(g, 1.0);
    CHECK(max_abs_diff(m, dense_identity(10)) <= 1e-12);
}

TEST_CASE("ppr_matrix_dense: matches the Eigen inverse oracle") {
    Rng rng(337);
    const auto g = random_connected_graph(50, 0.08, rng);
    const auto a = to_eigen(sym_normalized(g));
    for (double alpha : {0.01, 0.05, 0.5}) {
        const auto mine = ppr_matrix_dense(g, alpha);
        const Eigen::MatrixXd oracle =
            alpha *
            (Eigen::MatrixXd::Identity(a.rows(), a.cols()) - (1.0 - alpha) * a).inverse();
        CHECK(max_abs_diff(mine, from_eigen(oracle)) <= 1e-10);
    }
}

TEST_CASE("ppr_diffuse: truncation error bounded by the Neumann tail") {
    Rng rng(341);
    const auto g = random_connected_graph(40, 0.1, rng);
    const auto x = dense_identity(40);
    for (double alpha : {0.05, 0.5}) {
        const auto exact = ppr_matrix_dense(g, alpha);
        for (std::size_t k : {1ul, 5ul, 20ul}) {
            const auto approx = ppr_diffuse(g, x, alpha, k);
            const double err = max_abs_diff(approx, exact);
            const double bound = std::pow(1.0 - alpha, static_cast<double>(k) + 1.0) / alpha;
            CHECK(err <= bound + 1e-12);
        }
    }
}

TEST_CASE("ppr_diffuse: converges to dense oracle within 1e-6 and decays geometrically") {
    Rng rng(347);
    const auto g = random_connected_graph(60, 0.08, rng);
    const auto x = random_dense(60, 4, rng);
    for (double alpha : {0.01, 0.05, 0.5}) {
        const auto exact_mat = ppr_matrix_dense(g, alpha);
        const auto exact = naive_matmul(exact_mat, x);

        // enough iterations for (1-alpha)^{k+1}/alpha * ||x|| < 1e-6
        const std::size_t iters = alpha <= 0.01 ? 2500 : (alpha <= 0.05 ? 500 : 40);
        CHECK(max_abs_diff(ppr_diffuse(g, x, alpha, iters), exact) <= 1e-6);

        // per-iteration error ratio <= (1 - alpha)
        double prev = max_abs_diff(ppr_diffuse(g, x, alpha, 3), exact);
        for (std::size_t k = 4; k <= 8; ++k) {
            const double cur = max_abs_diff(ppr_diffuse(g, x, alpha, k), exact);
            CHECK(cur <= (1.0 - alpha) * prev + 1e-13);
            prev = cur;
        }
    }
}

TEST_CASE("ppr_matrix_dense: refuses graphs beyond the dense limit") {
    const auto g = path_graph(5);
    CHECK_THROWS_AS(ppr_matrix_dense(g, 0.5, 4), Error);
}

// ---------------------------------------------------------------------------
// Triangle operator
// ---------------------------------------------------------------------------

TEST_CASE("triangle: hand examples") {
    SUBCASE("triangle graph K3: every edge supports one triangle, weights 1/2") {
        const auto t = triangle_operator(complete_graph(3));
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j)
                CHECK(t.get(i, j) == doctest::Approx(i == j ? 0.0 : 0.5).epsilon(1e-15));
    }
    SUBCASE("K4: every edge supports two triangles, weights 1/3") {
        const auto t = triangle_operator(complete_graph(4));
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 4; ++j)
                CHECK(t.get(i, j) == doctest::Approx(i == j ? 0.0 : 1.0 / 3.0).epsilon(1e-15));
    }
    SUBCASE("triangle-free path: all zero") {
        CHECK(triangle_operator(path_graph(3)).nnz() == 0);
        CHECK(triangle_counts(path_graph(3)).nnz() == 0);
    }
}

TEST_CASE("triangle_counts: equals brute force exactly on random graphs") {
    Rng rng(401);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 10 + rng.below(51); // up to 60
        const double density = 0.05 + 0.45 * rng.uniform();
        const auto g = random_undirected_graph(n, density, rng);
        const auto mine = sparse_to_dense(triangle_counts(g));
        const auto oracle = brute_force_triangle_counts(g);
        REQUIRE(mine.same_shape(oracle));
        for (std::size_t i = 0; i < mine.data.size(); ++i)
            CHECK(mine.data[i] == oracle.data[i]); // exact integer counts
    }
}

TEST_CASE("triangle_counts: symmetric, ignores self-loops and weights") {
    Rng rng(409);
    const auto g = random_weighted_graph(30, 0.3, rng);
    const auto c = triangle_counts(g);
    CHECK(c.is_symmetric());

    // Adding a self-loop must not change anything.
    auto with_loop = g;
    auto trips = std::vector<Triplet>{};
    for (std::size_t r = 0; r < g.adjacency.n_rows; ++r)
        for (std::size_t k = g.adjacency.row_begin(r); k < g.adjacency.row_end(r); ++k)
            trips.push_back({r, g.adjacency.col_indices[k], g.adjacency.values[k]});
    trips.push_back({4, 4, 1.0});
    with_loop.adjacency = sparse_from_triplets(g.num_nodes, g.num_nodes, trips);
    const auto c2 = triangle_counts(with_loop);
    CHECK(c.row_offsets == c2.row_offsets);
    CHECK(c.col_indices == c2.col_indices);
    CHECK(c.values == c2.values);
}

// ---------------------------------------------------------------------------
// OperatorSpec and DiffusionOperator
// ---------------------------------------------------------------------------

TEST_CASE("operator_kind_name round-trips") {
    for (OperatorKind k :
         {OperatorKind::SimpleGcnAdj, OperatorKind::SymNormAdj, OperatorKind::RowNormAdj,
          OperatorKind::NormLaplacian, OperatorKind::Ppr, OperatorKind::Triangle,
          OperatorKind::DirectedOut, OperatorKind::DirectedInTranspose})
        CHECK(operator_kind_from_name(operator_kind_name(k)) == k);
    CHECK_THROWS_AS(operator_kind_from_name("bogus"), Error);
}

TEST_CASE("OperatorSpec::validate enforces parameter and directedness rules") {
    OperatorSpec s;
    s.kind = OperatorKind::SimpleGcnAdj;
    s.power = 0;
    CHECK_THROWS_AS(s.validate(false), Error);

    s.power = 1;
    CHECK_NOTHROW(s.validate(false));
    CHECK_THROWS_AS(s.validate(true), Error); // gcn needs undirected

    OperatorSpec p;
    p.kind = OperatorKind::Ppr;
    p.alpha = 0.0;
    CHECK_THROWS_AS(p.validate(false), Error);
    p.alpha = 1.5;
    CHECK_THROWS_AS(p.validate(false), Error);
    p.alpha = 0.5;
    p.iterations = 0;
    CHECK_THROWS_AS(p.validate(false), Error);
    p.iterations = 10;
    CHECK_NOTHROW(p.validate(false));

    OperatorSpec t;
    t.kind = OperatorKind::Triangle;
    try {
        t.validate(true);
        FAIL("expected error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("triangle operator requires undirected graph") !=
              std::string::npos);
    }

    OperatorSpec d;
    d.kind = OperatorKind::DirectedOut;
    CHECK_THROWS_AS(d.validate(false), Error);
    CHECK_NOTHROW(d.validate(true));
}

TEST_CASE("DiffusionOperator: powers match the dense oracle") {
    Rng rng(421);
    const auto g = random_weighted_graph(40, 0.15, rng);
    const auto x = random_dense(40, 5, rng);
    for (OperatorKind kind : {OperatorKind::SimpleGcnAdj, OperatorKind::SymNormAdj,
                              OperatorKind::RowNormAdj, OperatorKind::NormLaplacian,
                              OperatorKind::Triangle}) {
        for (std::size_t power : {1ul, 2ul, 3ul}) {
            OperatorSpec spec;
            spec.kind = kind;
            spec.power = power;
            const auto op = DiffusionOperator::build(spec, g);
            const auto mine = op.apply(x);

            SparseMatrix base;
            switch (kind) {
                case OperatorKind::SimpleGcnAdj: base = gcn_normalized(g); break;
                case OperatorKind::SymNormAdj: base = sym_normalized(g); break;
                case OperatorKind::RowNormAdj: base = row_normalized(g.adjacency); break;
                case OperatorKind::NormLaplacian: base = norm_laplacian(g); break;
                default: base = triangle_operator(g); break;
            }
            auto dense = sparse_to_dense(base);
            auto acc = dense;
            for (std::size_t p = 1; p < power; ++p) acc = naive_matmul(acc, dense);
            CHECK(max_abs_diff(mine, naive_matmul(acc, x)) <= 1e-10);
        }
    }
}

TEST_CASE("DiffusionOperator: GCN power 2 on K3 with identity features") {
    OperatorSpec spec;
    spec.kind = OperatorKind::SimpleGcnAdj;
    spec.power = 2;
    const auto op = DiffusionOperator::build(spec, complete_graph(3));
    const auto z = op.apply(dense_identity(3));
    for (double v : z.data) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("DiffusionOperator: PPR apply matches ppr_diffuse; rownorm rows sum to 1") {
    Rng rng(431);
    const auto g = random_connected_graph(30, 0.1, rng);
    const auto x = random_dense(30, 3, rng);

    OperatorSpec spec;
    spec.kind = OperatorKind::Ppr;
    spec.alpha = 0.2;
    spec.iterations = 30;
    const auto op = DiffusionOperator::build(spec, g);
    CHECK(bitwise_equal(op.apply(x), ppr_diffuse(g, x, 0.2, 30)));

    // Row-normalized variant: rows of the effective operator sum to 1.
    OperatorSpec rn = spec;
    rn.ppr_row_normalize = true;
    const auto opn = DiffusionOperator::build(rn, g);
    const auto applied = opn.apply(dense_identity(30));
    for (std::size_t i = 0; i < 30; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < 30; ++j) s += applied.at(i, j);
        CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("OperatorSpec::same_family groups correctly") {
    OperatorSpec a, b;
    a.kind = b.kind = OperatorKind::SymNormAdj;
    a.power = 1;
    b.power = 3;
    CHECK(a.same_family(b));

    b.kind = OperatorKind::RowNormAdj;
    CHECK_FALSE(a.same_family(b));

    OperatorSpec p1, p2;
    p1.kind = p2.kind = OperatorKind::Ppr;
    p1.alpha = p2.alpha = 0.1;
    p1.iterations = p2.iterations = 20;
    CHECK(p1.same_family(p2));
    p2.alpha = 0.2;
    CHECK_FALSE(p1.same_family(p2));
    p2.alpha = 0.1;
    p2.iterations = 30;
    CHECK_FALSE(p1.same_family(p2));
}

TEST_CASE("dense_solve: solves small systems against Eigen") {
    Rng rng(433);
    for (int trial = 0; trial < 5; ++trial) {
        DenseMatrix a = random_dense(12, 12, rng);
        for (std::size_t i = 0; i < 12; ++i) a.at(i, i) += 4.0; // well-conditioned
        const auto b = random_dense(12, 3, rng);
        const auto x = dense_solve(a, b);
        const Eigen::MatrixXd ex =
            to_eigen(a).partialPivLu().solve(to_eigen(b));
        CHECK(max_abs_diff(x, from_eigen(ex)) <= 1e-10);
    }
    DenseMatrix singular(2, 2, 0.0);
    CHECK_THROWS_AS(dense_solve(singular, DenseMatrix(2, 1, 1.0)), Error);
}
