#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "semshift/error.hpp"
#include "semshift/procrustes.hpp"

using namespace semshift;

namespace {

Matrix reconstruct(const SvdResult& d) {
    Matrix us = d.u;
    for (std::size_t i = 0; i < us.rows(); ++i)
        for (std::size_t j = 0; j < us.cols(); ++j) us(i, j) *= d.singular_values[j];
    return oracle::matmul(us, oracle::mat_t(d.v));
}

EmbeddingSpace space_of(const Matrix& target, Slice slice) {
    std::vector<Vocabulary::Entry> e;
    for (std::size_t i = 0; i < target.rows(); ++i) e.push_back({"w" + std::to_string(i), 1000 - i});
    EmbeddingSpace s;
    s.vocab = std::make_shared<const Vocabulary>(Vocabulary(e));
    s.target = target;
    s.context = Matrix(target.rows(), target.cols());
    s.slice = slice;
    return s;
}

double residual(const Matrix& x, const Matrix& q, const Matrix& y) {
    return oracle::fro_diff(oracle::matmul(x, q), y);
}

}  // namespace

TEST_CASE("svd of small matrices") {
    auto d = svd(Matrix{{3, 0}, {0, 2}});
    CHECK(d.singular_values[0] == doctest::Approx(3.0));
    CHECK(d.singular_values[1] == doctest::Approx(2.0));

    auto id = svd(Matrix::identity(4));
    for (double s : id.singular_values) CHECK(s == doctest::Approx(1.0));

    // AᵀA = diag(1, 4) so the singular values are √4 and √1.
    auto e = svd(Matrix{{0, 2}, {1, 0}});
    CHECK(e.singular_values[0] == doctest::Approx(2.0));
    CHECK(e.singular_values[1] == doctest::Approx(1.0));
}

TEST_CASE("svd reconstructs random matrices of every shape") {
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        const std::size_t m = 1 + seed * 7 % 23, n = 1 + seed * 5 % 19;
        const Matrix a = oracle::gaussian(m, n, 100 + seed);
        const auto d = svd(a);
        const std::size_t k = std::min(m, n);
        REQUIRE(d.u.rows() == m);
        REQUIRE(d.u.cols() == k);
        REQUIRE(d.v.rows() == n);
        REQUIRE(d.v.cols() == k);
        CHECK(oracle::fro_diff(reconstruct(d), a) <= 1e-10 * oracle::fro(a));
        CHECK(oracle::orthogonality_error(d.u) <= 1e-10);
        CHECK(oracle::orthogonality_error(d.v) <= 1e-10);
        const auto ref = oracle::singular_values(a);
        for (std::size_t i = 0; i < k; ++i) {
            CHECK(d.singular_values[i] == doctest::Approx(ref[i]).epsilon(1e-10).scale(ref[0]));
            if (i) CHECK(d.singular_values[i] <= d.singular_values[i - 1]);
        }
    }
}

TEST_CASE("svd completes the basis of rank-deficient matrices") {
    // 12×12 of rank 3.
    const Matrix a = oracle::matmul(oracle::gaussian(12, 3, 7), oracle::gaussian(3, 12, 8));
    const auto d = svd(a);
    CHECK(oracle::orthogonality_error(d.u) <= 1e-10);
    CHECK(oracle::orthogonality_error(d.v) <= 1e-10);
    CHECK(oracle::fro_diff(reconstruct(d), a) <= 1e-10 * oracle::fro(a));
    for (std::size_t i = 3; i < 12; ++i) CHECK(d.singular_values[i] < 1e-10);

    const auto z = svd(Matrix(3, 3));
    CHECK(oracle::orthogonality_error(z.u) <= 1e-12);
}

TEST_CASE("svd rejects bad input") {
    CHECK_THROWS_AS(svd(Matrix()), InvalidArgument);
    Matrix nan{{1, 0}, {0, std::nan("")}};
    CHECK_THROWS_AS(svd(nan), InvalidArgument);
}

TEST_CASE("solve_orthogonal recovers rotations") {
    const Matrix w0 = oracle::gaussian(40, 10, 31);
    SUBCASE("identity") {
        auto map = solve_orthogonal(w0, w0);
        CHECK(oracle::fro_diff(map.rotation, Matrix::identity(10)) <= 1e-8);
    }
    SUBCASE("exact rotation") {
        const Matrix r = oracle::random_orthogonal(10, 32);
        const Matrix w1 = oracle::matmul(w0, r);
        auto map = solve_orthogonal(w1, w0);
        CHECK(oracle::fro_diff(map.rotation, oracle::mat_t(r)) <= 1e-8);
        CHECK(residual(w1, map.rotation, w0) <= 1e-6);
    }
    SUBCASE("noisy rotation") {
        const Matrix r = oracle::random_orthogonal(10, 33);
        Matrix w1 = oracle::matmul(w0, r);
        const Matrix noise = oracle::gaussian(40, 10, 34, 0.01);
        for (std::size_t i = 0; i < w1.data().size(); ++i) w1.data()[i] += noise.data()[i];
        auto map = solve_orthogonal(w1, w0);
        CHECK(oracle::mean_row_cosine(oracle::matmul(w1, map.rotation), w0) >= 0.99);
    }
}

TEST_CASE("solve_orthogonal agrees with an independent solver") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Matrix x = normalize_rows(oracle::gaussian(30, 8, 200 + seed));
        const Matrix y = normalize_rows(oracle::gaussian(30, 8, 300 + seed));
        auto map = solve_orthogonal(x, y, "CW", false);
        const Matrix ref = oracle::procrustes(x, y);
        CHECK(oracle::orthogonality_error(map.rotation) <= 1e-8);
        CHECK(residual(x, map.rotation, y) == doctest::Approx(residual(x, ref, y)).epsilon(1e-9));
        CHECK(map.anchor_set == "CW");
    }
}

TEST_CASE("solved rotation beats random rotations") {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const std::size_t dim = 2 + seed, k = 4 + seed;
        const Matrix x = oracle::gaussian(k, dim, 400 + seed);
        const Matrix y = oracle::gaussian(k, dim, 500 + seed);
        auto map = solve_orthogonal(x, y, "SW", false);
        const double best = residual(x, map.rotation, y);
        for (std::uint64_t t = 0; t < 1000; ++t) {
            const Matrix q = oracle::random_orthogonal(dim, 10000 * seed + t);
            CHECK(best <= residual(x, q, y) + 1e-12);
        }
    }
}

TEST_CASE("alignments from different anchor sets differ") {
    const Matrix w0 = oracle::gaussian(60, 6, 41);
    Matrix w1 = oracle::matmul(w0, oracle::random_orthogonal(6, 42));
    // The second half of the words moved.
    const Matrix moved = oracle::gaussian(30, 6, 43);
    for (std::size_t i = 30; i < 60; ++i)
        for (std::size_t j = 0; j < 6; ++j) w1(i, j) = moved(i - 30, j);
    std::vector<std::size_t> sw(10), cw(50);
    for (std::size_t i = 0; i < 10; ++i) sw[i] = i;
    for (std::size_t i = 0; i < 50; ++i) cw[i] = 10 + i;
    auto a = solve_orthogonal(gather_rows(w1, sw), gather_rows(w0, sw), "SW");
    auto b = solve_orthogonal(gather_rows(w1, cw), gather_rows(w0, cw), "CW");
    CHECK(oracle::fro_diff(a.rotation, b.rotation) > 1e-3);
}

TEST_CASE("solve_orthogonal error cases") {
    CHECK_THROWS_AS(solve_orthogonal(Matrix{{1, 0}}, Matrix{{1, 0}}), InvalidArgument);
    CHECK_THROWS_AS(solve_orthogonal(Matrix(3, 2, 1.0), Matrix(3, 3, 1.0)), InvalidArgument);
    CHECK_THROWS_AS(solve_orthogonal(Matrix(3, 2), Matrix(3, 2)), NumericalError);
}

TEST_CASE("apply_map rotates targets only and preserves norms") {
    const Matrix w = oracle::gaussian(25, 7, 51);
    auto s = space_of(w, Slice::T1);
    s.context = oracle::gaussian(25, 7, 52);

    OrthogonalMap id;
    id.rotation = Matrix::identity(7);
    id.anchor_set = "SW";
    CHECK(apply_map(s, id).target == w);

    OrthogonalMap map;
    map.rotation = oracle::random_orthogonal(7, 53);
    map.anchor_set = "SW";
    auto rotated = apply_map(s, map);
    CHECK(rotated.aligned_by == "SW");
    CHECK(rotated.context == s.context);
    for (std::size_t i = 0; i < w.rows(); ++i)
        CHECK(norm2(rotated.target.row(i)) == doctest::Approx(norm2(w.row(i))).epsilon(1e-8));
    CHECK(oracle::orthogonality_error(map.rotation) <= 1e-8);

    OrthogonalMap back = map;
    back.rotation = transpose(map.rotation);
    CHECK(oracle::fro_diff(apply_map(rotated, back).target, w) <= 1e-10);

    auto t0 = space_of(w, Slice::T0);
    CHECK_THROWS_AS(apply_map(t0, map), InvalidArgument);
    OrthogonalMap small;
    small.rotation = Matrix::identity(3);
    CHECK_THROWS_AS(apply_map(s, small), InvalidArgument);
}

TEST_CASE("map file round trip") {
    oracle::TempDir dir("map");
    OrthogonalMap map;
    map.rotation = oracle::random_orthogonal(5, 61);
    map.anchor_set = "CW";
    save_map(dir / "m.map", map);
    auto back = load_map(dir / "m.map");
    CHECK(back.rotation == map.rotation);
    CHECK(back.anchor_set == "CW");
}
