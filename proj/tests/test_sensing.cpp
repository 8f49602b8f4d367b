#include "doctest.h"

#include "cswm/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

using namespace cswm;

namespace {

std::vector<double> random_image(size_t count, uint64_t seed) {
    SplitMix64 rng{seed};
    std::vector<double> v(count);
    for (double& e : v)
        e = static_cast<double>(rng.next() >> 11) * 0x1.0p-53;
    return v;
}

std::vector<uint32_t> identity_perm(uint32_t n) {
    std::vector<uint32_t> p(n);
    std::iota(p.begin(), p.end(), 0u);
    return p;
}

} // namespace

TEST_CASE("smallest Hadamard operators expose the Sylvester sign pattern") {
    // S=2 keeps a single row: the first row (all ones) is excluded.
    auto tiny = SensingOperator::with_permutation(MatrixKind::ScrambledHadamard, 2, 1,
                                                  identity_perm(2));
    CHECK(tiny.dense_entry(0, 0) == 1);
    CHECK(tiny.dense_entry(0, 1) == -1);

    auto op = SensingOperator::with_permutation(MatrixKind::ScrambledHadamard, 4, 3,
                                                identity_perm(4));
    const int expected[3][4] = {
        {1, -1, 1, -1},
        {1, 1, -1, -1},
        {1, -1, -1, 1},
    };
    for (uint32_t r = 0; r < 3; ++r)
        for (uint32_t c = 0; c < 4; ++c)
            CHECK(op.dense_entry(r, c) == expected[r][c]);
}

TEST_CASE("small S-matrix rows are 0/1 with row sum 2 and a dead first column") {
    auto op = SensingOperator::with_permutation(MatrixKind::ScrambledSMatrix, 4, 3,
                                                identity_perm(3));
    for (uint32_t r = 0; r < 3; ++r) {
        int sum = 0;
        CHECK(op.dense_entry(r, 0) == 0); // first scene column is never sampled
        for (uint32_t c = 0; c < 4; ++c) {
            const int e = op.dense_entry(r, c);
            CHECK((e == 0 || e == 1));
            sum += e;
        }
        CHECK(sum == 2);
    }
}

TEST_CASE("every retained Hadamard row sums to zero") {
    auto op = SensingOperator::build(MatrixKind::ScrambledHadamard, 16, 15, 77);
    for (uint32_t r = 0; r < op.row_count(); ++r) {
        int sum = 0;
        for (uint32_t c = 0; c < op.order(); ++c)
            sum += op.dense_entry(r, c);
        CHECK(sum == 0);
    }
}

TEST_CASE("fast projection and adjoint match the dense oracles bit for bit") {
    for (MatrixKind kind : {MatrixKind::ScrambledHadamard, MatrixKind::ScrambledSMatrix}) {
        for (uint32_t order : {4u, 8u, 16u, 32u, 64u}) {
            auto op = SensingOperator::build(kind, order, order - 1, 1000 + order);
            for (int trial = 0; trial < 20; ++trial) {
                auto img = SceneImage::from_values(
                    static_cast<int>(order), 1,
                    random_image(order, order * 131 + static_cast<uint64_t>(trial)));
                const auto fast = op.project(img);
                const auto dense = op.project_dense(img);
                REQUIRE(fast.values == dense.values);

                const auto back_fast = op.adjoint(fast.values);
                const auto back_dense = op.adjoint_dense(fast.values);
                REQUIRE(back_fast == back_dense);
            }
        }
    }
}

TEST_CASE("projection reaches the S/2 bound on a matched light pattern") {
    auto op = SensingOperator::with_permutation(MatrixKind::ScrambledHadamard, 4, 3,
                                                identity_perm(4));
    // Put full light exactly where row 1 carries +1.
    std::vector<double> x(4, 0.0);
    for (uint32_t c = 0; c < 4; ++c)
        if (op.dense_entry(1, c) == 1)
            x[c] = 1.0;
    const auto y = op.project(SceneImage::from_values(2, 2, x));
    CHECK(y.values[1] == 2); // S/2
}

TEST_CASE("measurement bounds are plus/minus half the order") {
    CHECK(SensingOperator::measurement_bounds(65536) == std::pair<int64_t, int64_t>{-32768, 32768});
    CHECK(SensingOperator::measurement_bounds(4) == std::pair<int64_t, int64_t>{-2, 2});
    CHECK(SensingOperator::measurement_bounds(256) == std::pair<int64_t, int64_t>{-128, 128});
    CHECK_THROWS_AS(SensingOperator::measurement_bounds(48), std::invalid_argument);
}

TEST_CASE("measurements of unit-range images stay inside the declared range") {
    for (MatrixKind kind : {MatrixKind::ScrambledHadamard, MatrixKind::ScrambledSMatrix}) {
        auto op = SensingOperator::build(kind, 64, 63, 5);
        const auto [lo, hi] = SensingOperator::measurement_bounds(64);
        for (int trial = 0; trial < 10; ++trial) {
            auto img = SceneImage::from_values(8, 8, random_image(64, 999 + trial));
            for (int32_t v : op.project(img).values) {
                CHECK(v >= lo);
                CHECK(v <= hi);
                if (kind == MatrixKind::ScrambledSMatrix)
                    CHECK(v >= 0);
            }
        }
    }
}

TEST_CASE("zero image projects to the zero stream and back") {
    auto op = SensingOperator::build(MatrixKind::ScrambledSMatrix, 16, 10, 3);
    auto y = op.project(SceneImage::from_values(4, 4, std::vector<double>(16, 0.0)));
    CHECK(std::all_of(y.values.begin(), y.values.end(), [](int32_t v) { return v == 0; }));
    auto back = op.adjoint(y.values);
    CHECK(std::all_of(back.begin(), back.end(), [](double v) { return v == 0.0; }));
}

TEST_CASE("basis-vector images read out matrix columns") {
    auto op = SensingOperator::build(MatrixKind::ScrambledHadamard, 8, 7, 21);
    for (uint32_t j = 0; j < 8; ++j) {
        std::vector<double> x(8, 0.0);
        x[j] = 1.0;
        const auto y = op.project_dense(SceneImage::from_values(8, 1, x));
        for (uint32_t r = 0; r < 7; ++r)
            CHECK(y.values[r] == op.dense_entry(r, j));
    }
}

TEST_CASE("unit streams pull out matrix rows through the adjoint") {
    auto op = SensingOperator::build(MatrixKind::ScrambledSMatrix, 16, 9, 8);
    for (uint32_t i = 0; i < op.row_count(); ++i) {
        std::vector<int32_t> e(op.row_count(), 0);
        e[i] = 1;
        const auto row = op.adjoint(e);
        for (uint32_t c = 0; c < op.order(); ++c)
            CHECK(row[c] == static_cast<double>(op.dense_entry(i, c)));
    }
}

TEST_CASE("reducing an operator deletes exactly the mapped measurements") {
    auto op = SensingOperator::build(MatrixKind::ScrambledHadamard, 32, 10, 12);
    auto img = SceneImage::from_values(8, 4, random_image(32, 4242));
    const auto full = op.project(img);

    SUBCASE("empty map is the identity") {
        auto same = op.reduced({});
        CHECK(same.project(img).values == full.values);
        CHECK(same.row_count() == op.row_count());
    }
    SUBCASE("positions 0,3,7 vanish, order otherwise preserved") {
        auto reduced = op.reduced({0, 3, 7});
        REQUIRE(reduced.row_count() == 7);
        const auto got = reduced.project(img).values;
        std::vector<int32_t> expected;
        for (uint32_t i = 0; i < full.values.size(); ++i)
            if (i != 0 && i != 3 && i != 7)
                expected.push_back(full.values[i]);
        CHECK(got == expected);
    }
    SUBCASE("bad maps are rejected") {
        CHECK_THROWS_AS(op.reduced({10}), std::invalid_argument);
        CHECK_THROWS_AS(op.reduced({2, 2}), std::invalid_argument);
    }
}

TEST_CASE("projection and adjoint satisfy the inner-product identity") {
    for (MatrixKind kind : {MatrixKind::ScrambledHadamard, MatrixKind::ScrambledSMatrix}) {
        auto op = SensingOperator::build(kind, 64, 40, 31);
        for (int trial = 0; trial < 5; ++trial) {
            const auto x = random_image(64, 100 + trial);
            auto y = random_image(40, 200 + trial);
            for (double& v : y)
                v = v * 2.0 - 1.0;

            const auto ax = op.apply_real(x);
            const auto aty = op.adjoint_real(y);
            double lhs = 0, rhs = 0;
            for (size_t i = 0; i < y.size(); ++i)
                lhs += ax[i] * y[i];
            for (size_t i = 0; i < x.size(); ++i)
                rhs += x[i] * aty[i];
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
        }
    }
}

TEST_CASE("operators are reproducible from the seed alone") {
    auto a = SensingOperator::build(MatrixKind::ScrambledHadamard, 64, 20, 97);
    auto b = SensingOperator::build(MatrixKind::ScrambledHadamard, 64, 20, 97);
    CHECK(a.permutation() == b.permutation());
    for (uint32_t r = 0; r < a.row_count(); ++r)
        for (uint32_t c = 0; c < a.order(); ++c)
            REQUIRE(a.dense_entry(r, c) == b.dense_entry(r, c));

    auto c = SensingOperator::build(MatrixKind::ScrambledHadamard, 64, 20, 98);
    CHECK(a.permutation() != c.permutation());
}

TEST_CASE("construction rejects malformed shapes") {
    CHECK_THROWS_AS(SensingOperator::build(MatrixKind::ScrambledHadamard, 48, 4, 0),
                    std::invalid_argument);
    CHECK_THROWS_AS(SensingOperator::build(MatrixKind::ScrambledHadamard, 16, 0, 0),
                    std::invalid_argument);
    CHECK_THROWS_AS(SensingOperator::build(MatrixKind::ScrambledHadamard, 16, 16, 0),
                    std::invalid_argument);
    CHECK_THROWS_AS(SceneImage::from_values(2, 2, {0.0, 0.5, 1.0, 1.5}), std::invalid_argument);
    CHECK_THROWS_AS(SceneImage::from_values(2, 2, {0.0, 0.5}), std::invalid_argument);

    auto op = SensingOperator::build(MatrixKind::ScrambledHadamard, 16, 4, 0);
    CHECK_THROWS_AS(op.project(SceneImage::from_values(2, 2, std::vector<double>(4, 0.0))),
                    std::invalid_argument);
    CHECK_THROWS_AS(op.adjoint(std::vector<int32_t>(5, 0)), std::invalid_argument);
}

TEST_CASE("seeded permutations are deterministic bijections") {
    const auto p = seeded_permutation(257, 999);
    REQUIRE(p.size() == 257);
    std::vector<bool> seen(257, false);
    for (uint32_t v : p) {
        REQUIRE(v < 257);
        REQUIRE(!seen[v]);
        seen[v] = true;
    }
    CHECK(p == seeded_permutation(257, 999));
    CHECK(p != seeded_permutation(257, 1000));
}
