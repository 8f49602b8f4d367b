#include "doctest.h"

#include "cswm/sensing.hpp"
#include "cswm/wavelet.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

using namespace cswm;

namespace {

std::vector<double> random_field(size_t count, uint64_t seed) {
    SplitMix64 rng{seed};
    std::vector<double> v(count);
    for (auto& e : v)
        e = static_cast<double>(rng.next() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
    return v;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i)
        acc += a[i] * b[i];
    return acc;
}

double norm(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

// Plain orthonormal DCT-II matrix written out from the textbook formula, kept
// separate from the library so the comparison means something.
std::vector<double> dct2_matrix(int n) {
    std::vector<double> m(static_cast<size_t>(n) * n);
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            m[static_cast<size_t>(k) * n + j] = std::sqrt((k == 0 ? 1.0 : 2.0) / n) *
                                                std::cos(M_PI * (2.0 * j + 1.0) * k / (2.0 * n));
    return m;
}

} // namespace

TEST_CASE("both bases preserve the Euclidean norm") {
    const struct {
        int w, h;
    } shapes[] = {{8, 8}, {16, 16}, {32, 32}, {16, 8}, {8, 32}};
    for (auto basis : {SparsityBasis::Db4Wavelet, SparsityBasis::Dct}) {
        for (const auto& sh : shapes) {
            SparsityTransform psi(basis, sh.w, sh.h);
            for (int trial = 0; trial < 5; ++trial) {
                const auto x = random_field(static_cast<size_t>(sh.w) * sh.h,
                                            1000 + static_cast<uint64_t>(trial) * 7 +
                                                static_cast<uint64_t>(sh.w) * 131 +
                                                static_cast<uint64_t>(basis));
                CHECK(norm(psi.forward(x)) == doctest::Approx(norm(x)).epsilon(1e-12));
                CHECK(norm(psi.inverse(x)) == doctest::Approx(norm(x)).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("synthesis undoes analysis in both directions") {
    for (auto basis : {SparsityBasis::Db4Wavelet, SparsityBasis::Dct}) {
        for (int levels : {0, 1, 2}) { // 0 requests the default
            SparsityTransform psi(basis, 16, 16, levels);
            const auto x = random_field(256, 42 + static_cast<uint64_t>(levels));
            const auto round1 = psi.inverse(psi.forward(x));
            const auto round2 = psi.forward(psi.inverse(x));
            for (size_t i = 0; i < x.size(); ++i) {
                CHECK(round1[i] == doctest::Approx(x[i]).epsilon(1e-11));
                CHECK(round2[i] == doctest::Approx(x[i]).epsilon(1e-11));
            }
        }
    }
}

TEST_CASE("synthesis acts as the transpose of analysis") {
    for (auto basis : {SparsityBasis::Db4Wavelet, SparsityBasis::Dct}) {
        SparsityTransform psi(basis, 32, 8);
        for (int trial = 0; trial < 10; ++trial) {
            const auto x = random_field(256, 500 + static_cast<uint64_t>(trial));
            const auto y = random_field(256, 900 + static_cast<uint64_t>(trial));
            CHECK(dot(psi.forward(x), y) == doctest::Approx(dot(x, psi.inverse(y))).epsilon(1e-11));
        }
    }
}

TEST_CASE("wavelet filters satisfy the orthonormal filter-bank identities") {
    const double s3 = std::sqrt(3.0), nrm = 4.0 * std::sqrt(2.0);
    const double H[4] = {(1 + s3) / nrm, (3 + s3) / nrm, (3 - s3) / nrm, (1 - s3) / nrm};
    const double G[4] = {H[3], -H[2], H[1], -H[0]};

    double hh = 0, hg = 0, hh2 = 0, gsum = 0, gmom = 0, hsum = 0;
    for (int k = 0; k < 4; ++k) {
        hh += H[k] * H[k];
        hg += H[k] * G[k];
        gsum += G[k];
        gmom += k * G[k];
        hsum += H[k];
    }
    hh2 = H[0] * H[2] + H[1] * H[3]; // shift-by-two overlap
    CHECK(hh == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(hg == doctest::Approx(0.0).scale(1).epsilon(1e-14));
    CHECK(hh2 == doctest::Approx(0.0).scale(1).epsilon(1e-14));
    CHECK(gsum == doctest::Approx(0.0).scale(1).epsilon(1e-14));
    CHECK(gmom == doctest::Approx(0.0).scale(1).epsilon(1e-14)); // linear ramps die too
    CHECK(hsum == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("a constant scene concentrates in the approximation band") {
    // Each 2D level multiplies the flat component by 2, so after two levels a
    // 0.5 gray image becomes a 4x4 block of 2.0 and the details vanish.
    SparsityTransform psi(SparsityBasis::Db4Wavelet, 16, 16, 2);
    const auto coeffs = psi.forward(std::vector<double>(256, 0.5));
    for (int r = 0; r < 16; ++r)
        for (int c = 0; c < 16; ++c) {
            const double expected = (r < 4 && c < 4) ? 2.0 : 0.0;
            CHECK(coeffs[static_cast<size_t>(r) * 16 + c] ==
                  doctest::Approx(expected).scale(1).epsilon(1e-12));
        }
}

TEST_CASE("frame transform matches an explicit matrix product") {
    // forward = M_h * X * M_w^T for the orthonormal DCT-II matrices.
    const int w = 4, h = 8;
    SparsityTransform psi(SparsityBasis::Dct, w, h);
    const auto mw = dct2_matrix(w);
    const auto mh = dct2_matrix(h);
    const auto x = random_field(static_cast<size_t>(w) * h, 2718);

    std::vector<double> tmp(x.size(), 0.0), ref(x.size(), 0.0);
    for (int r = 0; r < h; ++r)
        for (int k = 0; k < w; ++k)
            for (int j = 0; j < w; ++j)
                tmp[static_cast<size_t>(r) * w + k] +=
                    mw[static_cast<size_t>(k) * w + j] * x[static_cast<size_t>(r) * w + j];
    for (int k = 0; k < h; ++k)
        for (int r = 0; r < h; ++r)
            for (int c = 0; c < w; ++c)
                ref[static_cast<size_t>(k) * w + c] +=
                    mh[static_cast<size_t>(k) * h + r] * tmp[static_cast<size_t>(r) * w + c];

    const auto got = psi.forward(x);
    for (size_t i = 0; i < ref.size(); ++i)
        CHECK(got[i] == doctest::Approx(ref[i]).scale(1).epsilon(1e-11));
}

TEST_CASE("a pure horizontal cosine lands on a single frame coefficient") {
    const int w = 16, h = 16, k0 = 3;
    std::vector<double> img(static_cast<size_t>(w) * h);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c)
            img[static_cast<size_t>(r) * w + c] = std::cos(M_PI * (2.0 * c + 1.0) * k0 / (2.0 * w));
    SparsityTransform psi(SparsityBasis::Dct, w, h);
    const auto coeffs = psi.forward(img);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            const double expected = (r == 0 && c == k0) ? std::sqrt(w * h / 2.0) : 0.0;
            CHECK(coeffs[static_cast<size_t>(r) * w + c] ==
                  doctest::Approx(expected).scale(1).epsilon(1e-10));
        }
}

TEST_CASE("default level count tracks the short side") {
    CHECK(SparsityTransform::default_levels(8, 8) == 1);
    CHECK(SparsityTransform::default_levels(64, 64) == 3);
    CHECK(SparsityTransform::default_levels(256, 256) == 5);
    CHECK(SparsityTransform::default_levels(1024, 1024) == 6); // clamped
    CHECK(SparsityTransform::default_levels(64, 8) == 1);
    CHECK(SparsityTransform(SparsityBasis::Db4Wavelet, 64, 64).levels() == 3);
    CHECK(SparsityTransform(SparsityBasis::Dct, 64, 64, 5).levels() == 0);
}

TEST_CASE("shape and level validation") {
    CHECK_THROWS_AS(SparsityTransform(SparsityBasis::Db4Wavelet, 12, 8),
                    std::invalid_argument);
    CHECK_THROWS_AS(SparsityTransform(SparsityBasis::Db4Wavelet, 8, 0), std::invalid_argument);
    CHECK_THROWS_AS(SparsityTransform(SparsityBasis::Dct, -4, 4), std::invalid_argument);
    // 8x8 supports at most log2(8) - 1 = 2 levels.
    CHECK_THROWS_AS(SparsityTransform(SparsityBasis::Db4Wavelet, 8, 8, 3), std::invalid_argument);
    CHECK_THROWS_AS(SparsityTransform(SparsityBasis::Db4Wavelet, 8, 8, -1), std::invalid_argument);
    CHECK_NOTHROW(SparsityTransform(SparsityBasis::Db4Wavelet, 8, 8, 2));

    SparsityTransform psi(SparsityBasis::Db4Wavelet, 8, 8);
    CHECK_THROWS_AS(psi.forward(std::vector<double>(63, 0.0)), std::invalid_argument);
    CHECK_THROWS_AS(psi.inverse(std::vector<double>(65, 0.0)), std::invalid_argument);
}
