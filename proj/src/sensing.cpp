#include "cswm/sensing.hpp"

#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace cswm {

namespace {

constexpr int kFracBits = 24;
constexpr int64_t kFracOne = int64_t{1} << kFracBits;
constexpr int64_t kFracHalf = int64_t{1} << (kFracBits - 1);

bool is_pow2(uint32_t v) { return v != 0 && (v & (v - 1)) == 0; }

// Hadamard sign in natural order: H[r][c] = (-1)^popcount(r & c).
inline int hadamard_sign(uint32_t r, uint32_t c) {
    return (std::popcount(r & c) & 1) ? -1 : 1;
}

inline int64_t fixed_point(double v) { return std::llround(v * static_cast<double>(kFracOne)); }

// Round a/2^24 to the nearest integer, halves away from zero.
inline int64_t round_fixed(int64_t a) {
    return a >= 0 ? (a + kFracHalf) >> kFracBits : -((-a + kFracHalf) >> kFracBits);
}

void check_scene(const SensingOperator& op, const SceneImage& img) {
    if (img.pixel_count() != op.order())
        throw std::invalid_argument("scene pixel count does not match operator order");
}

} // namespace

SceneImage SceneImage::from_values(int width, int height, std::vector<double> v) {
    if (width <= 0 || height <= 0)
        throw std::invalid_argument("SceneImage: non-positive dimensions");
    if (v.size() != static_cast<size_t>(width) * static_cast<size_t>(height))
        throw std::invalid_argument("SceneImage: value count does not match dimensions");
    for (double& x : v) {
        if (!(x >= 0.0 && x <= 1.0))
            throw std::invalid_argument("SceneImage: value outside [0,1]");
        x = static_cast<double>(fixed_point(x)) / static_cast<double>(kFracOne);
    }
    SceneImage img;
    img.width = width;
    img.height = height;
    img.values = std::move(v);
    return img;
}

std::vector<uint32_t> seeded_permutation(uint32_t n, uint64_t seed) {
    std::vector<uint32_t> p(n);
    std::iota(p.begin(), p.end(), 0u);
    SplitMix64 rng{seed};
    for (uint32_t i = n; i > 1; --i) {
        const uint32_t j = static_cast<uint32_t>(rng.next() % i);
        std::swap(p[i - 1], p[j]);
    }
    return p;
}

void fwht(std::span<int64_t> v) {
    const size_t n = v.size();
    if (!is_pow2(static_cast<uint32_t>(n)))
        throw std::invalid_argument("fwht: length must be a power of two");
    for (size_t len = 1; len < n; len <<= 1)
        for (size_t i = 0; i < n; i += len << 1)
            for (size_t j = i; j < i + len; ++j) {
                const int64_t a = v[j];
                const int64_t b = v[j + len];
                v[j] = a + b;
                v[j + len] = a - b;
            }
}

void fwht(std::span<double> v) {
    const size_t n = v.size();
    if (!is_pow2(static_cast<uint32_t>(n)))
        throw std::invalid_argument("fwht: length must be a power of two");
    for (size_t len = 1; len < n; len <<= 1)
        for (size_t i = 0; i < n; i += len << 1)
            for (size_t j = i; j < i + len; ++j) {
                const double a = v[j];
                const double b = v[j + len];
                v[j] = a + b;
                v[j + len] = a - b;
            }
}

SensingOperator SensingOperator::build(MatrixKind kind, uint32_t order, uint32_t row_count,
                                       uint64_t seed) {
    const uint32_t cols = kind == MatrixKind::ScrambledHadamard ? order : order - 1;
    return with_permutation(kind, order, row_count, seeded_permutation(cols, seed), seed);
}

SensingOperator SensingOperator::with_permutation(MatrixKind kind, uint32_t order,
                                                  uint32_t row_count,
                                                  std::vector<uint32_t> permutation,
                                                  uint64_t seed) {
    if (!is_pow2(order) || order < 2)
        throw std::invalid_argument("operator order must be a power of two >= 2");
    if (row_count < 1 || row_count > order - 1)
        throw std::invalid_argument("row count must be in [1, S-1]");
    const uint32_t cols = kind == MatrixKind::ScrambledHadamard ? order : order - 1;
    if (permutation.size() != cols)
        throw std::invalid_argument("permutation size does not match column count");
    std::vector<bool> seen(cols, false);
    for (uint32_t c : permutation) {
        if (c >= cols || seen[c])
            throw std::invalid_argument("permutation is not a bijection");
        seen[c] = true;
    }
    SensingOperator op;
    op.kind_ = kind;
    op.order_ = order;
    op.seed_ = seed;
    op.perm_ = std::move(permutation);
    op.rows_.resize(row_count);
    std::iota(op.rows_.begin(), op.rows_.end(), 1u);
    return op;
}

SensingOperator SensingOperator::reduced(const std::vector<uint32_t>& positions) const {
    std::vector<bool> drop(rows_.size(), false);
    for (uint32_t p : positions) {
        if (p >= rows_.size())
            throw std::invalid_argument("reduce: row position out of range");
        if (drop[p])
            throw std::invalid_argument("reduce: duplicate row position");
        drop[p] = true;
    }
    SensingOperator op;
    op.kind_ = kind_;
    op.order_ = order_;
    op.seed_ = seed_;
    op.perm_ = perm_;
    op.rows_.reserve(rows_.size() - positions.size());
    for (size_t i = 0; i < rows_.size(); ++i)
        if (!drop[i])
            op.rows_.push_back(rows_[i]);
    return op;
}

int SensingOperator::dense_entry(uint32_t row, uint32_t col) const {
    if (row >= rows_.size() || col >= order_)
        throw std::out_of_range("dense_entry: index out of range");
    if (kind_ == MatrixKind::ScrambledHadamard)
        return hadamard_sign(rows_[row], perm_[col]);
    if (col == 0)
        return 0; // the S-matrix construction removes the first Hadamard column
    return hadamard_sign(rows_[row], perm_[col - 1] + 1) < 0 ? 1 : 0;
}

MeasurementStream SensingOperator::project(const SceneImage& img) const {
    check_scene(*this, img);
    std::vector<int64_t> buf(order_, 0);
    int64_t total = 0;
    if (kind_ == MatrixKind::ScrambledHadamard) {
        for (uint32_t c = 0; c < order_; ++c)
            buf[perm_[c]] = fixed_point(img.values[c]);
    } else {
        for (uint32_t c = 1; c < order_; ++c) {
            const int64_t k = fixed_point(img.values[c]);
            buf[perm_[c - 1] + 1] = k;
            total += k;
        }
    }
    fwht(std::span<int64_t>(buf));

    MeasurementStream out;
    out.kind = kind_;
    out.order = order_;
    out.row_count = row_count();
    out.seed = seed_;
    out.values.reserve(rows_.size());
    for (uint32_t r : rows_) {
        const int64_t dot =
            kind_ == MatrixKind::ScrambledHadamard ? buf[r] : (total - buf[r]) / 2;
        out.values.push_back(static_cast<int32_t>(round_fixed(dot)));
    }
    return out;
}

MeasurementStream SensingOperator::project_dense(const SceneImage& img) const {
    check_scene(*this, img);
    std::vector<int64_t> fp(order_);
    for (uint32_t c = 0; c < order_; ++c)
        fp[c] = fixed_point(img.values[c]);

    MeasurementStream out;
    out.kind = kind_;
    out.order = order_;
    out.row_count = row_count();
    out.seed = seed_;
    out.values.reserve(rows_.size());
    for (uint32_t i = 0; i < rows_.size(); ++i) {
        int64_t dot = 0;
        for (uint32_t c = 0; c < order_; ++c)
            dot += static_cast<int64_t>(dense_entry(i, c)) * fp[c];
        out.values.push_back(static_cast<int32_t>(round_fixed(dot)));
    }
    return out;
}

std::vector<double> SensingOperator::adjoint(std::span<const int32_t> stream) const {
    if (stream.size() != rows_.size())
        throw std::invalid_argument("adjoint: stream length does not match row count");
    std::vector<int64_t> acc(order_, 0);
    int64_t total = 0;
    for (size_t i = 0; i < stream.size(); ++i) {
        acc[rows_[i]] += stream[i];
        total += stream[i];
    }
    fwht(std::span<int64_t>(acc));

    std::vector<double> out(order_);
    if (kind_ == MatrixKind::ScrambledHadamard) {
        for (uint32_t c = 0; c < order_; ++c)
            out[c] = static_cast<double>(acc[perm_[c]]);
    } else {
        out[0] = 0.0;
        for (uint32_t c = 1; c < order_; ++c)
            out[c] = static_cast<double>((total - acc[perm_[c - 1] + 1]) / 2);
    }
    return out;
}

std::vector<double> SensingOperator::adjoint_dense(std::span<const int32_t> stream) const {
    if (stream.size() != rows_.size())
        throw std::invalid_argument("adjoint: stream length does not match row count");
    std::vector<double> out(order_, 0.0);
    for (uint32_t c = 0; c < order_; ++c) {
        int64_t acc = 0;
        for (uint32_t i = 0; i < rows_.size(); ++i)
            acc += static_cast<int64_t>(dense_entry(i, c)) * stream[i];
        out[c] = static_cast<double>(acc);
    }
    return out;
}

std::vector<double> SensingOperator::apply_real(std::span<const double> x) const {
    if (x.size() != order_)
        throw std::invalid_argument("apply_real: vector length does not match order");
    std::vector<double> buf(order_, 0.0);
    double total = 0.0;
    if (kind_ == MatrixKind::ScrambledHadamard) {
        for (uint32_t c = 0; c < order_; ++c)
            buf[perm_[c]] = x[c];
    } else {
        for (uint32_t c = 1; c < order_; ++c) {
            buf[perm_[c - 1] + 1] = x[c];
            total += x[c];
        }
    }
    fwht(std::span<double>(buf));
    std::vector<double> out(rows_.size());
    for (size_t i = 0; i < rows_.size(); ++i)
        out[i] = kind_ == MatrixKind::ScrambledHadamard ? buf[rows_[i]]
                                                        : 0.5 * (total - buf[rows_[i]]);
    return out;
}

std::vector<double> SensingOperator::adjoint_real(std::span<const double> y) const {
    if (y.size() != rows_.size())
        throw std::invalid_argument("adjoint_real: vector length does not match row count");
    std::vector<double> acc(order_, 0.0);
    double total = 0.0;
    for (size_t i = 0; i < y.size(); ++i) {
        acc[rows_[i]] += y[i];
        total += y[i];
    }
    fwht(std::span<double>(acc));
    std::vector<double> out(order_);
    if (kind_ == MatrixKind::ScrambledHadamard) {
        for (uint32_t c = 0; c < order_; ++c)
            out[c] = acc[perm_[c]];
    } else {
        out[0] = 0.0;
        for (uint32_t c = 1; c < order_; ++c)
            out[c] = 0.5 * (total - acc[perm_[c - 1] + 1]);
    }
    return out;
}

std::pair<int64_t, int64_t> SensingOperator::measurement_bounds(uint32_t order) {
    if (!is_pow2(order) || order < 2)
        throw std::invalid_argument("measurement_bounds: order must be a power of two >= 2");
    const int64_t half = static_cast<int64_t>(order) / 2;
    return {-half, half};
}

} // namespace cswm
