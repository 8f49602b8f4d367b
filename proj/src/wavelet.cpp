#include "cswm/wavelet.hpp"

#include <cmath>
#include <stdexcept>

namespace cswm {

namespace {

bool pow2(int v) { return v > 0 && (v & (v - 1)) == 0; }
int log2i(int v) {
    int l = 0;
    while ((1 << l) < v)
        ++l;
    return l;
}

// Daubechies-4 analysis filters; the high-pass is the alternating flip of the
// low-pass, which keeps the periodized transform orthonormal.
const double kSqrt3 = std::sqrt(3.0);
const double kNorm = 4.0 * std::sqrt(2.0);
const double H[4] = {(1.0 + kSqrt3) / kNorm, (3.0 + kSqrt3) / kNorm, (3.0 - kSqrt3) / kNorm,
                     (1.0 - kSqrt3) / kNorm};
const double G[4] = {H[3], -H[2], H[1], -H[0]};

void db4_step(const double* in, double* out, int n) {
    const int half = n / 2;
    for (int i = 0; i < half; ++i) {
        double a = 0.0, d = 0.0;
        for (int k = 0; k < 4; ++k) {
            const double x = in[(2 * i + k) % n];
            a += H[k] * x;
            d += G[k] * x;
        }
        out[i] = a;
        out[half + i] = d;
    }
}

void db4_unstep(const double* in, double* out, int n) {
    const int half = n / 2;
    for (int i = 0; i < n; ++i)
        out[i] = 0.0;
    for (int i = 0; i < half; ++i)
        for (int k = 0; k < 4; ++k)
            out[(2 * i + k) % n] += H[k] * in[i] + G[k] * in[half + i];
}

using LineOp = void (*)(const double*, double*, int);

void apply_rows(std::vector<double>& img, int stride, int w, int h, LineOp op) {
    std::vector<double> in(w), out(w);
    for (int r = 0; r < h; ++r) {
        double* row = img.data() + static_cast<size_t>(r) * stride;
        for (int c = 0; c < w; ++c)
            in[c] = row[c];
        op(in.data(), out.data(), w);
        for (int c = 0; c < w; ++c)
            row[c] = out[c];
    }
}

void apply_cols(std::vector<double>& img, int stride, int w, int h, LineOp op) {
    std::vector<double> in(h), out(h);
    for (int c = 0; c < w; ++c) {
        for (int r = 0; r < h; ++r)
            in[r] = img[static_cast<size_t>(r) * stride + c];
        op(in.data(), out.data(), h);
        for (int r = 0; r < h; ++r)
            img[static_cast<size_t>(r) * stride + c] = out[r];
    }
}

std::vector<double> dct_matrix(int n) {
    std::vector<double> m(static_cast<size_t>(n) * n);
    const double s0 = std::sqrt(1.0 / n);
    const double s = std::sqrt(2.0 / n);
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            m[static_cast<size_t>(k) * n + j] =
                (k == 0 ? s0 : s) * std::cos(M_PI * (2.0 * j + 1.0) * k / (2.0 * n));
    return m;
}

// out = M * v (rows) or M^T * v when transposed.
void mat_line(const std::vector<double>& m, const double* in, double* out, int n, bool transpose) {
    for (int k = 0; k < n; ++k) {
        double acc = 0.0;
        for (int j = 0; j < n; ++j)
            acc += (transpose ? m[static_cast<size_t>(j) * n + k] : m[static_cast<size_t>(k) * n + j]) * in[j];
        out[k] = acc;
    }
}

} // namespace

int SparsityTransform::default_levels(int width, int height) {
    const int l = log2i(std::min(width, height)) - 3;
    return l < 1 ? 1 : (l > 6 ? 6 : l);
}

SparsityTransform::SparsityTransform(SparsityBasis basis, int width, int height, int levels)
    : basis_(basis), width_(width), height_(height), levels_(levels) {
    if (!pow2(width) || !pow2(height))
        throw std::invalid_argument("SparsityTransform: sides must be powers of two");
    if (basis_ == SparsityBasis::Db4Wavelet) {
        if (levels_ == 0)
            levels_ = default_levels(width, height);
        const int max_levels = log2i(std::min(width, height)) - 1;
        if (levels_ < 1 || levels_ > max_levels)
            throw std::invalid_argument("SparsityTransform: level count out of range");
    } else {
        levels_ = 0;
        dct_row_ = dct_matrix(width);
        dct_col_ = height == width ? dct_row_ : dct_matrix(height);
    }
}

std::vector<double> SparsityTransform::forward(const std::vector<double>& image) const {
    if (image.size() != static_cast<size_t>(width_) * height_)
        throw std::invalid_argument("SparsityTransform: size mismatch");
    std::vector<double> out = image;
    if (basis_ == SparsityBasis::Db4Wavelet) {
        int w = width_, h = height_;
        for (int l = 0; l < levels_; ++l) {
            apply_rows(out, width_, w, h, db4_step);
            apply_cols(out, width_, w, h, db4_step);
            w /= 2;
            h /= 2;
        }
    } else {
        std::vector<double> tmp(out.size());
        std::vector<double> in(width_), res(width_);
        for (int r = 0; r < height_; ++r) {
            mat_line(dct_row_, out.data() + static_cast<size_t>(r) * width_,
                     tmp.data() + static_cast<size_t>(r) * width_, width_, false);
        }
        in.resize(height_);
        res.resize(height_);
        for (int c = 0; c < width_; ++c) {
            for (int r = 0; r < height_; ++r)
                in[r] = tmp[static_cast<size_t>(r) * width_ + c];
            mat_line(dct_col_, in.data(), res.data(), height_, false);
            for (int r = 0; r < height_; ++r)
                out[static_cast<size_t>(r) * width_ + c] = res[r];
        }
    }
    return out;
}

std::vector<double> SparsityTransform::inverse(const std::vector<double>& coeffs) const {
    if (coeffs.size() != static_cast<size_t>(width_) * height_)
        throw std::invalid_argument("SparsityTransform: size mismatch");
    std::vector<double> out = coeffs;
    if (basis_ == SparsityBasis::Db4Wavelet) {
        for (int l = levels_ - 1; l >= 0; --l) {
            const int w = width_ >> l;
            const int h = height_ >> l;
            apply_cols(out, width_, w, h, db4_unstep);
            apply_rows(out, width_, w, h, db4_unstep);
        }
    } else {
        std::vector<double> tmp(out.size());
        std::vector<double> in(height_), res(height_);
        for (int c = 0; c < width_; ++c) {
            for (int r = 0; r < height_; ++r)
                in[r] = out[static_cast<size_t>(r) * width_ + c];
            mat_line(dct_col_, in.data(), res.data(), height_, true);
            for (int r = 0; r < height_; ++r)
                tmp[static_cast<size_t>(r) * width_ + c] = res[r];
        }
        in.resize(width_);
        res.resize(width_);
        for (int r = 0; r < height_; ++r)
            mat_line(dct_row_, tmp.data() + static_cast<size_t>(r) * width_,
                     out.data() + static_cast<size_t>(r) * width_, width_, true);
    }
    return out;
}

} // namespace cswm
