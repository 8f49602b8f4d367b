#pragma once

#include <cstdint>
#include <vector>

namespace cswm {

enum class SparsityBasis : uint8_t { Db4Wavelet = 0, Dct = 1 };

// Orthonormal 2D analysis/synthesis transform on row-major images whose sides
// are powers of two. Both bases preserve the Euclidean norm exactly (up to
// rounding), so the synthesis is the plain transpose of the analysis.
//
// Db4Wavelet: separable multi-level Daubechies-4 with periodic boundary;
// levels default to log2(min side) - 3, clamped to [1,6]. Dct: full-frame
// orthonormal DCT-II along rows and columns.
class SparsityTransform {
public:
    SparsityTransform(SparsityBasis basis, int width, int height, int levels = 0);

    std::vector<double> forward(const std::vector<double>& image) const;
    std::vector<double> inverse(const std::vector<double>& coeffs) const;

    SparsityBasis basis() const { return basis_; }
    int levels() const { return levels_; }

    static int default_levels(int width, int height);

private:
    SparsityBasis basis_;
    int width_, height_, levels_;
    std::vector<double> dct_row_, dct_col_; // cached orthonormal DCT matrices
};

} // namespace cswm
