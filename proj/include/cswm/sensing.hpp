#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace cswm {

enum class MatrixKind : uint8_t {
    ScrambledHadamard = 0, // +/-1 Hadamard rows, columns permuted, all-ones row excluded
    ScrambledSMatrix = 1,  // 0/1 S-matrix derived from the Hadamard matrix, columns permuted
};

// Grayscale scene, values normalized to [0,1]. On construction every pixel is
// snapped to a 1/2^24 grid; all sensing arithmetic then runs on exact 64-bit
// integers, which is what makes the fast transform path and the dense oracle
// agree bit for bit.
struct SceneImage {
    int width = 0;
    int height = 0;
    std::vector<double> values;

    static SceneImage from_values(int width, int height, std::vector<double> v);
    size_t pixel_count() const { return values.size(); }
};

// Quantized measurements plus the operator descriptor needed to rebuild the
// matrix on the receiving side.
struct MeasurementStream {
    std::vector<int32_t> values;
    MatrixKind kind = MatrixKind::ScrambledHadamard;
    uint32_t order = 0;     // S
    uint32_t row_count = 0; // L
    uint64_t seed = 0;
};

// Deterministic 64-bit generator driving the column shuffle. The update and
// output functions are part of the on-disk contract (see docs/FORMAT.md):
// a stream file stores only the seed, and both ends must derive the same
// permutation from it.
struct SplitMix64 {
    uint64_t state;
    uint64_t next() {
        state += 0x9E3779B97F4A7C15ull;
        uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }
};

// Fisher-Yates shuffle of 0..n-1 driven by SplitMix64 (indices drawn modulo
// the remaining range). Same seed, same permutation, on every platform.
std::vector<uint32_t> seeded_permutation(uint32_t n, uint64_t seed);

// In-place Walsh-Hadamard butterflies in natural (Sylvester) order.
// Length must be a power of two.
void fwht(std::span<int64_t> v);
void fwht(std::span<double> v);

// Measurement operator for a single-pixel acquisition. The underlying matrix
// is never materialized: entries come from the Sylvester Hadamard sign
// pattern, so projection runs through one fast transform and the dense oracle
// walks rows element by element.
//
// ScrambledHadamard keeps Hadamard rows 1..L (row 0, all ones, is excluded)
// and permutes all S columns. ScrambledSMatrix drops the first row and column
// of the Hadamard matrix, complements the remaining signs into {0,1}
// (-1 -> 1, +1 -> 0), and permutes the S-1 surviving columns; scene pixel 0
// is simply never sampled by that kind.
class SensingOperator {
public:
    static SensingOperator build(MatrixKind kind, uint32_t order, uint32_t row_count,
                                 uint64_t seed);
    // Test/plumbing constructor with an explicit column permutation
    // (size S for Hadamard, S-1 for the S-matrix).
    static SensingOperator with_permutation(MatrixKind kind, uint32_t order, uint32_t row_count,
                                            std::vector<uint32_t> permutation, uint64_t seed = 0);

    // New operator with the rows at `positions` removed (positions index the
    // current measurement order, not Hadamard row ids). Duplicates or
    // out-of-range positions throw. Row order is otherwise preserved.
    SensingOperator reduced(const std::vector<uint32_t>& positions) const;

    // Integer measurement paths. Dot products are computed exactly in fixed
    // point and rounded half-away-from-zero to integers.
    MeasurementStream project(const SceneImage& img) const;
    MeasurementStream project_dense(const SceneImage& img) const; // row-by-row oracle

    // Exact transpose applied to an integer stream (values are exact integers
    // returned as doubles). `adjoint_dense` is the row-walking oracle.
    std::vector<double> adjoint(std::span<const int32_t> stream) const;
    std::vector<double> adjoint_dense(std::span<const int32_t> stream) const;

    // Unrounded floating-point paths for iterative solvers.
    std::vector<double> apply_real(std::span<const double> x) const;
    std::vector<double> adjoint_real(std::span<const double> y) const;

    // Matrix element for row position i and scene column c.
    int dense_entry(uint32_t row, uint32_t col) const;

    MatrixKind kind() const { return kind_; }
    uint32_t order() const { return order_; }
    uint32_t row_count() const { return static_cast<uint32_t>(rows_.size()); }
    uint64_t seed() const { return seed_; }
    const std::vector<uint32_t>& permutation() const { return perm_; }
    const std::vector<uint32_t>& selected_rows() const { return rows_; }

    // Theoretical measurement range (-S/2, S/2) for scenes in [0,1].
    static std::pair<int64_t, int64_t> measurement_bounds(uint32_t order);

private:
    SensingOperator() = default;

    MatrixKind kind_ = MatrixKind::ScrambledHadamard;
    uint32_t order_ = 0;
    uint64_t seed_ = 0;
    std::vector<uint32_t> perm_; // column scramble
    std::vector<uint32_t> rows_; // retained Hadamard row ids, each in [1, S-1]
};

} // namespace cswm
