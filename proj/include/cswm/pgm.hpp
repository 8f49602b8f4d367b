#ifndef CSWM_PGM_HPP
#define CSWM_PGM_HPP

#include <cstdint>
#include <filesystem>
#include <vector>

namespace cswm {

// 8-bit grayscale image, row major.
struct PgmImage {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> pixels;
};

// Reads either the ASCII (P2) or binary (P5) variant; the sample depth must
// be 8 bits. Writing always produces P5.
PgmImage read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const PgmImage& image);

std::vector<double> to_unit(const PgmImage& image);
PgmImage from_unit(const std::vector<double>& values, int width, int height);

// Largest centered power-of-two square that fits the image. Images smaller
// than 2 pixels on a side are rejected.
PgmImage center_crop_pow2(const PgmImage& image);

// Splits a crop whose sides are multiples of `side` into row-major square
// tiles in unit range.
std::vector<std::vector<double>> tile_patches(const PgmImage& image, int side);

} // namespace cswm

#endif
