#include "cswm/pgm.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

namespace cswm {

namespace {

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& why) {
    throw std::runtime_error(path.string() + ": " + why);
}

// Reads the next header token, skipping whitespace and '#' comment lines.
std::string next_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
            continue;
        }
        if (std::isspace(c))
            continue;
        tok.push_back(static_cast<char>(c));
        while ((c = in.peek()) != EOF && !std::isspace(c) && c != '#')
            tok.push_back(static_cast<char>(in.get()));
        return tok;
    }
    return tok;
}

int header_int(std::istream& in, const std::filesystem::path& path, const char* what) {
    const std::string tok = next_token(in);
    if (tok.empty())
        fail(path, std::string("missing ") + what);
    size_t used = 0;
    int value = 0;
    try {
        value = std::stoi(tok, &used);
    } catch (const std::exception&) {
        fail(path, std::string("bad ") + what);
    }
    if (used != tok.size() || value < 0)
        fail(path, std::string("bad ") + what);
    return value;
}

} // namespace

PgmImage read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(path, "cannot open");

    const std::string magic = next_token(in);
    if (magic != "P2" && magic != "P5")
        fail(path, "not an 8-bit PGM (expected P2 or P5)");

    PgmImage img;
    img.width = header_int(in, path, "width");
    img.height = header_int(in, path, "height");
    const int maxval = header_int(in, path, "maxval");
    if (img.width < 1 || img.height < 1)
        fail(path, "empty image");
    if (maxval < 1 || maxval > 255)
        fail(path, "unsupported sample depth (maxval must be 1..255)");

    const size_t count = static_cast<size_t>(img.width) * img.height;
    img.pixels.resize(count);
    if (magic == "P5") {
        // Exactly one whitespace byte separates the header from the raster;
        // the token scanner above leaves it unconsumed.
        const int sep = in.get();
        if (sep == EOF || !std::isspace(sep))
            fail(path, "missing raster separator");
        in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(count));
        if (static_cast<size_t>(in.gcount()) != count)
            fail(path, "truncated raster");
    } else {
        for (size_t i = 0; i < count; ++i) {
            const int v = header_int(in, path, "sample");
            if (v > maxval)
                fail(path, "sample exceeds maxval");
            img.pixels[i] = static_cast<uint8_t>(v);
        }
    }
    if (maxval != 255)
        for (uint8_t& p : img.pixels)
            p = static_cast<uint8_t>(std::lround(p * 255.0 / maxval));
    return img;
}

void write_pgm(const std::filesystem::path& path, const PgmImage& image) {
    if (image.width < 1 || image.height < 1 ||
        image.pixels.size() != static_cast<size_t>(image.width) * image.height)
        throw std::invalid_argument("write_pgm: inconsistent image");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        fail(path, "cannot open for writing");
    out << "P5\n" << image.width << " " << image.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(image.pixels.data()),
              static_cast<std::streamsize>(image.pixels.size()));
    if (!out)
        fail(path, "write failed");
}

std::vector<double> to_unit(const PgmImage& image) {
    std::vector<double> v(image.pixels.size());
    for (size_t i = 0; i < v.size(); ++i)
        v[i] = image.pixels[i] / 255.0;
    return v;
}

PgmImage from_unit(const std::vector<double>& values, int width, int height) {
    if (values.size() != static_cast<size_t>(width) * height)
        throw std::invalid_argument("from_unit: size mismatch");
    PgmImage img;
    img.width = width;
    img.height = height;
    img.pixels.resize(values.size());
    for (size_t i = 0; i < values.size(); ++i) {
        const double v = std::clamp(values[i], 0.0, 1.0);
        img.pixels[i] = static_cast<uint8_t>(std::lround(v * 255.0));
    }
    return img;
}

PgmImage center_crop_pow2(const PgmImage& image) {
    const int side = std::min(image.width, image.height);
    if (side < 2)
        throw std::invalid_argument("center_crop_pow2: image too small");
    int crop = 1;
    while (crop * 2 <= side)
        crop *= 2;
    const int x0 = (image.width - crop) / 2;
    const int y0 = (image.height - crop) / 2;

    PgmImage out;
    out.width = out.height = crop;
    out.pixels.resize(static_cast<size_t>(crop) * crop);
    for (int r = 0; r < crop; ++r)
        for (int c = 0; c < crop; ++c)
            out.pixels[static_cast<size_t>(r) * crop + c] =
                image.pixels[static_cast<size_t>(y0 + r) * image.width + (x0 + c)];
    return out;
}

std::vector<std::vector<double>> tile_patches(const PgmImage& image, int side) {
    if (side < 2 || image.width % side != 0 || image.height % side != 0)
        throw std::invalid_argument("tile_patches: sides must divide the image");
    std::vector<std::vector<double>> out;
    for (int ty = 0; ty < image.height / side; ++ty)
        for (int tx = 0; tx < image.width / side; ++tx) {
            std::vector<double> patch(static_cast<size_t>(side) * side);
            for (int r = 0; r < side; ++r)
                for (int c = 0; c < side; ++c)
                    patch[static_cast<size_t>(r) * side + c] =
                        image.pixels[static_cast<size_t>(ty * side + r) * image.width +
                                     (tx * side + c)] /
                        255.0;
            out.push_back(std::move(patch));
        }
    return out;
}

} // namespace cswm
