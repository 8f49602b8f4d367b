#include "cswm/commands.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "cswm/capacity.hpp"
#include "cswm/eval.hpp"
#include "cswm/keystream.hpp"
#include "cswm/pgm.hpp"
#include "cswm/rdh.hpp"
#include "cswm/recon.hpp"
#include "cswm/stream_file.hpp"

namespace cswm {

namespace {

int side_of(uint32_t order) {
    const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(order))));
    if (static_cast<uint32_t>(side) * static_cast<uint32_t>(side) != order)
        throw std::runtime_error("stream order is not a square, cannot form an image");
    return side;
}

int64_t effective_threshold(int64_t threshold, uint32_t order) {
    if (threshold < 0)
        return static_cast<int64_t>(order) / 2; // loose: every difference is eligible
    if (threshold > static_cast<int64_t>(order) / 2)
        throw std::invalid_argument("threshold exceeds the measurement range");
    return threshold;
}

MarkedStream marked_from_file(const StreamFile& file) {
    if (file.header.stream_kind != kStreamMarked)
        throw std::runtime_error("expected a marked stream file");
    MarkedStream ms;
    ms.values = file.values;
    ms.location_map = file.header.map;
    ms.original_length = file.header.row_count;
    ms.n = file.header.n;
    ms.tail_bits = file.header.tail_bits;
    return ms;
}

// Shared verification used by extract and authorized reconstruction. Throws
// on structural problems; a checksum mismatch returns ok = false.
struct Recovery {
    std::vector<int32_t> values;
    int truncated = 0;
    bool ok = false;
};

Recovery recover_stream(const StreamFile& file, const std::vector<uint8_t>& key_material,
                        int64_t threshold) {
    const MarkedStream ms = marked_from_file(file);
    EmbedParams params;
    params.n = ms.n;
    params.threshold = effective_threshold(threshold, file.header.order);

    ChaChaKeyStream key(key_material);
    ExtractResult result = extract_stream(ms, params, key);

    Recovery rec;
    rec.truncated = static_cast<int>(result.truncated_payloads);
    const int affected = truncation_affected_count(ms.tail_bits);
    std::span<const uint32_t> zeroed(ms.location_map);
    zeroed = zeroed.subspan(ms.location_map.size() - static_cast<size_t>(affected));
    rec.ok = recoverable_checksum(result.values, zeroed) == file.header.checksum;
    rec.values = std::move(result.values);
    return rec;
}

std::vector<double> to_double(std::span<const int32_t> v) {
    return std::vector<double>(v.begin(), v.end());
}

// CSV cells are printed with fixed precision so repeated runs emit identical
// bytes.
std::string fixed6(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}
std::string fixed4(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

void emit_csv(const std::filesystem::path& path, const std::string& body) {
    if (path.empty()) {
        std::cout << body;
        return;
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw std::runtime_error(path.string() + ": cannot open for writing");
    out << body;
    if (!out)
        throw std::runtime_error(path.string() + ": write failed");
}

std::vector<std::vector<double>> sweep_patches_from(const AnalyzeOptions& opts) {
    if (opts.input.empty())
        return synthetic_sparse_patches(opts.patches, opts.patch_size,
                                        opts.seed + 0x5CE4E5ULL);
    const PgmImage img = center_crop_pow2(read_pgm(opts.input));
    if (img.width < opts.patch_size)
        throw std::runtime_error("image crop is smaller than the patch size");
    std::vector<std::vector<double>> tiles = tile_patches(img, opts.patch_size);
    if (opts.patches > 0 && tiles.size() > static_cast<size_t>(opts.patches))
        tiles.resize(static_cast<size_t>(opts.patches));
    return tiles;
}

EvalConfig sweep_config(const AnalyzeOptions& opts) {
    EvalConfig cfg;
    cfg.kind = opts.kind;
    cfg.sampling_rate = opts.rate;
    cfg.seed = opts.seed;
    if (!opts.key_hex.empty())
        cfg.key = parse_key_hex(opts.key_hex);
    cfg.threshold = opts.threshold;
    cfg.max_iters = opts.iters;
    cfg.jobs = opts.jobs;
    return cfg;
}

std::vector<int> sweep_bits(const AnalyzeOptions& opts) {
    if (!opts.bits.empty()) {
        for (int n : opts.bits)
            if (n < 1 || n > 16)
                throw std::invalid_argument("bit depth must be in [1, 16]");
        return opts.bits;
    }
    std::vector<int> ns(8);
    std::iota(ns.begin(), ns.end(), 7);
    return ns;
}

} // namespace

std::vector<uint8_t> parse_key_hex(const std::string& hex) {
    if (hex.size() < 32 || hex.size() % 2 != 0)
        throw std::invalid_argument("key must be at least 32 hex digits (16 bytes)");
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9')
            return c - '0';
        if (c >= 'a' && c <= 'f')
            return c - 'a' + 10;
        if (c >= 'A' && c <= 'F')
            return c - 'A' + 10;
        throw std::invalid_argument("key contains a non-hex character");
    };
    std::vector<uint8_t> key(hex.size() / 2);
    for (size_t i = 0; i < key.size(); ++i)
        key[i] = static_cast<uint8_t>(nibble(hex[2 * i]) << 4 | nibble(hex[2 * i + 1]));
    return key;
}

int cmd_acquire(const AcquireOptions& opts) {
    const PgmImage raw = read_pgm(opts.input);
    const PgmImage img = center_crop_pow2(raw);
    if (img.width != raw.width || img.height != raw.height)
        std::cerr << "note: cropped " << raw.width << "x" << raw.height << " to centered "
                  << img.width << "x" << img.height << "\n";

    const uint32_t order = static_cast<uint32_t>(img.width) * static_cast<uint32_t>(img.height);
    const int rows = opts.rows > 0 ? opts.rows : default_rows(opts.rate, static_cast<int>(order));
    if (rows < 1 || static_cast<uint32_t>(rows) >= order)
        throw std::invalid_argument("row count must be in [1, order)");

    const SensingOperator op =
        SensingOperator::build(opts.kind, order, static_cast<uint32_t>(rows), opts.seed);
    const MeasurementStream y =
        op.project(SceneImage::from_values(img.width, img.height, to_unit(img)));

    StreamFile file;
    file.header.kind = y.kind;
    file.header.order = y.order;
    file.header.row_count = y.row_count;
    file.header.seed = y.seed;
    file.header.stream_kind = kStreamOriginal;
    file.header.checksum = recoverable_checksum(y.values, {});
    file.values = y.values;
    write_stream_file(opts.output, file);

    std::cerr << "acquired " << y.row_count << " of " << y.order << " measurements\n";
    return 0;
}

int cmd_embed(const EmbedOptions& opts) {
    const StreamFile in = read_stream_file(opts.input);
    if (in.header.stream_kind != kStreamOriginal)
        throw std::runtime_error("embed expects an original stream file");
    if (opts.bits < 1 || opts.bits > 16)
        throw std::invalid_argument("bit depth must be in [1, 16]");

    const int64_t loose = static_cast<int64_t>(in.header.order) / 2;
    const int64_t threshold = effective_threshold(opts.threshold, in.header.order);
    const int64_t safe = t_max(opts.bits);
    if (threshold > safe && threshold != loose && !opts.allow_overflow)
        throw std::invalid_argument(
            "threshold " + std::to_string(threshold) + " exceeds the overflow-safe bound " +
            std::to_string(safe) + " for " + std::to_string(opts.bits) +
            " bits; pass --allow-overflow to accept 32-bit marked values");

    EmbedParams params;
    params.n = opts.bits;
    params.threshold = threshold;
    ChaChaKeyStream key(parse_key_hex(opts.key_hex));
    const MarkedStream marked = embed_stream(in.values, params, key);

    const int affected = truncation_affected_count(marked.tail_bits);
    std::span<const uint32_t> zeroed(marked.location_map);
    zeroed = zeroed.subspan(marked.location_map.size() - static_cast<size_t>(affected));

    StreamFile out;
    out.header = in.header;
    out.header.stream_kind = kStreamMarked;
    out.header.n = static_cast<uint8_t>(marked.n);
    out.header.tail_bits = marked.tail_bits;
    out.header.map = marked.location_map;
    out.header.checksum = recoverable_checksum(in.values, zeroed);
    out.values = marked.values;
    write_stream_file(opts.output, out);

    std::cerr << "embedded " << marked.location_map.size() << " payload measurements into "
              << marked.values.size() << " carriers (" << marked.tail_bits
              << " tail bits dropped)\n";
    return 0;
}

int cmd_extract(const ExtractOptions& opts) {
    const StreamFile in = read_stream_file(opts.input);
    Recovery rec;
    try {
        rec = recover_stream(in, parse_key_hex(opts.key_hex), opts.threshold);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    if (!rec.ok) {
        std::cerr << "error: recovered stream does not match the stored checksum "
                     "(wrong key, wrong threshold or corrupted file)\n";
        return 1;
    }

    StreamFile out;
    out.header.kind = in.header.kind;
    out.header.order = in.header.order;
    out.header.row_count = in.header.row_count;
    out.header.seed = in.header.seed;
    out.header.stream_kind = kStreamOriginal;
    out.header.checksum = recoverable_checksum(rec.values, {});
    out.values = rec.values;
    write_stream_file(opts.output, out);

    if (rec.truncated > 0) {
        std::cerr << "recovered with " << rec.truncated
                  << " truncated tail payload(s); their low bits are zero\n";
        return 2;
    }
    std::cerr << "recovered " << out.values.size() << " measurements\n";
    return 0;
}

int cmd_reconstruct(const ReconstructOptions& opts) {
    const StreamFile in = read_stream_file(opts.input);
    const int side = side_of(in.header.order);

    EvalConfig cfg;
    cfg.basis = opts.basis;
    cfg.max_iters = opts.iters;
    cfg.tolerance = opts.tolerance;

    const SensingOperator op = SensingOperator::build(in.header.kind, in.header.order,
                                                      in.header.row_count, in.header.seed);

    std::vector<double> image;
    if (opts.mode == ReconMode::Authorized) {
        std::vector<int32_t> values;
        if (in.header.stream_kind == kStreamOriginal) {
            values = in.values;
        } else {
            Recovery rec = recover_stream(in, parse_key_hex(opts.key_hex), opts.threshold);
            if (!rec.ok) {
                std::cerr << "error: recovered stream does not match the stored checksum\n";
                return 1;
            }
            if (rec.truncated > 0)
                std::cerr << "note: " << rec.truncated
                          << " tail payload(s) were truncated; reconstructing anyway\n";
            values = std::move(rec.values);
        }
        std::vector<double> y = to_double(values);
        const double lambda = opts.lambda >= 0.0 ? opts.lambda : default_lambda(op, y);
        image = box_solve(op, std::move(y), 1.0, lambda, side, side, cfg);
    } else {
        if (in.header.stream_kind != kStreamMarked)
            throw std::runtime_error("this mode expects a marked stream file");
        const SensingOperator reduced = op.reduced(in.header.map);
        const double scale = static_cast<double>(int64_t{1} << in.header.n);
        if (opts.mode == ReconMode::Unauthorized) {
            // The default rule scales with the data, so using it unchanged
            // keeps the penalty covariant with the widened value range.
            std::vector<double> y = to_double(in.values);
            const double lambda = opts.lambda >= 0.0 ? opts.lambda : default_lambda(reduced, y);
            image = box_solve(reduced, std::move(y), scale, lambda, side, side, cfg);
        } else {
            const std::vector<int32_t> attacked = eca_attack(in.values, in.header.n);
            std::vector<double> y = to_double(attacked);
            const double lambda = opts.lambda >= 0.0 ? opts.lambda : default_lambda(reduced, y);
            image = box_solve(reduced, std::move(y), 1.0, lambda, side, side, cfg);
        }
    }

    write_pgm(opts.output, from_unit(image, side, side));
    return 0;
}

int cmd_analyze(const AnalyzeOptions& opts) {
    std::ostringstream csv;

    switch (opts.mode) {
    case AnalyzeMode::Capacity: {
        const StreamFile in = read_stream_file(opts.input);
        if (in.header.stream_kind != kStreamOriginal)
            throw std::runtime_error("capacity analysis expects an original stream file");
        const double length = static_cast<double>(in.header.row_count);
        const int64_t threshold = effective_threshold(opts.threshold, in.header.order);
        const double sigma = stream_sigma(in.values);
        const double p = opts.threshold < 0 ? 1.0 : eligibility_probability(threshold, sigma);

        std::vector<int> ns = opts.bits;
        if (ns.empty()) {
            ns.resize(16);
            std::iota(ns.begin(), ns.end(), 1);
        }
        csv << "n,threshold,eligibility,carriers,relative_capacity,remaining,rate\n";
        for (int n : ns) {
            const double cr = relative_capacity(p, n);
            csv << n << "," << threshold << "," << fixed6(p) << ","
                << fixed6(carrier_count(length, p, n)) << "," << fixed6(cr) << ","
                << fixed6(remaining_measurements(length, cr)) << ","
                << fixed6(compression_rate(n, p)) << "\n";
        }
        break;
    }
    case AnalyzeMode::Rate: {
        const StreamFile orig = read_stream_file(opts.input);
        const StreamFile marked = read_stream_file(opts.marked);
        if (orig.header.stream_kind != kStreamOriginal ||
            marked.header.stream_kind != kStreamMarked)
            throw std::runtime_error("rate analysis expects an original and a marked stream file");
        const double emp = (4.0 * static_cast<double>(marked.values.size())) /
                           (2.0 * static_cast<double>(orig.values.size()));
        const double sigma = stream_sigma(orig.values);
        const double p = opts.threshold < 0
                             ? 1.0
                             : eligibility_probability(
                                   effective_threshold(opts.threshold, orig.header.order), sigma);
        csv << "n,rate_model,rate_empirical\n";
        csv << static_cast<int>(marked.header.n) << ","
            << fixed6(compression_rate(marked.header.n, p)) << "," << fixed6(emp) << "\n";
        break;
    }
    case AnalyzeMode::RateDistortion: {
        const auto patches = sweep_patches_from(opts);
        const auto ns = sweep_bits(opts);
        const auto rows =
            rate_distortion_sweep(patches, opts.patch_size, opts.patch_size, ns, sweep_config(opts));
        csv << "n,relative_capacity,rate,psnr_median\n";
        for (const auto& r : rows)
            csv << r.n << "," << fixed6(r.relative_capacity) << "," << fixed6(r.rate) << ","
                << fixed4(r.psnr_median) << "\n";
        break;
    }
    case AnalyzeMode::Breakdown: {
        const auto patches = sweep_patches_from(opts);
        const auto ns = sweep_bits(opts);
        const auto rows = distortion_breakdown_sweep(patches, opts.patch_size, opts.patch_size, ns,
                                                     sweep_config(opts));
        csv << "n,variant,psnr_median\n";
        for (const auto& r : rows) {
            csv << r.n << ",truncated_clean," << fixed4(r.truncated_clean) << "\n";
            csv << r.n << ",marked_full," << fixed4(r.marked_full) << "\n";
            csv << r.n << ",marked_truncated," << fixed4(r.marked_truncated) << "\n";
        }
        break;
    }
    case AnalyzeMode::Eca: {
        const auto patches = sweep_patches_from(opts);
        const auto ns = sweep_bits(opts);
        const auto rows =
            eca_sweep(patches, opts.patch_size, opts.patch_size, ns, sweep_config(opts));
        csv << "n,psnr_before,psnr_after\n";
        for (const auto& r : rows)
            csv << r.n << "," << fixed4(r.psnr_before) << "," << fixed4(r.psnr_after) << "\n";
        break;
    }
    }

    emit_csv(opts.output, csv.str());
    return 0;
}

} // namespace cswm
