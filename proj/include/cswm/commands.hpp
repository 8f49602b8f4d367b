#ifndef CSWM_COMMANDS_HPP
#define CSWM_COMMANDS_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cswm/sensing.hpp"
#include "cswm/wavelet.hpp"

namespace cswm {

// Hex-encoded key material for the payload protection stream; at least
// 32 hex digits (16 bytes).
std::vector<uint8_t> parse_key_hex(const std::string& hex);

struct AcquireOptions {
    std::filesystem::path input;
    std::filesystem::path output;
    MatrixKind kind = MatrixKind::ScrambledSMatrix;
    double rate = 0.4;
    int rows = 0; // 0 derives the count from the sampling rate
    uint64_t seed = 1;
};
int cmd_acquire(const AcquireOptions& opts);

struct EmbedOptions {
    std::filesystem::path input;
    std::filesystem::path output;
    std::string key_hex;
    int bits = 10;
    int64_t threshold = -1; // negative selects the loose setting, order/2
    bool allow_overflow = false;
};
int cmd_embed(const EmbedOptions& opts);

struct ExtractOptions {
    std::filesystem::path input;
    std::filesystem::path output;
    std::string key_hex;
    int64_t threshold = -1;
};
// Returns 0 on a complete recovery, 2 when only the truncated tail payloads
// are incomplete, 1 when the stream does not check out (wrong key, wrong
// threshold or corruption).
int cmd_extract(const ExtractOptions& opts);

enum class ReconMode { Authorized, Unauthorized, Eca };

struct ReconstructOptions {
    std::filesystem::path input;
    std::filesystem::path output;
    ReconMode mode = ReconMode::Authorized;
    std::string key_hex;
    int64_t threshold = -1;
    double lambda = -1.0; // negative picks the per-mode default weight
    int iters = 500;
    double tolerance = 1e-6;
    SparsityBasis basis = SparsityBasis::Db4Wavelet;
};
int cmd_reconstruct(const ReconstructOptions& opts);

enum class AnalyzeMode { Capacity, Rate, RateDistortion, Breakdown, Eca };

struct AnalyzeOptions {
    AnalyzeMode mode = AnalyzeMode::Capacity;
    std::filesystem::path input;  // stream file for capacity/rate, PGM for sweeps
    std::filesystem::path marked; // second input for the rate comparison
    std::filesystem::path output; // CSV path; empty prints to stdout
    std::vector<int> bits;
    int64_t threshold = -1;
    MatrixKind kind = MatrixKind::ScrambledSMatrix;
    double rate = 0.4;
    uint64_t seed = 1;
    std::string key_hex;
    int patches = 8;
    int patch_size = 64;
    int iters = 1500;
    int jobs = 1;
};
int cmd_analyze(const AnalyzeOptions& opts);

} // namespace cswm

#endif
