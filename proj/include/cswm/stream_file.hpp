#ifndef CSWM_STREAM_FILE_HPP
#define CSWM_STREAM_FILE_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "cswm/sensing.hpp"

namespace cswm {

// On-disk measurement container. One format serves both stages:
//   original streams store 16-bit values and no map,
//   marked streams store 32-bit values plus the consumed positions.
// The exact byte layout is frozen in docs/FORMAT.md.
inline constexpr uint8_t kStreamOriginal = 0;
inline constexpr uint8_t kStreamMarked = 1;

struct StreamHeader {
    MatrixKind kind = MatrixKind::ScrambledHadamard;
    uint32_t order = 0;
    uint32_t row_count = 0;
    uint64_t seed = 0;
    uint8_t stream_kind = kStreamOriginal;
    uint8_t n = 0;
    uint16_t tail_bits = 0;
    std::vector<uint32_t> map;
    uint32_t checksum = 0;
};

struct StreamFile {
    StreamHeader header;
    std::vector<int32_t> values;
};

// How many payload values at the end of the map lose bits when the stream
// ends mid-buffer: zero when the buffer is empty, one while at most a whole
// payload is pending, two once leftover bits from the next payload joined it.
int truncation_affected_count(uint16_t tail_bits);

// CRC-32 over the little-endian 16-bit original values, with the given
// positions zeroed first. Embedding stores this over the positions a
// truncated tail cannot restore, so extraction can tell a short tail apart
// from a wrong key.
uint32_t recoverable_checksum(std::span<const int32_t> original_values,
                              std::span<const uint32_t> zeroed_positions);

std::vector<uint8_t> encode_stream_file(const StreamFile& file);
StreamFile decode_stream_file(std::span<const uint8_t> bytes);

void write_stream_file(const std::filesystem::path& path, const StreamFile& file);
StreamFile read_stream_file(const std::filesystem::path& path);

} // namespace cswm

#endif
