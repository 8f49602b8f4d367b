#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "cswm/bits.hpp"
#include "cswm/keystream.hpp"

namespace cswm {

// Data hiding works on prediction errors with a constant predictor, so the
// error of a measurement is the measurement itself (optionally shifted by a
// fixed offset for non-zero-mean streams, e.g. S-matrix acquisitions).
struct EmbedParams {
    int n = 0;                    // insertion levels, 1..16 bits per carrier
    int64_t threshold = 0;        // eligibility threshold T >= 0
    int32_t predictor_offset = 0; // constant predictor; 0 for Hadamard streams
};

// n-bit chunk queue fed by 16-bit payload words. Leftover bits shorter than a
// chunk stay in `remainder` and are prepended to the next word's bits.
struct ChunkBuffer {
    explicit ChunkBuffer(int n);
    void push_bits(const Bits& bits);
    size_t bit_count() const { return pending.size() * static_cast<size_t>(n) + remainder.size(); }

    int n;
    std::deque<uint32_t> pending;
    Bits remainder;
};

struct MarkedStream {
    std::vector<int32_t> values;        // length = original_length - location_map size
    std::vector<uint32_t> location_map; // sorted indexes of measurements consumed as payload
    uint32_t original_length = 0;
    int n = 0;
    uint16_t tail_bits = 0; // payload bits still buffered when the stream ended
};

enum class MarkClass { Expanded, ShiftedUp, ShiftedDown };

struct ExtractResult {
    std::vector<int32_t> values; // recovered stream, length = original_length
    uint32_t truncated_payloads = 0; // trailing payload values recovered incompletely
    bool tail_truncated() const { return truncated_payloads > 0; }
};

// Largest chunk value for n bits: 2^n - 1.
inline int64_t chunk_max(int n) { return (int64_t{1} << n) - 1; }

// Encrypted 16-bit two's complement encoding of a measurement value,
// MSB-first, XORed with the next 16 key bits.
Bits encode_payload(int32_t value, KeyStream& key);

// Slice remainder + bits into n-bit chunks (MSB-first); leftover becomes the
// new remainder.
void chunk(ChunkBuffer& buf, const Bits& bits);

// Piecewise marking map. Eligible errors (|d| <= T) expand to 2^n*d + bn and
// must come with a chunk; ineligible ones shift by bn_max*T + bn_max upward or
// bn_max*T downward and must not. The three output ranges are pairwise
// disjoint, which is what makes the inverse well defined.
int64_t expand_or_shift(int64_t d, std::optional<uint32_t> bn, int n, int64_t threshold);

// Inverse of expand_or_shift: recovers (d, chunk) from a marked value.
std::pair<int64_t, std::optional<uint32_t>> invert_expansion(int64_t marked, int n,
                                                             int64_t threshold);

MarkClass classify_marked_value(int64_t marked, int n, int64_t threshold);

// On-the-fly embedding pass over a measurement stream. The first measurement
// is always consumed as payload; afterwards a measurement is consumed when no
// buffered chunk is available to embed (and, when only a sub-chunk remainder
// is buffered, when the measurement is eligible, since an ineligible one can
// still be shifted reversibly). Buffered bits left at the end of the stream
// are dropped and reported as tail_bits.
MarkedStream embed_stream(std::span<const int32_t> source, const EmbedParams& params,
                          KeyStream& key);

// Rebuilds the original stream from a marked one. Payload values whose bits
// were cut off by the end of the stream are returned with the missing low
// bits set to zero and counted in truncated_payloads.
ExtractResult extract_stream(const MarkedStream& marked, const EmbedParams& params,
                             KeyStream& key);

} // namespace cswm
