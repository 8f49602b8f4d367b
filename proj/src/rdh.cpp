#include "cswm/rdh.hpp"

#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>

namespace cswm {

namespace {

void check_params(const EmbedParams& p) {
    if (p.n < 1 || p.n > 16)
        throw std::invalid_argument("insertion levels must be in [1,16]");
    if (p.threshold < 0)
        throw std::invalid_argument("threshold must be non-negative");
}

int64_t checked_int32(int64_t v, uint32_t index) {
    if (v < std::numeric_limits<int32_t>::min() || v > std::numeric_limits<int32_t>::max())
        throw std::overflow_error("marked value at index " + std::to_string(index) +
                                  " exceeds the signed 32-bit range");
    return v;
}

void check_source_value(int64_t y, uint32_t index) {
    // Declared 16-bit measurement range; +2^15 can occur at the top order.
    if (y < -32768 || y > 32768)
        throw std::invalid_argument("measurement at index " + std::to_string(index) +
                                    " outside the declared 16-bit range");
}

} // namespace

ChunkBuffer::ChunkBuffer(int levels) : n(levels) {
    if (n < 1 || n > 16)
        throw std::invalid_argument("chunk size must be in [1,16]");
}

void ChunkBuffer::push_bits(const Bits& bits) { chunk(*this, bits); }

Bits encode_payload(int32_t value, KeyStream& key) {
    if (value < -32768 || value > 32767)
        throw std::invalid_argument("payload value not representable on 16 bits");
    return xor_protect(int16_to_bits(value), key.next_bits(16));
}

void chunk(ChunkBuffer& buf, const Bits& bits) {
    Bits all = std::move(buf.remainder);
    append_bits(all, bits);
    const size_t n = static_cast<size_t>(buf.n);
    size_t pos = 0;
    for (; pos + n <= all.size(); pos += n) {
        uint32_t v = 0;
        for (size_t i = 0; i < n; ++i)
            v = (v << 1) | all[pos + i];
        buf.pending.push_back(v);
    }
    buf.remainder.assign(all.begin() + static_cast<long>(pos), all.end());
}

int64_t expand_or_shift(int64_t d, std::optional<uint32_t> bn, int n, int64_t threshold) {
    if (n < 1 || n > 16 || threshold < 0)
        throw std::invalid_argument("expand_or_shift: bad parameters");
    const int64_t bn_max = chunk_max(n);
    if (std::llabs(d) <= threshold) {
        if (!bn)
            throw std::invalid_argument("expand_or_shift: eligible value needs a chunk");
        if (*bn > bn_max)
            throw std::invalid_argument("expand_or_shift: chunk exceeds 2^n - 1");
        return d * (int64_t{1} << n) + static_cast<int64_t>(*bn);
    }
    if (bn)
        throw std::invalid_argument("expand_or_shift: ineligible value cannot take a chunk");
    return d > threshold ? d + bn_max * threshold + bn_max : d - bn_max * threshold;
}

std::pair<int64_t, std::optional<uint32_t>> invert_expansion(int64_t marked, int n,
                                                             int64_t threshold) {
    if (n < 1 || n > 16 || threshold < 0)
        throw std::invalid_argument("invert_expansion: bad parameters");
    const int64_t bn_max = chunk_max(n);
    const int64_t scale = int64_t{1} << n;
    const int64_t expanded_hi = threshold * scale + bn_max;
    const int64_t expanded_lo = -threshold * scale;
    if (marked > expanded_hi)
        return {marked - bn_max * threshold - bn_max, std::nullopt};
    if (marked < expanded_lo)
        return {marked + bn_max * threshold, std::nullopt};
    const int64_t d = marked >> n; // floor division
    const int64_t bn = marked - d * scale;
    return {d, static_cast<uint32_t>(bn)};
}

MarkClass classify_marked_value(int64_t marked, int n, int64_t threshold) {
    if (n < 1 || n > 16 || threshold < 0)
        throw std::invalid_argument("classify_marked_value: bad parameters");
    const int64_t bn_max = chunk_max(n);
    const int64_t scale = int64_t{1} << n;
    if (marked > threshold * scale + bn_max)
        return MarkClass::ShiftedUp;
    if (marked < -threshold * scale)
        return MarkClass::ShiftedDown;
    return MarkClass::Expanded;
}

MarkedStream embed_stream(std::span<const int32_t> source, const EmbedParams& params,
                          KeyStream& key) {
    check_params(params);
    if (source.empty())
        throw std::invalid_argument("embed_stream: empty source stream");

    ChunkBuffer buf(params.n);
    MarkedStream out;
    out.n = params.n;
    out.original_length = static_cast<uint32_t>(source.size());
    out.values.reserve(source.size());

    auto consume = [&](uint32_t index, int64_t y) {
        out.location_map.push_back(index);
        chunk(buf, encode_payload(static_cast<int32_t>(y), key));
    };
    auto emit = [&](uint32_t index, int64_t d, std::optional<uint32_t> bn) {
        const int64_t marked =
            expand_or_shift(d, bn, params.n, params.threshold) + params.predictor_offset;
        out.values.push_back(static_cast<int32_t>(checked_int32(marked, index)));
    };

    for (uint32_t i = 0; i < source.size(); ++i) {
        const int64_t y = source[i];
        check_source_value(y, i);
        if (i == 0) { // the very first measurement seeds the payload buffer
            consume(i, y);
            continue;
        }
        const int64_t d = y - params.predictor_offset;
        const bool eligible = std::llabs(d) <= params.threshold;
        if (!buf.pending.empty()) {
            if (eligible) {
                const uint32_t bn = buf.pending.front();
                buf.pending.pop_front();
                emit(i, d, bn);
            } else {
                emit(i, d, std::nullopt);
            }
        } else if (buf.remainder.empty() || eligible) {
            // Nothing left to embed, or an eligible value arrived while only a
            // sub-chunk remainder is buffered (it cannot be shifted reversibly,
            // so it refills the buffer instead).
            consume(i, y);
        } else {
            emit(i, d, std::nullopt);
        }
    }
    out.tail_bits = static_cast<uint16_t>(buf.bit_count());
    return out;
}

ExtractResult extract_stream(const MarkedStream& marked, const EmbedParams& params,
                             KeyStream& key) {
    check_params(params);
    if (marked.n != params.n)
        throw std::invalid_argument("extract_stream: insertion level mismatch");
    const uint32_t length = marked.original_length;
    if (marked.values.size() + marked.location_map.size() != length)
        throw std::invalid_argument("extract_stream: marked length plus map size != stream length");

    std::vector<uint8_t> is_payload(length, 0);
    uint32_t prev = 0;
    bool first = true;
    for (uint32_t idx : marked.location_map) {
        if (idx >= length || (!first && idx <= prev))
            throw std::invalid_argument("extract_stream: location map not sorted/in range");
        is_payload[idx] = 1;
        prev = idx;
        first = false;
    }

    ExtractResult res;
    res.values.assign(length, 0);
    Bits chunk_bits;
    chunk_bits.reserve(marked.location_map.size() * 16);
    size_t vi = 0;
    for (uint32_t i = 0; i < length; ++i) {
        if (is_payload[i])
            continue;
        const int64_t m = static_cast<int64_t>(marked.values[vi++]) - params.predictor_offset;
        const auto [d, bn] = invert_expansion(m, params.n, params.threshold);
        const int64_t y = d + params.predictor_offset;
        if (y < -32768 || y > 32768)
            throw std::runtime_error("extract_stream: recovered value outside 16-bit range");
        res.values[i] = static_cast<int32_t>(y);
        if (bn)
            for (int b = params.n - 1; b >= 0; --b)
                chunk_bits.push_back(static_cast<uint8_t>((*bn >> b) & 1u));
    }

    const size_t payloads = marked.location_map.size();
    if (16 * payloads < marked.tail_bits)
        throw std::invalid_argument("extract_stream: tail_bits larger than total payload bits");
    const size_t expected = 16 * payloads - marked.tail_bits;
    if (chunk_bits.size() != expected)
        throw std::invalid_argument("extract_stream: embedded bit count inconsistent with header");

    for (size_t k = 0; k < payloads; ++k) {
        const Bits key_bits = key.next_bits(16); // one full word per payload, truncated or not
        const size_t start = 16 * k;
        const size_t have = chunk_bits.size() > start ? std::min<size_t>(16, chunk_bits.size() - start) : 0;
        Bits plain(16, 0);
        for (size_t b = 0; b < have; ++b)
            plain[b] = chunk_bits[start + b] ^ key_bits[b];
        res.values[marked.location_map[k]] = static_cast<int32_t>(bits_to_int16(plain));
        if (have < 16)
            ++res.truncated_payloads;
    }
    return res;
}

} // namespace cswm
