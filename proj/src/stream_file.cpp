#include "cswm/stream_file.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

#include <zlib.h>

namespace cswm {

namespace {

constexpr char kMagic[4] = {'C', 'S', 'W', 'M'};
constexpr uint8_t kVersion = 1;

void put_u8(std::vector<uint8_t>& out, uint8_t v) { out.push_back(v); }
void put_u16(std::vector<uint8_t>& out, uint16_t v) {
    out.push_back(static_cast<uint8_t>(v));
    out.push_back(static_cast<uint8_t>(v >> 8));
}
void put_u32(std::vector<uint8_t>& out, uint32_t v) {
    for (int i = 0; i < 4; ++i)
        out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}
void put_u64(std::vector<uint8_t>& out, uint64_t v) {
    for (int i = 0; i < 8; ++i)
        out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

struct Reader {
    std::span<const uint8_t> bytes;
    size_t pos = 0;

    void need(size_t count) const {
        if (pos + count > bytes.size())
            throw std::runtime_error("stream file: truncated");
    }
    uint8_t u8() {
        need(1);
        return bytes[pos++];
    }
    uint16_t u16() {
        need(2);
        uint16_t v = static_cast<uint16_t>(bytes[pos]) |
                     static_cast<uint16_t>(bytes[pos + 1]) << 8;
        pos += 2;
        return v;
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<uint32_t>(bytes[pos + i]) << (8 * i);
        pos += 4;
        return v;
    }
    uint64_t u64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<uint64_t>(bytes[pos + i]) << (8 * i);
        pos += 8;
        return v;
    }
};

bool pow2(uint32_t v) { return v > 0 && (v & (v - 1)) == 0; }

void validate(const StreamHeader& h, size_t value_count) {
    if (!pow2(h.order) || h.order < 2)
        throw std::runtime_error("stream file: order must be a power of two");
    if (h.row_count < 1 || h.row_count >= h.order)
        throw std::runtime_error("stream file: row count must be in [1, order)");
    if (h.stream_kind == kStreamOriginal) {
        if (h.n != 0 || h.tail_bits != 0 || !h.map.empty())
            throw std::runtime_error("stream file: original streams carry no embedding fields");
        if (value_count != h.row_count)
            throw std::runtime_error("stream file: value count does not match the header");
    } else if (h.stream_kind == kStreamMarked) {
        if (h.n < 1 || h.n > 16)
            throw std::runtime_error("stream file: embedding depth out of range");
        if (h.tail_bits >= h.n + 16)
            throw std::runtime_error("stream file: tail length out of range");
        if (h.map.size() > h.row_count)
            throw std::runtime_error("stream file: map larger than the stream");
        for (size_t i = 0; i < h.map.size(); ++i) {
            if (h.map[i] >= h.row_count)
                throw std::runtime_error("stream file: map position out of range");
            if (i > 0 && h.map[i] <= h.map[i - 1])
                throw std::runtime_error("stream file: map positions must be strictly increasing");
        }
        if (static_cast<size_t>(truncation_affected_count(h.tail_bits)) > h.map.size())
            throw std::runtime_error("stream file: tail refers to more payloads than the map holds");
        if (value_count != h.row_count - h.map.size())
            throw std::runtime_error("stream file: value count does not match the header");
    } else {
        throw std::runtime_error("stream file: unknown stream kind");
    }
}

} // namespace

int truncation_affected_count(uint16_t tail_bits) {
    if (tail_bits == 0)
        return 0;
    return tail_bits <= 16 ? 1 : 2;
}

uint32_t recoverable_checksum(std::span<const int32_t> original_values,
                              std::span<const uint32_t> zeroed_positions) {
    std::vector<uint8_t> bytes(original_values.size() * 2);
    for (size_t i = 0; i < original_values.size(); ++i) {
        const int32_t v = original_values[i];
        if (v < -32768 || v > 32767)
            throw std::invalid_argument("recoverable_checksum: value exceeds the signed 16-bit range");
        const uint16_t u = static_cast<uint16_t>(v);
        bytes[2 * i] = static_cast<uint8_t>(u);
        bytes[2 * i + 1] = static_cast<uint8_t>(u >> 8);
    }
    for (uint32_t p : zeroed_positions) {
        if (p >= original_values.size())
            throw std::invalid_argument("recoverable_checksum: zeroed position out of range");
        bytes[2 * p] = 0;
        bytes[2 * p + 1] = 0;
    }
    uLong crc = crc32(0L, Z_NULL, 0);
    if (!bytes.empty())
        crc = crc32(crc, bytes.data(), static_cast<uInt>(bytes.size()));
    return static_cast<uint32_t>(crc);
}

std::vector<uint8_t> encode_stream_file(const StreamFile& file) {
    const StreamHeader& h = file.header;
    validate(h, file.values.size());

    std::vector<uint8_t> out;
    out.reserve(34 + 4 * h.map.size() + 4 * file.values.size());
    out.insert(out.end(), kMagic, kMagic + 4);
    put_u8(out, kVersion);
    put_u8(out, static_cast<uint8_t>(h.kind));
    put_u32(out, h.order);
    put_u32(out, h.row_count);
    put_u64(out, h.seed);
    put_u8(out, h.stream_kind);
    put_u8(out, h.n);
    put_u16(out, h.tail_bits);
    put_u32(out, static_cast<uint32_t>(h.map.size()));
    put_u32(out, h.checksum);
    for (uint32_t m : h.map)
        put_u32(out, m);

    if (h.stream_kind == kStreamOriginal) {
        for (int32_t v : file.values) {
            if (v < -32768 || v > 32767)
                throw std::invalid_argument(
                    "stream file: original value exceeds the signed 16-bit range");
            put_u16(out, static_cast<uint16_t>(static_cast<int16_t>(v)));
        }
    } else {
        for (int32_t v : file.values)
            put_u32(out, static_cast<uint32_t>(v));
    }
    return out;
}

StreamFile decode_stream_file(std::span<const uint8_t> bytes) {
    Reader r{bytes};
    r.need(4);
    if (std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw std::runtime_error("stream file: bad magic");
    r.pos = 4;
    if (r.u8() != kVersion)
        throw std::runtime_error("stream file: unsupported version");

    StreamFile file;
    StreamHeader& h = file.header;
    const uint8_t kind = r.u8();
    if (kind > 1)
        throw std::runtime_error("stream file: unknown matrix kind");
    h.kind = static_cast<MatrixKind>(kind);
    h.order = r.u32();
    h.row_count = r.u32();
    h.seed = r.u64();
    h.stream_kind = r.u8();
    h.n = r.u8();
    h.tail_bits = r.u16();
    const uint32_t map_count = r.u32();
    h.checksum = r.u32();
    if (map_count > h.row_count)
        throw std::runtime_error("stream file: map larger than the stream");
    h.map.resize(map_count);
    for (uint32_t& m : h.map)
        m = r.u32();

    const size_t value_count =
        h.stream_kind == kStreamOriginal ? h.row_count : h.row_count - map_count;
    file.values.resize(value_count);
    if (h.stream_kind == kStreamOriginal) {
        for (int32_t& v : file.values)
            v = static_cast<int16_t>(r.u16());
    } else {
        for (int32_t& v : file.values)
            v = static_cast<int32_t>(r.u32());
    }
    if (r.pos != bytes.size())
        throw std::runtime_error("stream file: trailing bytes");
    validate(h, file.values.size());
    return file;
}

void write_stream_file(const std::filesystem::path& path, const StreamFile& file) {
    const std::vector<uint8_t> bytes = encode_stream_file(file);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error(path.string() + ": cannot open for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw std::runtime_error(path.string() + ": write failed");
}

StreamFile read_stream_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error(path.string() + ": cannot open");
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_stream_file(bytes);
}

} // namespace cswm
