#include "doctest.h"

#include "cswm/sensing.hpp"
#include "cswm/stream_file.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <vector>

using namespace cswm;

namespace {

// Bitwise reflected CRC-32 so the checksum has a second, independent
// implementation to agree with.
uint32_t crc32_ref(const std::vector<uint8_t>& data) {
    uint32_t crc = 0xFFFFFFFFu;
    for (uint8_t b : data) {
        crc ^= b;
        for (int k = 0; k < 8; ++k)
            crc = (crc >> 1) ^ (0xEDB88320u & (0u - (crc & 1u)));
    }
    return ~crc;
}

void expect_equal(const StreamFile& a, const StreamFile& b) {
    CHECK(a.header.kind == b.header.kind);
    CHECK(a.header.order == b.header.order);
    CHECK(a.header.row_count == b.header.row_count);
    CHECK(a.header.seed == b.header.seed);
    CHECK(a.header.stream_kind == b.header.stream_kind);
    CHECK(a.header.n == b.header.n);
    CHECK(a.header.tail_bits == b.header.tail_bits);
    CHECK(a.header.map == b.header.map);
    CHECK(a.header.checksum == b.header.checksum);
    CHECK(a.values == b.values);
}

StreamFile sample_original() {
    StreamFile f;
    f.header.kind = MatrixKind::ScrambledHadamard;
    f.header.order = 64;
    f.header.row_count = 25;
    f.header.seed = 0xDEADBEEFCAFEF00DULL;
    f.header.stream_kind = kStreamOriginal;
    SplitMix64 rng{8};
    f.values.resize(25);
    for (auto& v : f.values)
        v = static_cast<int16_t>(rng.next());
    return f;
}

StreamFile sample_marked() {
    StreamFile f;
    f.header.kind = MatrixKind::ScrambledSMatrix;
    f.header.order = 256;
    f.header.row_count = 100;
    f.header.seed = 3;
    f.header.stream_kind = kStreamMarked;
    f.header.n = 7;
    f.header.tail_bits = 11;
    f.header.map = {0, 5, 17};
    f.header.checksum = 0xAABBCCDDu;
    SplitMix64 rng{9};
    f.values.resize(97);
    for (auto& v : f.values)
        v = static_cast<int32_t>(rng.next());
    f.values[0] = INT32_MIN;
    f.values[1] = INT32_MAX;
    return f;
}

} // namespace

TEST_CASE("encode and decode are mutually inverse") {
    for (const StreamFile& f : {sample_original(), sample_marked()}) {
        const auto bytes = encode_stream_file(f);
        expect_equal(decode_stream_file(bytes), f);
    }
    // 34 header bytes, then 2 per original value or 4 per map entry and value.
    CHECK(encode_stream_file(sample_original()).size() == 34 + 2 * 25);
    CHECK(encode_stream_file(sample_marked()).size() == 34 + 4 * 3 + 4 * 97);
}

TEST_CASE("byte layout is frozen") {
    SUBCASE("original stream") {
        StreamFile f;
        f.header.kind = MatrixKind::ScrambledHadamard;
        f.header.order = 4;
        f.header.row_count = 2;
        f.header.seed = 0x0102030405060708ULL;
        f.header.stream_kind = kStreamOriginal;
        f.header.checksum = 0x11223344u;
        f.values = {-2, 300};
        const std::vector<uint8_t> expected = {
            'C',  'S',  'W',  'M',              // magic
            0x01,                               // version
            0x00,                               // matrix kind
            0x04, 0x00, 0x00, 0x00,             // order
            0x02, 0x00, 0x00, 0x00,             // row count
            0x08, 0x07, 0x06, 0x05, 0x04, 0x03, 0x02, 0x01, // seed
            0x00,                               // stream kind
            0x00,                               // n
            0x00, 0x00,                         // tail bits
            0x00, 0x00, 0x00, 0x00,             // map count
            0x44, 0x33, 0x22, 0x11,             // checksum
            0xFE, 0xFF,                         // -2
            0x2C, 0x01,                         // 300
        };
        CHECK(encode_stream_file(f) == expected);
        expect_equal(decode_stream_file(expected), f);
    }
    SUBCASE("marked stream") {
        StreamFile f;
        f.header.kind = MatrixKind::ScrambledSMatrix;
        f.header.order = 8;
        f.header.row_count = 5;
        f.header.seed = 1;
        f.header.stream_kind = kStreamMarked;
        f.header.n = 2;
        f.header.tail_bits = 17;
        f.header.map = {0, 3};
        f.values = {-385, 0, INT32_MAX};
        const std::vector<uint8_t> expected = {
            'C',  'S',  'W',  'M',
            0x01,
            0x01,
            0x08, 0x00, 0x00, 0x00,
            0x05, 0x00, 0x00, 0x00,
            0x01, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00,
            0x01,                               // stream kind
            0x02,                               // n
            0x11, 0x00,                         // tail bits = 17
            0x02, 0x00, 0x00, 0x00,             // map count
            0x00, 0x00, 0x00, 0x00,             // checksum
            0x00, 0x00, 0x00, 0x00,             // map[0]
            0x03, 0x00, 0x00, 0x00,             // map[1]
            0x7F, 0xFE, 0xFF, 0xFF,             // -385
            0x00, 0x00, 0x00, 0x00,             // 0
            0xFF, 0xFF, 0xFF, 0x7F,             // INT32_MAX
        };
        CHECK(encode_stream_file(f) == expected);
        expect_equal(decode_stream_file(expected), f);
    }
}

TEST_CASE("tail length maps to the number of clipped payloads") {
    CHECK(truncation_affected_count(0) == 0);
    CHECK(truncation_affected_count(1) == 1);
    CHECK(truncation_affected_count(16) == 1);
    CHECK(truncation_affected_count(17) == 2);
    CHECK(truncation_affected_count(31) == 2);
}

TEST_CASE("recoverable checksum is CRC-32 over 16-bit words with holes zeroed") {
    // Self-check the reference implementation against the classic vector.
    CHECK(crc32_ref({'1', '2', '3', '4', '5', '6', '7', '8', '9'}) == 0xCBF43926u);

    const std::vector<int32_t> values = {12849, 13363, 13877, 14391}; // "12345678"
    CHECK(recoverable_checksum(values, {}) ==
          crc32_ref({'1', '2', '3', '4', '5', '6', '7', '8'}));

    const std::vector<int32_t> stream = {5, 7, -9, 32767, -32768};
    std::vector<uint8_t> manual;
    for (int32_t v : stream) {
        const uint16_t u = static_cast<uint16_t>(static_cast<int16_t>(v));
        manual.push_back(static_cast<uint8_t>(u));
        manual.push_back(static_cast<uint8_t>(u >> 8));
    }
    CHECK(recoverable_checksum(stream, {}) == crc32_ref(manual));

    // Zeroing a position must equal hashing the stream with that value zero.
    const std::vector<uint32_t> holes = {1, 4};
    std::vector<int32_t> zeroed = stream;
    zeroed[1] = 0;
    zeroed[4] = 0;
    CHECK(recoverable_checksum(stream, holes) == recoverable_checksum(zeroed, {}));
    CHECK(recoverable_checksum(stream, holes) != recoverable_checksum(stream, {}));

    CHECK(recoverable_checksum({}, {}) == 0);
    CHECK_THROWS_AS(recoverable_checksum(std::vector<int32_t>{40000}, {}), std::invalid_argument);
    CHECK_THROWS_AS(recoverable_checksum(stream, std::vector<uint32_t>{5}), std::invalid_argument);
}

TEST_CASE("header validation rejects inconsistent files") {
    SUBCASE("original stream with embedding fields") {
        auto f = sample_original();
        f.header.n = 3;
        CHECK_THROWS_AS(encode_stream_file(f), std::runtime_error);
        f = sample_original();
        f.header.tail_bits = 1;
        CHECK_THROWS_AS(encode_stream_file(f), std::runtime_error);
        f = sample_original();
        f.header.map = {1};
        CHECK_THROWS_AS(encode_stream_file(f), std::runtime_error);
    }
    SUBCASE("marked stream envelope") {
        auto f = sample_marked();
        f.header.n = 0;
        CHECK_THROWS_AS(encode_stream_file(f), std::runtime_error);
        f = sample_marked();
        f.header.n = 17;
        CHECK_THROWS_AS(encode_stream_file(f), std::runtime_error);
        f = sample_marked();
        f.header.tail_bits = static_cast<uint16_t>(f.header.n + 16);
        CHECK_THROWS_AS(encode_stream_file(f), std::runtime_error);
        f = sample_marked();
        f.header.map = {5, 5, 17};
        CHECK_THROWS_AS(encode_stream_file(f), std::runtime_error);
        f = sample_marked();
        f.header.map = {5, 0, 17};
        CHECK_THROWS_AS(encode_stream_file(f), std::runtime_error);
        f = sample_marked();
        f.header.map = {0, 5, 100};
        CHECK_THROWS_AS(encode_stream_file(f), std::runtime_error);
        f = sample_marked();
        f.values.pop_back();
        CHECK_THROWS_AS(encode_stream_file(f), std::runtime_error);
        // A tail spilling into a second payload needs two map entries.
        f = sample_marked();
        f.header.tail_bits = 20;
        f.header.map = {0};
        f.values.resize(99);
        CHECK_THROWS_AS(encode_stream_file(f), std::runtime_error);
    }
    SUBCASE("shape fields") {
        auto f = sample_original();
        f.header.order = 48;
        CHECK_THROWS_AS(encode_stream_file(f), std::runtime_error);
        f = sample_original();
        f.header.order = 0;
        CHECK_THROWS_AS(encode_stream_file(f), std::runtime_error);
        f = sample_original();
        f.header.row_count = 64; // must stay below the order
        f.values.resize(64);
        CHECK_THROWS_AS(encode_stream_file(f), std::runtime_error);
        f = sample_original();
        f.header.stream_kind = 7;
        CHECK_THROWS_AS(encode_stream_file(f), std::runtime_error);
        f = sample_original();
        f.values[3] = 70000;
        CHECK_THROWS_AS(encode_stream_file(f), std::invalid_argument);
    }
}

TEST_CASE("decoder rejects malformed byte streams") {
    const auto good = encode_stream_file(sample_marked());
    CHECK_NOTHROW(decode_stream_file(good));

    auto bad = good;
    bad[0] = 'X';
    CHECK_THROWS_AS(decode_stream_file(bad), std::runtime_error);

    bad = good;
    bad[4] = 9; // version
    CHECK_THROWS_AS(decode_stream_file(bad), std::runtime_error);

    bad = good;
    bad[5] = 2; // matrix kind
    CHECK_THROWS_AS(decode_stream_file(bad), std::runtime_error);

    for (size_t cut : {0u, 3u, 20u, 33u, 60u}) {
        std::vector<uint8_t> prefix(good.begin(), good.begin() + cut);
        CHECK_THROWS_AS(decode_stream_file(prefix), std::runtime_error);
    }

    bad = good;
    bad.push_back(0);
    CHECK_THROWS_AS(decode_stream_file(bad), std::runtime_error);
}

TEST_CASE("round trip through the filesystem") {
    namespace fs = std::filesystem;
    const fs::path path = fs::temp_directory_path() / "cswm_stream_file_test.bin";
    const auto f = sample_marked();
    write_stream_file(path, f);
    expect_equal(read_stream_file(path), f);
    fs::remove(path);

    CHECK_THROWS_AS(read_stream_file(fs::temp_directory_path() / "cswm_no_such_file.bin"),
                    std::runtime_error);
}
