#include "cswm/keystream.hpp"

#include <cstring>
#include <stdexcept>

namespace cswm {

namespace {

inline uint32_t rotl32(uint32_t x, int n) { return (x << n) | (x >> (32 - n)); }

inline void quarter_round(uint32_t& a, uint32_t& b, uint32_t& c, uint32_t& d) {
    a += b; d ^= a; d = rotl32(d, 16);
    c += d; b ^= c; b = rotl32(b, 12);
    a += b; d ^= a; d = rotl32(d, 8);
    c += d; b ^= c; b = rotl32(b, 7);
}

inline uint32_t load_le32(const uint8_t* p) {
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
           (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

inline void store_le32(uint8_t* p, uint32_t v) {
    p[0] = static_cast<uint8_t>(v);
    p[1] = static_cast<uint8_t>(v >> 8);
    p[2] = static_cast<uint8_t>(v >> 16);
    p[3] = static_cast<uint8_t>(v >> 24);
}

} // namespace

void chacha20_block(const uint8_t key[32], uint32_t counter, const uint8_t nonce[12],
                    uint8_t out[64]) {
    uint32_t st[16];
    st[0] = 0x61707865u; // "expand 32-byte k"
    st[1] = 0x3320646eu;
    st[2] = 0x79622d32u;
    st[3] = 0x6b206574u;
    for (int i = 0; i < 8; ++i)
        st[4 + i] = load_le32(key + 4 * i);
    st[12] = counter;
    st[13] = load_le32(nonce);
    st[14] = load_le32(nonce + 4);
    st[15] = load_le32(nonce + 8);

    uint32_t w[16];
    std::memcpy(w, st, sizeof(w));
    for (int round = 0; round < 10; ++round) {
        quarter_round(w[0], w[4], w[8], w[12]);
        quarter_round(w[1], w[5], w[9], w[13]);
        quarter_round(w[2], w[6], w[10], w[14]);
        quarter_round(w[3], w[7], w[11], w[15]);
        quarter_round(w[0], w[5], w[10], w[15]);
        quarter_round(w[1], w[6], w[11], w[12]);
        quarter_round(w[2], w[7], w[8], w[13]);
        quarter_round(w[3], w[4], w[9], w[14]);
    }
    for (int i = 0; i < 16; ++i)
        store_le32(out + 4 * i, w[i] + st[i]);
}

ChaChaKeyStream::ChaChaKeyStream(const std::vector<uint8_t>& key_material) {
    if (key_material.size() < 16)
        throw std::invalid_argument("key material must be at least 16 bytes");
    for (size_t i = 0; i < key_.size(); ++i)
        key_[i] = key_material[i % key_material.size()];
}

void ChaChaKeyStream::refill(uint64_t block_index) {
    if (block_index > 0xffffffffull)
        throw std::runtime_error("keystream exhausted"); // 256 GiB; unreachable in practice
    const uint8_t nonce[12] = {0};
    chacha20_block(key_.data(), static_cast<uint32_t>(block_index), nonce, block_.data());
    cached_block_ = block_index;
}

Bits ChaChaKeyStream::next_bits(size_t count) {
    Bits out(count);
    for (size_t i = 0; i < count; ++i) {
        const uint64_t pos = bit_pos_ + i;
        const uint64_t block = pos / 512;
        if (block != cached_block_)
            refill(block);
        const size_t byte = static_cast<size_t>((pos % 512) / 8);
        const int bit = static_cast<int>(pos % 8);
        out[i] = static_cast<uint8_t>((block_[byte] >> (7 - bit)) & 1u);
    }
    bit_pos_ += count;
    return out;
}

Bits xor_protect(const Bits& data, const Bits& key_bits) {
    if (data.size() != key_bits.size())
        throw std::invalid_argument("xor_protect: length mismatch");
    Bits out(data.size());
    for (size_t i = 0; i < data.size(); ++i) {
        if (data[i] > 1 || key_bits[i] > 1)
            throw std::invalid_argument("xor_protect: non-binary element");
        out[i] = data[i] ^ key_bits[i];
    }
    return out;
}

} // namespace cswm
