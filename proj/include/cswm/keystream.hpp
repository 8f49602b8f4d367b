#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include "cswm/bits.hpp"

namespace cswm {

// Bit source used to protect embedded payload bits. Implementations must be
// deterministic for a given key so that extraction can regenerate the exact
// same bits; a cursor tracks how many bits were handed out so no bit is ever
// reused within one embedding pass.
class KeyStream {
public:
    virtual ~KeyStream() = default;

    // Next `count` bits, MSB-first within each generated byte. Advances the cursor.
    virtual Bits next_bits(size_t count) = 0;

    // Total bits consumed so far.
    virtual uint64_t position() const = 0;
};

// ChaCha20 (20 rounds, 96-bit nonce / 32-bit block counter layout) keyed from
// raw key material. The nonce is fixed to zero and the counter starts at zero,
// so the stream is a pure function of the key bytes. Key material must be at
// least 16 bytes; it is cycled to fill the 32-byte cipher key. The exact block
// function is pinned in docs/FORMAT.md together with a published test vector.
class ChaChaKeyStream final : public KeyStream {
public:
    explicit ChaChaKeyStream(const std::vector<uint8_t>& key_material);

    Bits next_bits(size_t count) override;
    uint64_t position() const override { return bit_pos_; }

private:
    void refill(uint64_t block_index);

    std::array<uint8_t, 32> key_{};
    std::array<uint8_t, 64> block_{};
    uint64_t cached_block_ = ~0ull;
    uint64_t bit_pos_ = 0;
};

// All-zero bit source. XOR with it is the identity; used by tests and by
// debugging paths that need embedding without protection.
class NullKeyStream final : public KeyStream {
public:
    Bits next_bits(size_t count) override {
        bit_pos_ += count;
        return Bits(count, 0);
    }
    uint64_t position() const override { return bit_pos_; }

private:
    uint64_t bit_pos_ = 0;
};

// XOR of two equal-length bit sequences; throws on length mismatch.
// Applying it twice with the same key bits restores the input.
Bits xor_protect(const Bits& data, const Bits& key_bits);

// Raw ChaCha20 block function, exposed so tests can pin the published vector.
void chacha20_block(const uint8_t key[32], uint32_t counter, const uint8_t nonce[12],
                    uint8_t out[64]);

} // namespace cswm
