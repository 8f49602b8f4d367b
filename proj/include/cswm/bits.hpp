#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace cswm {

// One element per bit, each 0 or 1. Bit sequences are always MSB-first.
using Bits = std::vector<uint8_t>;

// 16-bit two's complement encoding, most significant bit first.
// Accepts [-32768, 32767]; anything else throws.
inline Bits int16_to_bits(int32_t value) {
    if (value < -32768 || value > 32767)
        throw std::invalid_argument("int16_to_bits: value outside 16-bit range");
    const auto u = static_cast<uint16_t>(static_cast<int16_t>(value));
    Bits out(16);
    for (int i = 0; i < 16; ++i)
        out[i] = static_cast<uint8_t>((u >> (15 - i)) & 1u);
    return out;
}

inline int32_t bits_to_int16(const Bits& bits) {
    if (bits.size() != 16)
        throw std::invalid_argument("bits_to_int16: expected 16 bits");
    uint16_t u = 0;
    for (int i = 0; i < 16; ++i) {
        if (bits[i] > 1)
            throw std::invalid_argument("bits_to_int16: non-binary element");
        u = static_cast<uint16_t>((u << 1) | bits[i]);
    }
    return static_cast<int32_t>(static_cast<int16_t>(u));
}

inline void append_bits(Bits& dst, const Bits& src) {
    dst.insert(dst.end(), src.begin(), src.end());
}

} // namespace cswm
