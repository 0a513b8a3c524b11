#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace convdetect {

/// One bit per element, values 0 or 1.
using Bits = std::vector<std::uint8_t>;

inline int popcount(std::uint64_t x) { return std::popcount(x); }

inline int parity(std::uint64_t x) { return std::popcount(x) & 1; }

/// Packs bits[first, first+count) into an integer, first bit most significant.
inline std::uint64_t pack_msb_first(const Bits& bits, std::size_t first, std::size_t count)
{
    std::uint64_t word = 0;
    for (std::size_t i = 0; i < count; ++i) {
        word = (word << 1) | (bits[first + i] & 1u);
    }
    return word;
}

/// Appends the low `count` bits of `word` to `out`, most significant first.
inline void unpack_msb_first(std::uint64_t word, std::size_t count, Bits& out)
{
    for (std::size_t i = count; i-- > 0;) {
        out.push_back(static_cast<std::uint8_t>((word >> i) & 1u));
    }
}

inline std::size_t hamming_distance(const Bits& a, const Bits& b)
{
    if (a.size() != b.size()) {
        throw std::invalid_argument("hamming_distance: length mismatch");
    }
    std::size_t d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        d += (a[i] ^ b[i]) & 1u;
    }
    return d;
}

inline Bits xor_bits(const Bits& a, const Bits& b)
{
    if (a.size() != b.size()) {
        throw std::invalid_argument("xor_bits: length mismatch");
    }
    Bits out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        out[i] = static_cast<std::uint8_t>((a[i] ^ b[i]) & 1u);
    }
    return out;
}

/// Parses a string of '0'/'1' characters; whitespace is skipped.
inline Bits parse_binary_string(std::string_view text)
{
    Bits out;
    for (char c : text) {
        if (c == '0' || c == '1') {
            out.push_back(static_cast<std::uint8_t>(c - '0'));
        } else if (c != ' ' && c != '\n' && c != '\r' && c != '\t') {
            throw std::invalid_argument(std::string("invalid binary digit '") + c + "'");
        }
    }
    return out;
}

/// Parses hex digits into bits, four per digit, most significant first.
/// Whitespace and an optional leading "0x" are ignored.
inline Bits parse_hex_string(std::string_view text)
{
    Bits out;
    if (text.size() >= 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) {
        text.remove_prefix(2);
    }
    for (char c : text) {
        int v;
        if (c >= '0' && c <= '9') {
            v = c - '0';
        } else if (c >= 'a' && c <= 'f') {
            v = c - 'a' + 10;
        } else if (c >= 'A' && c <= 'F') {
            v = c - 'A' + 10;
        } else if (c == ' ' || c == '\n' || c == '\r' || c == '\t') {
            continue;
        } else {
            throw std::invalid_argument(std::string("invalid hex digit '") + c + "'");
        }
        unpack_msb_first(static_cast<std::uint64_t>(v), 4, out);
    }
    return out;
}

/// Inverse of parse_hex_string; the tail is zero-padded to a whole digit.
inline std::string to_hex_string(const Bits& bits)
{
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    for (std::size_t i = 0; i < bits.size(); i += 4) {
        unsigned v = 0;
        for (std::size_t j = 0; j < 4; ++j) {
            v = (v << 1) | (i + j < bits.size() ? (bits[i + j] & 1u) : 0u);
        }
        out.push_back(digits[v]);
    }
    return out;
}

} // namespace convdetect
