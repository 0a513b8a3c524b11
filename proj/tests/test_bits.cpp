#include "convdetect/bits.hpp"

#include <gtest/gtest.h>

using namespace convdetect;

TEST(Bits, HexParsesMostSignificantFirst)
{
    EXPECT_EQ(parse_hex_string("a3"), (Bits{1, 0, 1, 0, 0, 0, 1, 1}));
    EXPECT_EQ(parse_hex_string("0xF\n"), (Bits{1, 1, 1, 1}));
    EXPECT_THROW(parse_hex_string("g"), std::invalid_argument);
}

TEST(Bits, HexRoundTrip)
{
    const Bits bits{1, 1, 0, 1, 0, 0, 1, 0, 1, 1, 1, 1};
    EXPECT_EQ(parse_hex_string(to_hex_string(bits)), bits);
}

TEST(Bits, BinaryString)
{
    EXPECT_EQ(parse_binary_string("11 01\n"), (Bits{1, 1, 0, 1}));
    EXPECT_THROW(parse_binary_string("102"), std::invalid_argument);
}

TEST(Bits, PackAndDistance)
{
    const Bits bits{1, 0, 1, 1};
    EXPECT_EQ(pack_msb_first(bits, 0, 4), 0b1011u);
    EXPECT_EQ(pack_msb_first(bits, 2, 2), 0b11u);
    EXPECT_EQ(hamming_distance(bits, Bits{0, 0, 1, 0}), 2u);
    EXPECT_THROW(hamming_distance(bits, Bits{0}), std::invalid_argument);
}
