#include <random>

#include <gtest/gtest.h>

#include "collatz/nat.hpp"

using namespace collatz;

TEST(Nat, RejectsZero) {
    EXPECT_THROW(Nat{0u}, std::domain_error);
    EXPECT_THROW(Nat{-3}, std::domain_error);
    EXPECT_EQ(Nat{7}.value(), 7u);
}

TEST(Nat, TriplePlusOneAtTheEdgeOfTheRange) {
    const u128 largest_ok = (u128_max - 1) / 3;
    EXPECT_EQ(Nat{largest_ok}.triple_plus_one().value(), 3 * largest_ok + 1);
    EXPECT_THROW((void)Nat{largest_ok + 1}.triple_plus_one(), overflow_error);
    try {
        (void)Nat{u128_max}.triple_plus_one();
        FAIL() << "expected overflow";
    } catch (const overflow_error& e) {
        EXPECT_EQ(e.where(), u128_max);
    }
}

TEST(Nat, HalfRequiresEven) {
    EXPECT_EQ(Nat{10}.half().value(), 5u);
    EXPECT_THROW((void)Nat{9}.half(), std::domain_error);
}

TEST(Nat, ParseIsDecimalOnly) {
    EXPECT_EQ(parse_nat("27")->value(), 27u);
    EXPECT_FALSE(parse_nat(""));
    EXPECT_FALSE(parse_nat("0"));
    EXPECT_FALSE(parse_nat("+5"));
    EXPECT_FALSE(parse_nat("-5"));
    EXPECT_FALSE(parse_nat(" 5"));
    EXPECT_FALSE(parse_nat("5 "));
    EXPECT_FALSE(parse_nat("0x10"));
    EXPECT_FALSE(parse_nat("1e5"));
    EXPECT_EQ(parse_nat("007")->value(), 7u);
}

TEST(Nat, ParseAcceptsFull128BitRangeAndNoMore) {
    const std::string max = "340282366920938463463374607431768211455";
    ASSERT_TRUE(parse_nat(max));
    EXPECT_EQ(parse_nat(max)->value(), u128_max);
    EXPECT_FALSE(parse_nat("340282366920938463463374607431768211456"));
    EXPECT_FALSE(parse_nat("1000000000000000000000000000000000000000"));
}

TEST(Nat, ToStringParseRoundTrip) {
    std::mt19937_64 rng(0xC011A72);
    for (int i = 0; i < 2000; ++i) {
        u128 v = (static_cast<u128>(rng()) << 64) | rng();
        v >>= rng() % 128;
        if (v == 0) v = 1;
        const auto s = to_string(v);
        ASSERT_EQ(parse_u128(s), v) << s;
    }
    EXPECT_EQ(to_string(0), "0");
}
