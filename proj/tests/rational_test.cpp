#include "preassess/rational.hpp"

#include <gtest/gtest.h>

#include "preassess/error.hpp"

using preassess::Error;
using preassess::ErrorCode;
using preassess::Rational;

TEST(Rational, IntegerEqualityTerminatesInBothOperandOrders) {
  // Guards the reversed-operator recursion in boost::rational under C++20.
  EXPECT_TRUE(Rational(0) == 0);
  EXPECT_TRUE(0 == Rational(0));
  EXPECT_TRUE(Rational(2, 2) == 1);
  EXPECT_FALSE(Rational(1, 2) == 0);
  EXPECT_TRUE(Rational(1, 2) != 1);
  EXPECT_TRUE(Rational(3) == std::int64_t{3});
}

TEST(Rational, FractionString) {
  EXPECT_EQ(preassess::to_fraction_string(Rational(2, 4)), "1/2");
  EXPECT_EQ(preassess::to_fraction_string(Rational(3)), "3");
  EXPECT_EQ(preassess::to_fraction_string(Rational(-1, 3)), "-1/3");
}

TEST(Rational, DecimalStringRoundsHalfUpAndTrimsZeros) {
  EXPECT_EQ(preassess::to_decimal_string(Rational(1, 4)), "0.25");
  EXPECT_EQ(preassess::to_decimal_string(Rational(2, 3)), "0.66666666666666667");
  EXPECT_EQ(preassess::to_decimal_string(Rational(2, 3), 4), "0.6667");
  EXPECT_EQ(preassess::to_decimal_string(Rational(66, 83), 4), "0.7952");
  EXPECT_EQ(preassess::to_decimal_string(Rational(1), 4), "1");
  EXPECT_EQ(preassess::to_decimal_string(Rational(0), 4), "0");
  EXPECT_EQ(preassess::to_decimal_string(Rational(1, 8), 2), "0.13");
  EXPECT_EQ(preassess::to_decimal_string(Rational(-1, 8), 2), "-0.13");
}

TEST(Rational, ParseAcceptsFractionsIntegersAndDecimals) {
  EXPECT_EQ(preassess::parse_rational("2/6"), Rational(1, 3));
  EXPECT_EQ(preassess::parse_rational("7"), Rational(7));
  EXPECT_EQ(preassess::parse_rational("0.125"), Rational(1, 8));
  EXPECT_EQ(preassess::parse_rational("-3.5"), Rational(-7, 2));
}

TEST(Rational, ParseRejectsGarbage) {
  for (const char* bad : {"", "abc", "1/0", "1/", "/2", "0.1.2", "1e3"}) {
    try {
      preassess::parse_rational(bad);
      ADD_FAILURE() << "accepted '" << bad << "'";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::ParseError) << bad;
    }
  }
}

TEST(Rational, DoubleConversion) { EXPECT_DOUBLE_EQ(preassess::to_double(Rational(3, 4)), 0.75); }
