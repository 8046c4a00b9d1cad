#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sg/rational.hpp"

using namespace sg;

TEST_CASE("parse_rational accepts fractions and terminating decimals") {
    CHECK(*parse_rational("1/2") == Rat(1, 2));
    CHECK(*parse_rational("2/4") == Rat(1, 2));
    CHECK(*parse_rational("0.25") == Rat(1, 4));
    CHECK(*parse_rational("0.125") == Rat(1, 8));
    CHECK(*parse_rational("1") == Rat(1));
    CHECK(*parse_rational("1.0") == Rat(1));
    CHECK(*parse_rational("0.1") == Rat(1, 10));
}

TEST_CASE("parse_rational rejects malformed input") {
    CHECK(!parse_rational(""));
    CHECK(!parse_rational("1/0"));
    CHECK(!parse_rational("-1/2"));
    CHECK(!parse_rational("abc"));
    CHECK(!parse_rational("1.2.3"));
    CHECK(!parse_rational(".5"));
    CHECK(!parse_rational("1/"));
    CHECK(!parse_rational("1e-3"));
}

TEST_CASE("fraction rendering is reduced with explicit denominator") {
    CHECK(to_fraction_string(make_rat(2, 4)) == "1/2");
    CHECK(to_fraction_string(Rat(1)) == "1/1");
    CHECK(to_fraction_string(Rat(0)) == "0/1");
}

TEST_CASE("dyadic detection") {
    int bits = -1;
    CHECK(is_dyadic(Rat(1, 8), &bits));
    CHECK(bits == 3);
    CHECK(is_dyadic(Rat(1), &bits));
    CHECK(bits == 0);
    CHECK(!is_dyadic(Rat(1, 3)));
    CHECK(!is_dyadic(Rat(5, 6)));
    CHECK(is_dyadic(Rat(11, 16)));
}

TEST_CASE("dyadic quantization") {
    CHECK(dyadic_quantize(0.4, 4) == Rat(3, 8));  // round(6.4)/16
    CHECK(dyadic_quantize(0.5, 1) == Rat(1, 2));
    CHECK(dyadic_quantize(-0.3, 8) == Rat(0));
    CHECK(dyadic_quantize(1.7, 8) == Rat(1));
    // 2^-40 grid keeps the round trip within 1e-12
    double v = 0.123456789;
    CHECK(std::abs(to_double(dyadic_quantize(v, 40)) - v) < 1e-12);
}

TEST_CASE("shortest round-trip decimals") {
    for (double v : {0.5, 0.1, 0.4, 1.0 / 3.0, 1e-9, 0.49935}) {
        std::string s = to_roundtrip_decimal(v);
        CHECK(std::stod(s) == v);
    }
    CHECK(to_roundtrip_decimal(0.5) == "0.5");
    CHECK(to_roundtrip_decimal(1.0) == "1");
}
