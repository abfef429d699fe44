#include "robinlap/error.hpp"
#include "robinlap/expression.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace robinlap;

namespace {

double eval(const char* text, std::vector<double> x)
{
    return Expression::parse(text)(x);
}

ErrorKind parse_error(const char* text)
{
    try {
        Expression::parse(text);
    } catch (const Error& e) {
        return e.kind();
    }
    return ErrorKind::io_error;
}

} // namespace

TEST_CASE("expression arithmetic and precedence")
{
    CHECK(eval("1 + 2 * 3", {0.0}) == 7.0);
    CHECK(eval("(1 + 2) * 3", {0.0}) == 9.0);
    CHECK(eval("2 ^ 3 ^ 2", {0.0}) == 512.0);
    CHECK(eval("-2 ^ 2", {0.0}) == -4.0);
    CHECK(eval("8 / 4 / 2", {0.0}) == 1.0);
    CHECK(eval("1 - 2 - 3", {0.0}) == -4.0);
    CHECK(eval("2 * -3", {0.0}) == -6.0);
    CHECK(eval("1e-2 * 100", {0.0}) == doctest::Approx(1.0));
    CHECK(eval("pi", {0.0}) == doctest::Approx(M_PI));
    CHECK(eval("e", {0.0}) == doctest::Approx(std::exp(1.0)));
}

TEST_CASE("expression coordinates and norms")
{
    CHECK(eval("x", {0.5}) == 0.5);
    CHECK(eval("x1 * 10 + x2", {3.0, 4.0}) == 34.0);
    CHECK(eval("r", {3.0, 4.0}) == 5.0);
    CHECK(eval("|x|", {3.0, -4.0}) == 5.0);
    CHECK(eval("|x1 - 5|", {3.0, -4.0}) == 2.0);
    CHECK(eval("|x|^(-1/4) * ball(1)", {0.0625, 0.0}) == doctest::Approx(2.0));
    CHECK(eval("|x|^(-1/4) * ball(1)", {1.5, 0.0}) == 0.0);
    CHECK(eval("box(1)", {0.9, -0.99}) == 1.0);
    CHECK(eval("box(1)", {0.9, -1.01}) == 0.0);
    CHECK(eval("step(x1)", {0.0, 1.0}) == 1.0);
    CHECK(eval("step(x1)", {-1e-300, 1.0}) == 0.0);
    CHECK(eval("sign(x1) + sign(0)", {-3.0, 0.0}) == -1.0);
    CHECK(eval("min(x1, x2) + max(x1, x2) + pow(2, 10)", {1.0, 2.0}) == 1027.0);
    CHECK(eval("1 + 0.5 * cos(2 * pi * x1)", {0.5, 0.0}) == doctest::Approx(0.5));
    CHECK(eval("sqrt(abs(-16)) + log(exp(2))", {0.0}) == doctest::Approx(6.0));
    CHECK_THROWS_AS(eval("x", {1.0, 2.0}), Error);
}

TEST_CASE("expression parse errors")
{
    for (const char* bad : {"", "1 +", "(1", "foo(1)", "x3", "min(1)", "1 2", "|x", "sin 1", "2 ** 3"})
        CHECK_MESSAGE(parse_error(bad) == ErrorKind::config_invalid, bad);
}
