#include <catch2/catch_amalgamated.hpp>

#include "ecic/special.hpp"

#include <cmath>

#include "helpers.hpp"

using namespace ecic;

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
}

TEST_CASE("student_t_quantile matches the Cauchy closed form (nu = 1)") {
    CHECK(std::fabs(student_t_quantile(0.75, 1.0) - 1.0) < 1e-10);
    for (double q : {0.51, 0.6, 0.75, 0.9, 0.99, 0.999, 0.9999}) {
        const double expect = std::tan(kPi * (q - 0.5));
        CHECK(std::fabs(student_t_quantile(q, 1.0) - expect) < 1e-10 * (1.0 + expect));
    }
}

TEST_CASE("student_t_quantile matches the nu = 2 closed form") {
    const double q = 0.9;
    const double expect = (2.0 * q - 1.0) / std::sqrt(2.0 * q * (1.0 - q));
    CHECK(std::fabs(student_t_quantile(q, 2.0) - expect) < 1e-10);
    for (double level : {0.55, 0.7, 0.8, 0.95, 0.995}) {
        const double closed = (2.0 * level - 1.0) / std::sqrt(2.0 * level * (1.0 - level));
        CHECK(std::fabs(student_t_quantile(level, 2.0) - closed) < 1e-10 * (1.0 + closed));
    }
}

TEST_CASE("student_t_quantile symmetry and center") {
    CHECK(student_t_quantile(0.5, 10.0) == 0.0);
    for (double q : {0.6, 0.9, 0.99})
        for (double nu : {1.0, 2.0, 5.0, 10.0})
            CHECK(student_t_quantile(1.0 - q, nu) == -student_t_quantile(q, nu));
}

TEST_CASE("student_t_quantile inverts the CDF") {
    for (double q : {0.01, 0.2, 0.5, 0.8, 0.97, 0.9995})
        for (double nu : {0.5, 1.0, 3.0, 10.0, 30.0}) {
            const double t = student_t_quantile(q, nu);
            CHECK(std::fabs(student_t_cdf(t, nu) - q) < 1e-12);
        }
}

TEST_CASE("student_t_quantile rejects boundary and bad parameters") {
    CHECK_THROWS(student_t_quantile(0.0, 10.0));
    CHECK_THROWS(student_t_quantile(1.0, 10.0));
    CHECK_THROWS(student_t_quantile(0.5, 0.0));
    CHECK_THROWS(student_t_quantile(0.5, -1.0));
}

TEST_CASE("beta_quantile closed forms") {
    CHECK(std::fabs(beta_quantile(0.3, 1.0, 1.0) - 0.3) < 1e-12);
    CHECK(std::fabs(beta_quantile(0.75, 1.0, 2.0) - 0.5) < 1e-12);
    CHECK(std::fabs(beta_quantile(0.5, 2.0, 2.0) - 0.5) < 1e-12);
    // Beta(1,2): quantile q -> 1 - sqrt(1-q)
    for (double q : {0.01, 0.1, 0.4, 0.9, 0.999}) {
        const double expect = 1.0 - std::sqrt(1.0 - q);
        CHECK(std::fabs(beta_quantile(q, 1.0, 2.0) - expect) < 1e-10);
    }
}

TEST_CASE("beta_quantile rejects boundary and bad shapes") {
    CHECK_THROWS(beta_quantile(0.0, 1.0, 1.0));
    CHECK_THROWS(beta_quantile(1.0, 1.0, 1.0));
    CHECK_THROWS(beta_quantile(0.5, 0.0, 1.0));
    CHECK_THROWS(beta_quantile(0.5, 1.0, -2.0));
}
