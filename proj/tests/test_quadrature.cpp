#include "doctest.h"

#include "entroflow/errors.hpp"
#include "entroflow/quadrature.hpp"

#include <cmath>
#include <numbers>

using namespace entroflow;

TEST_CASE("simpson is exact on cubics") {
    const double v = adaptive_simpson([](double x) { return 4 * x * x * x - 3 * x * x + 2; }, -1.0, 2.0);
    CHECK(v == doctest::Approx(15.0 - 9.0 + 6.0).epsilon(1e-14));
}

TEST_CASE("smooth integrals reach the absolute tolerance") {
    CHECK(std::abs(adaptive_simpson([](double x) { return std::exp(x); }, 0.0, 1.0) - (std::numbers::e - 1.0)) < 1e-12);
    CHECK(std::abs(adaptive_simpson([](double x) { return std::sin(x); }, 0.0, std::numbers::pi) - 2.0) < 1e-12);
    CHECK(std::abs(adaptive_simpson([](double x) { return 1.0 / x; }, 1.0, 100.0) - std::log(100.0)) < 1e-11);
}

TEST_CASE("reversed limits give the signed integral") {
    const auto f = [](double x) { return x * x; };
    CHECK(adaptive_simpson(f, 1.0, 0.0) == doctest::Approx(-1.0 / 3.0).epsilon(1e-14));
    CHECK(adaptive_simpson(f, 0.5, 0.5) == 0.0);
}

TEST_CASE("depth exhaustion raises PrecisionError") {
    QuadratureOptions opts;
    opts.max_depth = 4;
    CHECK_THROWS_AS(adaptive_simpson([](double x) { return 1.0 / std::sqrt(x); }, 1e-12, 1.0, opts), PrecisionError);
    try {
        adaptive_simpson([](double x) { return std::sin(1.0 / x); }, 1e-6, 1.0, opts);
        FAIL("expected PrecisionError");
    } catch (const PrecisionError& e) {
        CHECK(e.achieved() > opts.abs_tol);
    }
}
