#include "doctest.h"

#include "entroflow/errors.hpp"
#include "entroflow/field_calculus.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

using namespace entroflow;
using std::numbers::pi;

namespace {

double max_err(const Field& f, const std::function<double(double, double, double)>& exact) {
    const Field e = sample(f.grid, exact);
    double m = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) m = std::max(m, std::abs(f[k] - e[k]));
    return m;
}

}  // namespace

TEST_CASE("grid validation") {
    CHECK_THROWS_AS(Grid(1, 7), UsageError);
    CHECK_THROWS_AS(Grid(4, 16), UsageError);
    CHECK_THROWS_AS(Grid(0, 16), UsageError);
    const Grid g(3, 8);
    CHECK(g.size() == 512);
    CHECK(g.center(0) == doctest::Approx(1.0 / 16));
    int idx[3];
    g.unflatten(g.stride(0) * 3 + g.stride(1) * 5 + g.stride(2) * 7, idx);
    CHECK(idx[0] == 3);
    CHECK(idx[1] == 5);
    CHECK(idx[2] == 7);
}

TEST_CASE("midpoint integration of cosines") {
    const Grid g(2, 32);
    const Field f = sample(g, [](double x, double y, double) { return 2.0 + std::cos(pi * x) * std::cos(2 * pi * y); });
    CHECK(integrate(f) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("derivatives converge at second order with mirror ghosts") {
    double prev1 = 0, prev2 = 0, prev_odd = 0;
    for (int n : {32, 64, 128}) {
        const Grid g(1, n);
        const Field u = sample(g, [](double x, double, double) { return std::cos(pi * x); });
        const double e1 = max_err(derivative(u, 0), [](double x, double, double) { return -pi * std::sin(pi * x); });
        const double e2 =
            max_err(second_derivative(u, 0), [](double x, double, double) { return -pi * pi * std::cos(pi * x); });
        // a flux-like field, odd about both faces
        const Field w = sample(g, [](double x, double, double) { return std::sin(pi * x); });
        const double eo = max_err(derivative(w, 0, Parity::Odd), [](double x, double, double) { return pi * std::cos(pi * x); });
        if (prev1 > 0) {
            CHECK(prev1 / e1 > 3.5);
            CHECK(prev2 / e2 > 3.5);
            CHECK(prev_odd / eo > 3.5);
        }
        prev1 = e1;
        prev2 = e2;
        prev_odd = eo;
    }
}

TEST_CASE("even reflection of a flux field is only first order at the boundary") {
    const Grid g(1, 128);
    const Field w = sample(g, [](double x, double, double) { return std::sin(pi * x); });
    const double even = max_err(derivative(w, 0, Parity::Even), [](double x, double, double) { return pi * std::cos(pi * x); });
    const double odd = max_err(derivative(w, 0, Parity::Odd), [](double x, double, double) { return pi * std::cos(pi * x); });
    CHECK(even > 100 * odd);
}

TEST_CASE("summation by parts for an even/odd pair") {
    const Grid g(1, 40);
    const Field f = sample(g, [](double x, double, double) { return 1.0 + x * x * (1 - x) + 0.3 * std::cos(3 * x); });
    const Field w = sample(g, [](double x, double, double) { return std::exp(x) * x * (1 - x) + 0.1 * x; });
    const Field df = derivative(f, 0, Parity::Even);
    const Field dw = derivative(w, 0, Parity::Odd);
    double a = 0, b = 0;
    for (std::size_t k = 0; k < f.size(); ++k) {
        a += f[k] * dw[k];
        b += df[k] * w[k];
    }
    CHECK(std::abs(a + b) < 1e-13);
}

TEST_CASE("summation by parts picks up a boundary term for two even fields") {
    const Grid g(1, 40);
    const Field f = sample(g, [](double x, double, double) { return 1.0 + x; });
    const Field w = sample(g, [](double x, double, double) { return 2.0 - x * x; });
    const Field df = derivative(f, 0);
    const Field dw = derivative(w, 0);
    const double h = g.spacing();
    double a = 0, b = 0;
    for (std::size_t k = 0; k < f.size(); ++k) {
        a += f[k] * dw[k] * h;
        b += df[k] * w[k] * h;
    }
    const std::size_t last = f.size() - 1;
    CHECK((a + b) == doctest::Approx(f[last] * w[last] - f[0] * w[0]).epsilon(1e-12));
}

TEST_CASE("hessian is symmetric and exact on separable cosines") {
    const Grid g(2, 64);
    const Field f = sample(g, [](double x, double y, double) { return 3.0 + std::cos(pi * x) * std::cos(pi * y); });
    const auto hess = neumann_hessian(f);
    REQUIRE(hess.size() == 2);
    for (std::size_t k = 0; k < f.size(); ++k) CHECK(hess[0][1][k] == doctest::Approx(hess[1][0][k]).epsilon(1e-12));
    const double e = max_err(hess[0][1], [](double x, double y, double) { return pi * pi * std::sin(pi * x) * std::sin(pi * y); });
    CHECK(e < 1e-2);
    const auto grad = neumann_gradient(f);
    CHECK(grad.size() == 2);
}

TEST_CASE("flux divergence conserves the total") {
    const std::vector<double> flux = {0.3, -1.2, 4.0, 0.5, 2.0, -0.7, 1.1};
    const auto div = flux_divergence(flux, 0.125);
    REQUIRE(div.size() == 8);
    double sum = 0;
    for (double d : div) sum += d;
    CHECK(std::abs(sum) < 1e-13);
    CHECK(div[0] == doctest::Approx(0.3 / 0.125));
}

TEST_CASE("test functions") {
    TestFunctionSpec spec;
    spec.offset = 2.0;
    spec.cosine_coeffs = {{0.5, 0.25}, {0.3}};
    CHECK(spec.positivity_margin() == doctest::Approx(0.95));
    const Field f = build_test_function(Grid(2, 16), spec);
    CHECK(f.min() > 0.95);
    spec.cosine_coeffs = {{1.0, 0.98}};
    CHECK_THROWS_AS(build_test_function(Grid(1, 16), spec), UsageError);
}

TEST_CASE("neumann compatibility") {
    const Grid g(1, 64);
    CHECK_NOTHROW(require_neumann_compatible(sample(g, [](double x, double, double) { return 2 + std::cos(pi * x); })));
    CHECK_THROWS_AS(require_neumann_compatible(sample(g, [](double x, double, double) { return 2 + x; })), UsageError);
    CHECK_THROWS_AS(require_neumann_compatible(sample(g, [](double x, double, double) { return 2 + std::sin(pi * x); })),
                    UsageError);
}

TEST_CASE("field csv layout") {
    const Grid g(2, 8);
    const Field f(g, 1.5);
    std::ostringstream out;
    write_field_csv(out, f);
    const std::string text = out.str();
    CHECK(text.rfind("x,y,value\n", 0) == 0);
    CHECK(text.find("6.250000000000e-02,6.250000000000e-02,1.500000000000e+00") != std::string::npos);
    std::size_t lines = 0;
    for (char c : text) lines += c == '\n';
    CHECK(lines == 65);
}
