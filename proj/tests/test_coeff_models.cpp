#include "doctest.h"
#include "oracles.hpp"

#include "entroflow/coeff_models.hpp"
#include "entroflow/errors.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace entroflow;

namespace {

std::vector<double> log_grid(double lo, double hi, int n) {
    std::vector<double> s;
    for (int k = 0; k < n; ++k) s.push_back(lo * std::pow(hi / lo, k / double(n - 1)));
    return s;
}

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("coefficient values") {
    CHECK(CoeffModel::linear().a(3.7) == 1.0);
    CHECK(CoeffModel::power_law(2).a(3.0) == doctest::Approx(6.0));
    CHECK(CoeffModel::power_law(0.5).a(4.0) == doctest::Approx(0.25));
    CHECK(CoeffModel::shifted_power_law(3).a(1.0) == doctest::Approx(12.0));
    CHECK(CoeffModel::power_law(3).da(2.0) == doctest::Approx(12.0));
    CHECK(CoeffModel::power_law(1).family() == Family::PowerLaw);
}

TEST_CASE("primitives vanish at their lower limits") {
    for (const auto& m : {CoeffModel::linear(), CoeffModel::power_law(0.5), CoeffModel::shifted_power_law(2)}) {
        const Primitives p = eval_primitives(m, 1.0);
        CHECK(p.lambda == doctest::Approx(0.0));
        CHECK(p.entropy_density == doctest::Approx(0.0));
        CHECK(p.sigma == doctest::Approx(0.0));
    }
    CHECK(eval_primitives(CoeffModel::power_law(2), 1.0).flux_primitive == doctest::Approx(1.0));
}

TEST_CASE("linear primitives in closed form") {
    const double s = 2.5;
    const Primitives p = eval_primitives(CoeffModel::linear(), s);
    CHECK(p.lambda == doctest::Approx(std::log(s)).epsilon(1e-14));
    CHECK(p.entropy_density == doctest::Approx(s * std::log(s) - s + 1).epsilon(1e-14));
    CHECK(p.sigma == doctest::Approx(2 * (std::sqrt(s) - 1)).epsilon(1e-14));
    CHECK(p.flux_primitive == doctest::Approx(s).epsilon(1e-14));
}

TEST_CASE("closed forms agree with the defining integrals") {
    for (double m : {0.5, 1.0, 1.5, 2.0, 3.0}) {
        CAPTURE(m);
        const CoeffModel model = CoeffModel::power_law(m);
        const auto a = [&](double s) { return m * std::pow(s, m - 1.0); };
        for (double s : log_grid(1e-2, 1e2, 13)) {
            CAPTURE(s);
            const Primitives p = eval_primitives(model, s);
            const auto o = oracle::primitives(a, s);
            CHECK(close(p.lambda, o.lambda, 1e-10));
            CHECK(close(p.entropy_density, o.entropy, 1e-10));
            CHECK(close(p.sigma, o.sigma, 1e-10));
            CHECK(close(p.flux_primitive, o.flux, 1e-10));
        }
    }
}

TEST_CASE("library quadrature path matches the oracle for the shifted law") {
    const CoeffModel model = CoeffModel::shifted_power_law(1.5);
    const auto a = [](double s) { return 1.5 * std::sqrt(1.0 + s); };
    for (double s : log_grid(1e-2, 1e2, 7)) {
        const Primitives p = eval_primitives(model, s);
        const auto o = oracle::primitives(a, s);
        CHECK(close(p.lambda, o.lambda, 1e-9));
        CHECK(close(p.entropy_density, o.entropy, 1e-9));
        CHECK(close(p.sigma, o.sigma, 1e-9));
        CHECK(close(p.flux_primitive, o.flux, 1e-9));
    }
}

TEST_CASE("domain and model errors") {
    CHECK_THROWS_AS(CoeffModel::power_law(0.0), ModelError);
    CHECK_THROWS_AS(CoeffModel::power_law(-1.0), ModelError);
    CHECK_THROWS_AS(CoeffModel::linear().a(0.0), DomainError);
    CHECK_THROWS_AS(CoeffModel::power_law(2).a(-1.0), DomainError);
    CHECK_THROWS_AS(eval_primitives(CoeffModel::linear(), 0.0), DomainError);
    // a < 0 somewhere
    CHECK_THROWS_AS(CoeffModel::custom({0, 1, 2}, {1, -1, 1}, {0, 0, 0}), ModelError);
    // a' inconsistent with a
    CHECK_THROWS_AS(CoeffModel::custom({0, 0.5, 1, 2}, {1, 1.5, 2, 3}, {5, 5, 5, 5}), ModelError);
    // must start at 0 and cover 1
    CHECK_THROWS_AS(CoeffModel::custom({0.5, 1, 2}, {1, 1, 1}, {0, 0, 0}), ModelError);
    CHECK_THROWS_AS(CoeffModel::custom({0, 0.5, 0.9}, {1, 1, 1}, {0, 0, 0}), ModelError);
}

TEST_CASE("custom table reproduces an affine law and its primitives") {
    // a(s) = 1 + s is reproduced exactly by cubic Hermite
    std::vector<double> s, a, da;
    for (int k = 0; k <= 40; ++k) {
        s.push_back(0.25 * k);
        a.push_back(1.0 + 0.25 * k);
        da.push_back(1.0);
    }
    const CoeffModel model = CoeffModel::custom(s, a, da);
    CHECK(model.a(3.3) == doctest::Approx(4.3).epsilon(1e-13));
    CHECK(model.upper_limit() == doctest::Approx(10.0));
    CHECK_THROWS_AS(model.a(10.5), DomainError);
    const Primitives p = eval_primitives(model, 2.0);
    CHECK(p.lambda == doctest::Approx(std::log(2.0) + 1.0).epsilon(1e-10));
    CHECK(p.flux_primitive == doctest::Approx(2.0 + 2.0).epsilon(1e-10));
    CHECK(p.sigma == doctest::Approx(2 * (std::sqrt(2.0) - 1) + (2.0 / 3.0) * (std::pow(2.0, 1.5) - 1)).epsilon(1e-10));
}

TEST_CASE("custom table from csv") {
    const auto path = std::filesystem::temp_directory_path() / "entroflow_table.csv";
    {
        std::ofstream out(path);
        out << "s,a\n";
        for (int k = 0; k <= 20; ++k) out << 0.2 * k << ',' << 2.0 << '\n';
    }
    const CoeffModel model = CoeffModel::from_csv(path);
    CHECK(model.family() == Family::Custom);
    CHECK(model.a(1.7) == doctest::Approx(2.0));
    CHECK(eval_primitives(model, 3.0).lambda == doctest::Approx(2.0 * std::log(3.0)).epsilon(1e-10));
    std::filesystem::remove(path);
    CHECK_THROWS(CoeffModel::from_csv(path));
}

TEST_CASE("primitive cache interpolates between knots") {
    const CoeffModel model = CoeffModel::shifted_power_law(2.0);
    const PrimitiveCache cache(model, 0.1, 10.0, 256);
    for (double s : {0.1, 0.137, 1.0, 2.71, 9.99}) {
        const Primitives exact = eval_primitives(model, s);
        const Primitives got = cache(s);
        CHECK(close(got.lambda, exact.lambda, 1e-8));
        CHECK(close(got.entropy_density, exact.entropy_density, 1e-8));
        CHECK(close(got.sigma, exact.sigma, 1e-8));
        CHECK(close(got.flux_primitive, exact.flux_primitive, 1e-8));
    }
    CHECK_THROWS_AS(cache(20.0), DomainError);
}

TEST_CASE("keller-segel coefficients") {
    CHECK(ks_diffusion(2, 1.0) == doctest::Approx(0.25));
    CHECK(ks_sensitivity(1, 1.0) == doctest::Approx(0.5));
    CHECK(ks_sensitivity(1, 0.0) == 0.0);
    // S' and S'' against centered differences
    for (double q : {0.0, 0.75, 1.0}) {
        const double s = 0.8, e = 1e-5;
        CHECK(ks_sensitivity_d1(q, s) ==
              doctest::Approx((ks_sensitivity(q, s + e) - ks_sensitivity(q, s - e)) / (2 * e)).epsilon(1e-8));
        CHECK(ks_sensitivity_d2(q, s) ==
              doctest::Approx((ks_sensitivity_d1(q, s + e) - ks_sensitivity_d1(q, s - e)) / (2 * e)).epsilon(1e-7));
    }
    const KSCoeffs c = eval_ks(2, 1, 1.0);
    CHECK(c.double_primitive == 0.0);
    CHECK(c.psi == doctest::Approx(0.0));
    CHECK(c.sigma_ds == doctest::Approx(0.0));
    CHECK_THROWS_AS(eval_ks(2, 1, 0.0), DomainError);
}

TEST_CASE("G and Psi against nested quadrature") {
    for (auto [p, q] : {std::pair{2.0, 1.0}, std::pair{1.75, 0.75}, std::pair{1.0, 0.0}, std::pair{2.5, 0.5}}) {
        CAPTURE(p);
        CAPTURE(q);
        for (double s : log_grid(0.05, 20.0, 9)) {
            CAPTURE(s);
            CHECK(close(ks_double_primitive(p, q, s), oracle::ks_G(p, q, s), 1e-9));
            CHECK(close(ks_psi(p, q, s), oracle::ks_Psi(p, q, s), 1e-9));
        }
    }
}

TEST_CASE("sigma_ds against the oracle") {
    const double p = 2, q = 1;
    for (double s : {0.1, 0.5, 3.0, 12.0}) {
        const double o = oracle::from_one([&](double t) { return oracle::ks_D(p, t) / std::sqrt(oracle::ks_S(q, t)); }, s);
        CHECK(close(eval_ks(p, q, s).sigma_ds, o, 1e-9));
    }
}

TEST_CASE("shifted law at s = 3") {
    CHECK(CoeffModel::shifted_power_law(2).a(3.0) == doctest::Approx(8.0));
    const CoeffModel model = CoeffModel::shifted_power_law(0.5);
    const auto o = oracle::primitives([](double s) { return 0.5 / std::sqrt(1.0 + s); }, 3.0);
    const Primitives p = eval_primitives(model, 3.0);
    CHECK(close(p.lambda, o.lambda, 1e-9));
    CHECK(close(p.entropy_density, o.entropy, 1e-9));
    CHECK(close(p.sigma, o.sigma, 1e-9));
}
