#include "doctest.h"
#include "oracles.hpp"

#include "entroflow/diffusion_flow.hpp"
#include "entroflow/entropy_meters.hpp"
#include "entroflow/errors.hpp"

#include <cmath>
#include <numbers>

using namespace entroflow;
using std::numbers::pi;

TEST_CASE("constant state carries no Fisher information") {
    const Field u(Grid(1, 16), 2.0);
    const MeterRecord m = measure(u, CoeffModel::power_law(2));
    CHECK(m.fisher_sigma == 0.0);
    CHECK(m.fisher_st == 0.0);
    CHECK(m.dissipation == 0.0);
    CHECK(m.entropy == doctest::Approx(eval_primitives(CoeffModel::power_law(2), 2.0).entropy_density));
}

TEST_CASE("Fisher information of the cosine datum converges to the integral") {
    // int |u_x|^2 / u for u = 1 + A cos(pi x), by quadrature in the test
    const double A = 0.5;
    const double exact = oracle::gl(
        [&](double x) {
            const double ux = -A * pi * std::sin(pi * x);
            return ux * ux / (1 + A * std::cos(pi * x));
        },
        0.0, 1.0, 64);
    double prev = 0;
    for (int n : {32, 64, 128}) {
        const MeterRecord m = measure(cosine_bump(Grid(1, n), A), CoeffModel::linear());
        const double err = std::abs(m.fisher_sigma - exact);
        if (prev > 0) CHECK(prev / err > 3.5);
        prev = err;
    }
}

TEST_CASE("both Fisher forms agree to round-off") {
    for (double m : {0.5, 1.0, 2.0, 3.0}) {
        const MeterRecord r = measure(cosine_bump(Grid(1, 64), 0.7), CoeffModel::power_law(m));
        CHECK(r.fisher_sigma == doctest::Approx(r.fisher_st).epsilon(1e-12));
    }
}

TEST_CASE("identity residuals shrink at second order") {
    for (const CoeffModel& model : {CoeffModel::linear(), CoeffModel::power_law(2)}) {
        double prev1 = 0, prev2 = 0;
        for (int n : {32, 64, 128}) {
            FlowConfig cfg;
            cfg.model = model;
            cfg.grid = Grid(1, n);
            const double h = cfg.grid.spacing();
            cfg.fixed_dt = 0.05 * h * h;
            cfg.record_every = 4;
            cfg.t_end = 0.005;
            const ResidualSeries r = identity_residuals(run(cosine_bump(cfg.grid), cfg), model);
            if (prev1 > 0) {
                CHECK(prev1 / r.max_abs_entropy() > 3.5);
                CHECK(prev2 / r.max_abs_fisher() > 3.5);
            }
            prev1 = r.max_abs_entropy();
            prev2 = r.max_abs_fisher();
        }
    }
}

TEST_CASE("residuals need enough uniform snapshots") {
    Trajectory t;
    t.grid = Grid(1, 16);
    t.times = {0.0, 0.1};
    t.fields = {cosine_bump(t.grid), cosine_bump(t.grid)};
    CHECK_THROWS_AS(identity_residuals(t, CoeffModel::linear()), UsageError);
    t.times = {0.0, 0.1, 0.3};
    t.fields.push_back(cosine_bump(t.grid));
    CHECK_THROWS_AS(identity_residuals(t, CoeffModel::linear()), UsageError);
}

TEST_CASE("monotonicity check tolerance") {
    const double h = 0.1, dt = 0.01;
    CHECK(check_nonincreasing({3, 2, 1}, h, dt).pass);
    // allowance is 10 (h^2 + dt) |v| = 0.2 * 1
    CHECK(check_nonincreasing({1.0, 1.19}, h, dt).pass);
    const auto r = check_nonincreasing({1.0, 0.5, 0.8}, h, dt);
    CHECK_FALSE(r.pass);
    CHECK(r.worst_index == 1);
    CHECK(r.worst_excess == doctest::Approx(0.3 - 0.1));
}

TEST_CASE("entropy is convex in time along the flow") {
    FlowConfig cfg;
    cfg.model = CoeffModel::power_law(2);
    cfg.grid = Grid(1, 64);
    cfg.t_end = 0.05;
    cfg.record_every = 32;
    Trajectory traj = run(cosine_bump(cfg.grid), cfg);
    attach_meters(traj, cfg.model);
    CHECK(convexity_check(traj).pass);
    traj.meters.clear();
    CHECK_THROWS_AS(convexity_check(traj), UsageError);
}
