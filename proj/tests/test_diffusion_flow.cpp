#include "doctest.h"
#include "oracles.hpp"

#include "entroflow/diffusion_flow.hpp"
#include "entroflow/errors.hpp"

#include <cmath>

using namespace entroflow;

TEST_CASE("heat flow matches the cosine mode solution") {
    FlowConfig cfg;
    cfg.grid = Grid(1, 128);
    cfg.t_end = 0.1;
    const Trajectory traj = run(cosine_bump(cfg.grid), cfg);
    const Field& u = traj.fields.back();
    double err = 0;
    for (int i = 0; i < 128; ++i) err = std::max(err, std::abs(u[i] - oracle::heat_cosine(0.5, 0.1, u.grid.center(i))));
    CHECK(err < 1e-4);
    CHECK(traj.times.back() == doctest::Approx(0.1));
}

TEST_CASE("mass is conserved to round-off") {
    FlowConfig cfg;
    cfg.model = CoeffModel::power_law(3);
    cfg.grid = Grid(1, 64);
    cfg.t_end = 0.05;
    const Field u0 = cosine_bump(cfg.grid, 0.8);
    const Trajectory traj = run(u0, cfg);
    const double m0 = integrate(u0);
    for (const Field& f : traj.fields) CHECK(std::abs(integrate(f) - m0) < 1e-13);
}

TEST_CASE("snapshots are uniform and include both ends") {
    FlowConfig cfg;
    cfg.grid = Grid(1, 32);
    cfg.t_end = 0.01;
    cfg.record_every = 7;
    const Trajectory traj = run(cosine_bump(cfg.grid), cfg);
    REQUIRE(traj.size() >= 2);
    const double step = traj.times[1] - traj.times[0];
    CHECK(step == doctest::Approx(7 * traj.dt));
    for (std::size_t k = 1; k < traj.size(); ++k) CHECK(traj.times[k] - traj.times[k - 1] == doctest::Approx(step));
    CHECK(traj.times.back() == doctest::Approx(0.01));
}

TEST_CASE("stable step") {
    const Grid g(1, 16);
    const Field u = cosine_bump(g, 0.5);
    CHECK(stable_dt(u, CoeffModel::linear(), 0.4) == doctest::Approx(0.4 / (16.0 * 16.0 * 2.0)));
    CHECK(stable_dt(u, CoeffModel::power_law(2), 1.0) == doctest::Approx(1.0 / (256.0 * 2.0 * 2.0 * u.max())));
}

TEST_CASE("an oversized fixed step trips the stability guard") {
    FlowConfig cfg;
    cfg.grid = Grid(1, 32);
    cfg.t_end = 0.01;
    cfg.fixed_dt = 2e-3;
    try {
        run(cosine_bump(cfg.grid), cfg);
        FAIL("expected NumericalAbort");
    } catch (const NumericalAbort& e) {
        CHECK(e.last_safe_time() == 0.0);
    }
}

TEST_CASE("positivity loss aborts with the last safe time") {
    const Grid g(1, 16);
    Field u(g, 1.0);
    u[5] = 2.0;
    // twice the diffusive limit: the peak overshoots below zero
    CHECK_THROWS_AS(step(u, CoeffModel::linear(), 2.0 / 256.0, 1e-8), NumericalAbort);
}

TEST_CASE("config validation") {
    FlowConfig cfg;
    cfg.grid = Grid(1, 16);
    cfg.t_end = -1;
    CHECK_THROWS_AS(run(cosine_bump(cfg.grid), cfg), UsageError);
    cfg.t_end = 0.1;
    cfg.grid = Grid(2, 16);
    CHECK_THROWS(run(cosine_bump(Grid(1, 16)), cfg));
    Field bad(Grid(1, 16), 1.0);
    bad[3] = -0.1;
    cfg.grid = Grid(1, 16);
    CHECK_THROWS(run(bad, cfg));
}
