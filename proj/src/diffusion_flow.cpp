#include "entroflow/diffusion_flow.hpp"

#include "entroflow/errors.hpp"

#include <cmath>
#include <numbers>

namespace entroflow {

void FlowConfig::validate() const {
    if (grid.dim != 1) throw UsageError("diffusion flow runs on 1D grids only");
    if (!(t_end > 0.0)) throw UsageError("t_end must be positive");
    if (!(safety > 0.0 && safety <= 1.0)) throw UsageError("safety must lie in (0, 1]");
    if (!(positivity_floor > 0.0)) throw UsageError("positivity floor must be positive");
    if (record_every < 1) throw UsageError("record_every must be at least 1");
    if (fixed_dt && !(*fixed_dt > 0.0)) throw UsageError("fixed dt must be positive");
}

double stable_dt(const Field& u, const CoeffModel& model, double safety) {
    double amax = 0.0;
    for (double v : u.values) {
        const double a = model.a(v);
        if (!std::isfinite(a)) throw ModelError("non-finite coefficient while choosing the step");
        amax = std::max(amax, a);
    }
    const double h = u.grid.spacing();
    return safety * h * h / (2.0 * amax);
}

Field step(const Field& u, const CoeffModel& model, double dt, double floor) {
    const int n = u.grid.cells;
    const double h = u.grid.spacing();
    std::vector<double> flux(static_cast<std::size_t>(n - 1));
    for (int i = 0; i + 1 < n; ++i) {
        const double mid = 0.5 * (u[i] + u[i + 1]);
        flux[i] = model.a(mid) * (u[i + 1] - u[i]) / h;
    }
    const auto div = flux_divergence(flux, h);
    Field next(u.grid);
    for (int i = 0; i < n; ++i) {
        next[i] = u[i] + dt * div[i];
        if (!(next[i] >= floor)) {
            throw NumericalAbort("positivity loss at cell " + std::to_string(i), 0.0);
        }
    }
    return next;
}

Trajectory run(const Field& u0, const FlowConfig& config) {
    config.validate();
    if (u0.grid != config.grid) throw UsageError("initial field is not on the configured grid");
    if (u0.min() <= config.positivity_floor) throw DomainError("initial field must exceed the positivity floor");

    const double dt_target = config.fixed_dt ? *config.fixed_dt : stable_dt(u0, config.model, config.safety);
    long long steps = static_cast<long long>(std::ceil(config.t_end / dt_target - 1e-9));
    steps = std::max<long long>(steps, 1);
    steps = ((steps + config.record_every - 1) / config.record_every) * config.record_every;
    const double dt = config.t_end / static_cast<double>(steps);

    Trajectory traj;
    traj.grid = config.grid;
    traj.dt = dt;
    traj.times.push_back(0.0);
    traj.fields.push_back(u0);

    Field u = u0;
    double last_safe = 0.0;
    for (long long k = 1; k <= steps; ++k) {
        if (dt > stable_dt(u, config.model, 1.0)) {
            throw NumericalAbort("stability guard: dt exceeds h^2/(2 max a(u))", last_safe);
        }
        try {
            u = step(u, config.model, dt, config.positivity_floor);
        } catch (const NumericalAbort& e) {
            throw NumericalAbort(e.reason(), last_safe);
        }
        last_safe = static_cast<double>(k) * dt;
        if (k % config.record_every == 0) {
            traj.times.push_back(last_safe);
            traj.fields.push_back(u);
        }
    }
    return traj;
}

Field cosine_bump(const Grid& grid, double amplitude) {
    return sample(grid, [&](double x, double, double) { return 1.0 + amplitude * std::cos(std::numbers::pi * x); });
}

}  // namespace entroflow
