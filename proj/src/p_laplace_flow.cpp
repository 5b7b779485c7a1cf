#include "entroflow/p_laplace_flow.hpp"

#include "entroflow/errors.hpp"

#include <algorithm>
#include <cmath>

namespace entroflow {

void PLaplaceConfig::validate() const {
    if (!(p >= 1.0)) throw UsageError("p must be at least 1");
    if (std::abs(p - 1.5) < 1e-12) throw UsageError("p = 3/2 is excluded (p* vanishes)");
    if (!(delta >= 0.0)) throw UsageError("delta must be nonnegative");
    if (grid.dim != 1) throw UsageError("p-Laplace flow runs on 1D grids only");
    if (!(t_end > 0.0)) throw UsageError("t_end must be positive");
    if (!(safety > 0.0 && safety <= 1.0)) throw UsageError("safety must lie in (0, 1]");
    if (!(positivity_floor > 0.0)) throw UsageError("positivity floor must be positive");
    if (record_every < 1) throw UsageError("record_every must be at least 1");
    if (fixed_dt && !(*fixed_dt > 0.0)) throw UsageError("fixed dt must be positive");
}

double p_star(double p) {
    if (!(p > 1.0)) throw DomainError("p* needs p > 1");
    if (std::abs(p - 1.5) < 1e-12) throw DomainError("p* vanishes at p = 3/2");
    return 1.0 - 1.0 / (2.0 * (p - 1.0));
}

namespace {

double face_coefficient(double g, double p, double delta) {
    if (p == 2.0) return 1.0;
    return std::pow(g * g + delta * delta, 0.5 * (p - 2.0));
}

}  // namespace

double pl_stable_dt(const Field& u, double p, double delta, double safety) {
    const int n = u.grid.cells;
    const double h = u.grid.spacing();
    double kmax = 0.0;
    for (int i = 0; i + 1 < n; ++i) kmax = std::max(kmax, face_coefficient((u[i + 1] - u[i]) / h, p, delta));
    if (!std::isfinite(kmax)) throw ModelError("non-finite p-Laplace face coefficient (delta = 0 at a flat face?)");
    if (kmax == 0.0) return INFINITY;
    return safety * h * h / (2.0 * std::max(p - 1.0, 1.0) * kmax);
}

Field pl_step(const Field& u, const PLaplaceConfig& config, double dt) {
    const int n = u.grid.cells;
    const double h = u.grid.spacing();
    std::vector<double> flux(static_cast<std::size_t>(n - 1));
    for (int i = 0; i + 1 < n; ++i) {
        const double g = (u[i + 1] - u[i]) / h;
        flux[i] = face_coefficient(g, config.p, config.delta) * g;
    }
    const auto div = flux_divergence(flux, h);
    Field next(u.grid);
    for (int i = 0; i < n; ++i) {
        next[i] = u[i] + dt * div[i];
        if (!(next[i] >= config.positivity_floor)) {
            throw NumericalAbort("positivity loss at cell " + std::to_string(i), 0.0);
        }
    }
    return next;
}

Trajectory pl_run(const Field& u0, const PLaplaceConfig& config) {
    config.validate();
    if (u0.grid != config.grid) throw UsageError("initial field is not on the configured grid");
    if (u0.min() <= config.positivity_floor) throw DomainError("initial field must exceed the positivity floor");

    double dt_target = config.fixed_dt ? *config.fixed_dt : pl_stable_dt(u0, config.p, config.delta, config.safety);
    if (!std::isfinite(dt_target)) dt_target = config.t_end;
    long long steps = std::max<long long>(1, static_cast<long long>(std::ceil(config.t_end / dt_target - 1e-9)));
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
        if (dt > pl_stable_dt(u, config.p, config.delta, 1.0)) {
            throw NumericalAbort("stability guard: dt exceeds the p-Laplace diffusive limit", last_safe);
        }
        try {
            u = pl_step(u, config, dt);
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

namespace {

// d_x(u^p*) by the chain rule on the mirror-stencil derivative of u.
Field power_gradient(const Field& u, double ps) {
    const Field du = derivative(u, 0, Parity::Even);
    Field w(u.grid);
    for (std::size_t k = 0; k < u.size(); ++k) w[k] = ps * std::pow(u[k], ps - 1.0) * du[k];
    return w;
}

}  // namespace

double lyap_I(const Field& u, double p) {
    if (u.min() <= 0.0) throw DomainError("I[u] needs a positive field");
    const double ps = p_star(p);
    const Field w = power_gradient(u, ps);
    double sum = 0.0;
    for (double g : w.values) sum += std::pow(std::abs(g), p);
    return sum * u.grid.spacing();
}

double lyap_I_rate(const Field& u, double p) {
    if (u.min() <= 0.0) throw DomainError("I[u] needs a positive field");
    const double ps = p_star(p);
    if (ps <= 0.0) return NAN;
    const Field wx = power_gradient(u, ps);
    Field flux(u.grid);
    for (std::size_t k = 0; k < u.size(); ++k) flux[k] = std::pow(std::abs(wx[k]), p - 2.0) * wx[k];
    const Field dflux = derivative(flux, 0, Parity::Odd);
    const Field wxx = derivative(wx, 0, Parity::Odd);
    const double e1 = 0.25 - 1.0 / (4.0 * (p - 1.0));
    const double e3 = -1.5 + 1.0 / (2.0 * (p - 1.0));
    double t1 = 0.0, t2 = 0.0, t3 = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        const double g = std::abs(wx[k]);
        const double a = std::pow(u[k], e1) * dflux[k];
        t1 += a * a;
        t2 += std::pow(u[k], -0.5) * std::pow(g, 2.0 * p - 4.0) * wx[k] * wx[k] * wxx[k];
        t3 += std::pow(g, 2.0 * p) * std::pow(u[k], e3);
    }
    const double h = u.grid.spacing();
    return h * (-p * std::pow(ps, 2.0 - p) * t1 + 0.5 * p * p * std::pow(ps, 1.0 - p) * t2 -
                0.25 * p * std::pow(ps, -p) * t3);
}

PLMonotonicityReport monotonicity_report(const Trajectory& traj, double p, double delta) {
    if (traj.size() < 2) throw UsageError("monotonicity report needs at least 2 snapshots");
    PLMonotonicityReport report;
    report.verdict_available = p >= 2.0;
    report.worst_excess = -INFINITY;
    const double h = traj.grid.spacing();
    const double band = std::pow(delta, std::min(p - 1.0, 1.0));
    std::vector<double> values, rates;
    for (const auto& f : traj.fields) {
        values.push_back(lyap_I(f, p));
        rates.push_back(lyap_I_rate(f, p));
    }
    for (std::size_t k = 0; k < values.size(); ++k) {
        PLMonitorRow row;
        row.t = traj.times[k];
        row.I = values[k];
        if (k + 1 < values.size()) {
            const double interval = traj.times[k + 1] - traj.times[k];
            row.dI_dt = (values[k + 1] - values[k]) / interval;
            row.residual_prop61 = row.dI_dt - 0.5 * (rates[k] + rates[k + 1]);
            const double tol = 10.0 * (h * h + traj.dt + band) * std::abs(values[k]);
            const double excess = (values[k + 1] - values[k]) - tol;
            report.worst_excess = std::max(report.worst_excess, excess);
            if (excess > 0.0 && report.verdict_available) report.pass = false;
        }
        report.rows.push_back(row);
    }
    return report;
}

}  // namespace entroflow
