#include "entroflow/entropy_meters.hpp"

#include "entroflow/errors.hpp"

#include <algorithm>
#include <cmath>

namespace entroflow {

MeterRecord measure(const Field& u, const CoeffModel& model) {
    if (u.grid.dim != 1) throw UsageError("meters are defined for 1D fields");
    if (u.min() <= 0.0) throw DomainError("meters need a positive field");

    const Field du = derivative(u, 0, Parity::Even);
    Field entropy(u.grid), sigma_sq(u.grid), st(u.grid), inner(u.grid);
    for (std::size_t k = 0; k < u.size(); ++k) {
        const double s = u[k];
        const double a = model.a(s);
        entropy[k] = eval_primitives(model, s).entropy_density;
        const double dsigma = a / std::sqrt(s) * du[k];
        const double dlambda = a / s * du[k];
        sigma_sq[k] = dsigma * dsigma;
        st[k] = s * dlambda * dlambda;
        inner[k] = dsigma / std::sqrt(s);
    }
    // inner is a flux-like field: odd about the boundary faces.
    const Field dinner = derivative(inner, 0, Parity::Odd);
    Field diss(u.grid);
    for (std::size_t k = 0; k < u.size(); ++k) diss[k] = u[k] * model.a(u[k]) * dinner[k] * dinner[k];

    return MeterRecord{integrate(entropy), integrate(sigma_sq), integrate(st), integrate(diss)};
}

void attach_meters(Trajectory& traj, const CoeffModel& model) {
    traj.meters.clear();
    traj.meters.reserve(traj.fields.size());
    for (const auto& f : traj.fields) traj.meters.push_back(measure(f, model));
}

namespace {

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

void require_uniform(const std::vector<double>& times, std::size_t min_count) {
    if (times.size() < min_count) {
        throw UsageError("need at least " + std::to_string(min_count) + " snapshots, got " +
                         std::to_string(times.size()));
    }
    const double step = times[1] - times[0];
    for (std::size_t k = 1; k + 1 < times.size(); ++k) {
        if (std::abs((times[k + 1] - times[k]) - step) > 1e-9 * step) {
            throw UsageError("snapshot spacing is not uniform");
        }
    }
}

}  // namespace

double ResidualSeries::max_abs_entropy() const { return max_abs(r_entropy); }
double ResidualSeries::max_abs_fisher() const { return max_abs(r_fisher); }

ResidualSeries identity_residuals(const Trajectory& traj, const CoeffModel& model) {
    require_uniform(traj.times, 3);
    std::vector<MeterRecord> meters = traj.meters;
    if (meters.size() != traj.fields.size()) {
        meters.clear();
        for (const auto& f : traj.fields) meters.push_back(measure(f, model));
    }
    ResidualSeries out;
    out.h = traj.grid.spacing();
    out.dt = traj.dt;
    for (std::size_t k = 0; k + 1 < meters.size(); ++k) {
        const double interval = traj.times[k + 1] - traj.times[k];
        const auto& m0 = meters[k];
        const auto& m1 = meters[k + 1];
        out.r_entropy.push_back((m1.entropy - m0.entropy) / interval + 0.5 * (m0.fisher_sigma + m1.fisher_sigma));
        out.r_fisher.push_back(0.5 * (m1.fisher_sigma - m0.fisher_sigma) / interval +
                               0.5 * (m0.dissipation + m1.dissipation));
    }
    return out;
}

MonotonicityReport check_nonincreasing(const std::vector<double>& values, double h, double dt) {
    MonotonicityReport report;
    report.worst_excess = -INFINITY;
    for (std::size_t k = 0; k + 1 < values.size(); ++k) {
        const double tol = 10.0 * (h * h + dt) * std::abs(values[k]);
        const double excess = (values[k + 1] - values[k]) - tol;
        if (excess > report.worst_excess) {
            report.worst_excess = excess;
            report.worst_index = k;
        }
        if (excess > 0.0) report.pass = false;
    }
    if (values.size() < 2) report.worst_excess = 0.0;
    return report;
}

ConvexityReport convexity_check(const Trajectory& traj) {
    require_uniform(traj.times, 4);
    if (traj.meters.size() != traj.times.size()) throw UsageError("convexity check needs attached meters");
    const double interval = traj.times[1] - traj.times[0];
    std::vector<double> second;
    for (std::size_t k = 1; k + 1 < traj.meters.size(); ++k) {
        const double e0 = traj.meters[k - 1].entropy, e1 = traj.meters[k].entropy, e2 = traj.meters[k + 1].entropy;
        second.push_back((e2 - 2.0 * e1 + e0) / (interval * interval));
    }
    const double h = traj.grid.spacing();
    ConvexityReport report;
    report.tolerance = 10.0 * (h * h + traj.dt) * max_abs(second);
    report.min_second_difference = *std::min_element(second.begin(), second.end());
    report.pass = report.min_second_difference >= -report.tolerance;
    return report;
}

}  // namespace entroflow
