#pragma once

// Entropy, nonlinear Fisher information and its dissipation along 1D
// diffusion runs, and the residuals of the two exact identities
//
//   d/dt int H(u)               = - int |d_x Sigma(u)|^2
//   1/2 d/dt int |d_x Sigma|^2  = - int u a(u) |d_x(u^-1/2 d_x Sigma(u))|^2
//
// Derivatives of Sigma(u), Lambda(u) are taken by the chain rule on the
// mirror-stencil derivative of u, so u^-1/2 d_x Sigma(u) and d_x Lambda(u)
// are the same discrete field and fisher_sigma == fisher_st to round-off.

#include "entroflow/coeff_models.hpp"
#include "entroflow/trajectory.hpp"

#include <string>
#include <vector>

namespace entroflow {

MeterRecord measure(const Field& u, const CoeffModel& model);

/// Fills traj.meters.
void attach_meters(Trajectory& traj, const CoeffModel& model);

struct ResidualSeries {
    std::vector<double> r_entropy;  // per interval
    std::vector<double> r_fisher;   // per interval
    double h = 0.0;
    double dt = 0.0;

    double max_abs_entropy() const;
    double max_abs_fisher() const;
};

/// R1 = dE/dt + mean fisher_sigma, R2 = 1/2 d(fisher_sigma)/dt + mean dissipation,
/// per snapshot interval (time difference over the interval, trapezoidal mean).
/// Meters are attached on the fly if absent. Throws UsageError for fewer than
/// 3 snapshots or non-uniform spacing.
ResidualSeries identity_residuals(const Trajectory& traj, const CoeffModel& model);

struct MonotonicityReport {
    bool pass = true;
    double worst_excess = 0.0;  // max over intervals of (increase - tol), <= 0 on pass
    std::size_t worst_index = 0;
};

/// values[k+1] - values[k] <= 10 (h^2 + dt) |values[k]| for every k.
MonotonicityReport check_nonincreasing(const std::vector<double>& values, double h, double dt);

struct ConvexityReport {
    bool pass = true;
    double min_second_difference = 0.0;  // scaled by 1/Delta t^2
    double tolerance = 0.0;
};

/// Second time differences of int H(u) against -10 (h^2 + dt) * max |E''|.
ConvexityReport convexity_check(const Trajectory& traj);

}  // namespace entroflow
