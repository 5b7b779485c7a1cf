#pragma once

// Explicit conservative scheme for u_t = d_x(a(u) d_x u) on (0,1) with zero flux.

#include "entroflow/coeff_models.hpp"
#include "entroflow/trajectory.hpp"

#include <optional>

namespace entroflow {

struct FlowConfig {
    CoeffModel model = CoeffModel::linear();
    Grid grid;
    double t_end = 0.1;
    double safety = 0.4;
    double positivity_floor = 1e-8;
    int record_every = 1;
    /// Overrides the step chosen from stable_dt(u0). Must still be stable.
    std::optional<double> fixed_dt;

    void validate() const;
};

/// safety * h^2 / (2 max_cells a(u)).
double stable_dt(const Field& u, const CoeffModel& model, double safety);

/// One explicit Euler step in flux form; face coefficient a((u_i + u_{i+1})/2).
/// Throws NumericalAbort if any updated cell drops below `floor`.
Field step(const Field& u, const CoeffModel& model, double dt, double floor = 1e-8);

/// Runs to t_end with a uniform step. The step count is rounded up to a
/// multiple of record_every so that snapshots are equally spaced; snapshots
/// include the initial and final states. A per-step stability guard
/// (dt <= stable_dt(u, model, 1)) aborts with NumericalAbort.
Trajectory run(const Field& u0, const FlowConfig& config);

/// 1 + amplitude cos(pi x) on a 1D grid.
Field cosine_bump(const Grid& grid, double amplitude = 0.5);

}  // namespace entroflow
