#pragma once

#include "entroflow/field_calculus.hpp"

#include <vector>

namespace entroflow {

/// Functionals of one snapshot of a diffusion run.
struct MeterRecord {
    double entropy = 0.0;       // int H(u)
    double fisher_sigma = 0.0;  // int |d_x Sigma(u)|^2
    double fisher_st = 0.0;     // int u |d_x Lambda(u)|^2
    double dissipation = 0.0;   // int u a(u) |d_x(u^-1/2 d_x Sigma(u))|^2
};

/// Time-ordered snapshots of a 1D run. `dt` is the (uniform) step size used.
struct Trajectory {
    Grid grid;
    double dt = 0.0;
    std::vector<double> times;
    std::vector<Field> fields;
    std::vector<MeterRecord> meters;  // empty until attach_meters

    std::size_t size() const noexcept { return times.size(); }
};

}  // namespace entroflow
