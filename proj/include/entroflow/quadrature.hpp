#pragma once

#include <functional>

namespace entroflow {

struct QuadratureOptions {
    double abs_tol = 1e-12;
    int max_depth = 40;
};

/// Adaptive Simpson integration of f over [lo, hi] (hi < lo gives the signed integral).
///
/// Throws PrecisionError carrying the accumulated error estimate when some
/// subinterval still misses its local tolerance at max_depth.
double adaptive_simpson(const std::function<double(double)>& f, double lo, double hi,
                        const QuadratureOptions& opts = {});

}  // namespace entroflow
