#include "entroflow/quadrature.hpp"

#include "entroflow/errors.hpp"

#include <cmath>
#include <limits>

namespace entroflow {

namespace {

struct SimpsonState {
    const std::function<double(double)>& f;
    int max_depth;
    double roundoff_floor;  // below this a subinterval cannot improve further
    double missed = 0.0;    // error estimate accumulated on unconverged leaves
    bool converged = true;
};

double recurse(SimpsonState& st, double a, double fa, double b, double fb, double m, double fm,
               double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = st.f(lm);
    const double frm = st.f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;

    if (std::abs(delta) <= 15.0 * tol || std::abs(delta) <= st.roundoff_floor) {
        return left + right + delta / 15.0;
    }
    if (depth >= st.max_depth || lm == a || rm == b) {
        st.converged = false;
        st.missed += std::abs(delta) / 15.0;
        return left + right + delta / 15.0;
    }
    return recurse(st, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth + 1) +
           recurse(st, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth + 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double lo, double hi,
                        const QuadratureOptions& opts) {
    if (lo == hi) return 0.0;
    const double a = std::min(lo, hi);
    const double b = std::max(lo, hi);
    const double m = 0.5 * (a + b);
    const double fa = f(a), fb = f(b), fm = f(m);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);

    // Scale for the round-off floor: the five-point estimate bounds the
    // magnitude of the integrand mass well enough for this purpose.
    const double scale = (b - a) * (std::abs(fa) + 4.0 * std::abs(fm) + std::abs(fb)) / 6.0;
    SimpsonState st{f, opts.max_depth, 64.0 * std::numeric_limits<double>::epsilon() * scale};

    const double value = recurse(st, a, fa, b, fb, m, fm, whole, opts.abs_tol, 0);
    if (!std::isfinite(value)) {
        throw PrecisionError("adaptive Simpson produced a non-finite value", INFINITY);
    }
    if (!st.converged && st.missed > opts.abs_tol) {
        throw PrecisionError("adaptive Simpson did not converge", st.missed);
    }
    return lo < hi ? value : -value;
}

}  // namespace entroflow
