#include "entroflow/keller_segel.hpp"

#include "entroflow/coeff_models.hpp"
#include "entroflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace entroflow {

bool KSParams::satisfies_estimate_hypotheses() const {
    return std::abs(p - q - 1.0) < 1e-12 && q > 0.5 && q <= 1.0;
}

void KSParams::require_estimate_hypotheses() const {
    std::ostringstream msg;
    if (std::abs(p - q - 1.0) >= 1e-12) {
        msg << "estimate monitors need p - q = 1, got p = " << p << ", q = " << q;
        throw HypothesisError(msg.str());
    }
    if (!(q > 0.5 && q <= 1.0)) {
        msg << "estimate monitors need q in (1/2,1], got q = " << q;
        throw HypothesisError(msg.str());
    }
}

KSState ks_initial_state(const Grid& grid, double mass, double amplitude) {
    if (grid.dim != 1) throw UsageError("Keller-Segel runs on 1D grids only");
    if (!(mass > 0.0)) throw UsageError("mass must be positive");
    if (!(std::abs(amplitude) < 1.0)) throw UsageError("amplitude must lie in (-1, 1)");
    Field u = sample(grid, [&](double x, double, double) { return 1.0 + amplitude * std::cos(std::numbers::pi * x); });
    const double norm = integrate(u);
    for (auto& v : u.values) v *= mass / norm;
    return KSState{std::move(u), Field(grid, mass), 0.0};
}

double ks_stable_dt(const KSState& state, const KSParams& params, double safety) {
    const double h = state.u.grid.spacing();
    double dmax = 1.0;
    for (double s : state.u.values) dmax = std::max(dmax, ks_diffusion(params.p, s));
    const Field dv = derivative(state.v, 0);
    double adv = 0.0;
    for (std::size_t k = 0; k < state.u.size(); ++k) {
        adv = std::max(adv, std::abs(ks_sensitivity(params.q, state.u[k]) * dv[k]));
    }
    const double diffusive = safety * h * h / (2.0 * dmax);
    const double advective = safety * h / (adv + 1e-300);
    return std::min(diffusive, advective);
}

KSState ks_step(const KSState& state, const KSParams& params, double dt) {
    const Field& u = state.u;
    const Field& v = state.v;
    const int n = u.grid.cells;
    const double h = u.grid.spacing();

    std::vector<double> flux(static_cast<std::size_t>(n - 1));
    for (int i = 0; i + 1 < n; ++i) {
        const double mid = 0.5 * (u[i] + u[i + 1]);
        flux[i] = (ks_diffusion(params.p, mid) * (u[i + 1] - u[i]) -
                   ks_sensitivity(params.q, mid) * (v[i + 1] - v[i])) / h;
    }
    const auto div = flux_divergence(flux, h);
    const Field vxx = second_derivative(v, 0);

    KSState next{Field(u.grid), Field(u.grid), state.time + dt};
    for (int i = 0; i < n; ++i) {
        next.u[i] = u[i] + dt * div[i];
        next.v[i] = v[i] + dt * (vxx[i] - v[i] + u[i]);
        if (!(next.u[i] > 0.0)) throw NumericalAbort("positivity loss in u at cell " + std::to_string(i), state.time);
        if (!(next.v[i] >= -1e-14)) throw NumericalAbort("negative v at cell " + std::to_string(i), state.time);
    }
    return next;
}

namespace {

double vt_square_integral(const KSState& s) {
    const Field vxx = second_derivative(s.v, 0);
    double sum = 0.0;
    for (std::size_t k = 0; k < s.u.size(); ++k) {
        const double vt = vxx[k] - s.v[k] + s.u[k];
        sum += vt * vt;
    }
    return sum * s.u.grid.spacing();
}

}  // namespace

KSTrajectory ks_run(const KSState& initial, const KSParams& params, const KSRunConfig& config) {
    if (config.grid.dim != 1 || initial.u.grid != config.grid) throw UsageError("initial state is not on the 1D run grid");
    if (!(config.t_end > 0.0)) throw UsageError("t_end must be positive");
    if (!(config.safety > 0.0 && config.safety <= 1.0)) throw UsageError("safety must lie in (0, 1]");
    if (config.record_every < 1) throw UsageError("record_every must be at least 1");
    if (initial.u.min() <= 0.0 || initial.v.min() < 0.0) throw DomainError("initial u must be positive and v nonnegative");

    const double dt_target = config.fixed_dt ? *config.fixed_dt : ks_stable_dt(initial, params, config.safety);
    long long steps = std::max<long long>(1, static_cast<long long>(std::ceil(config.t_end / dt_target - 1e-9)));
    steps = ((steps + config.record_every - 1) / config.record_every) * config.record_every;
    const double dt = config.t_end / static_cast<double>(steps);

    KSTrajectory traj;
    traj.grid = config.grid;
    traj.dt = dt;
    KSState state = initial;
    state.time = 0.0;
    double accum = 0.0;
    traj.times.push_back(0.0);
    traj.states.push_back(state);
    traj.vt_accum.push_back(0.0);

    for (long long k = 1; k <= steps; ++k) {
        try {
            if (dt > ks_stable_dt(state, params, 1.0)) {
                throw NumericalAbort("stability guard: dt exceeds the diffusive/advective limit", state.time);
            }
            const double vt2 = vt_square_integral(state);
            KSState next = ks_step(state, params, dt);
            accum += dt * vt2;
            next.time = static_cast<double>(k) * dt;
            state = std::move(next);
        } catch (const NumericalAbort& e) {
            traj.completed = false;
            traj.termination = e.reason();
            traj.last_safe_time = state.time;
            return traj;
        }
        if (state.u.max() > config.ceiling) {
            traj.completed = false;
            traj.termination = "ceiling exceeded: sup u > " + std::to_string(config.ceiling);
            traj.last_safe_time = state.time;
            traj.times.push_back(state.time);
            traj.states.push_back(state);
            traj.vt_accum.push_back(accum);
            return traj;
        }
        if (k % config.record_every == 0) {
            traj.times.push_back(state.time);
            traj.states.push_back(state);
            traj.vt_accum.push_back(accum);
        }
    }
    traj.last_safe_time = state.time;
    return traj;
}

// ---------------------------------------------------------------------------
// Per-state discrete quantities shared by every functional.

namespace {

struct Pointwise {
    Field du, dv, vxx, vt;
    std::vector<double> D, S, S2;  // D(u), S(u), S''(u)
    Field ratio_flux;              // D/S d_x u (odd)
    Field d_ratio_flux;            // d_x of the above
};

Pointwise pointwise(const KSState& st, const KSParams& params) {
    const Field& u = st.u;
    if (u.grid.dim != 1) throw UsageError("Keller-Segel functionals are 1D");
    if (u.min() <= 0.0) throw DomainError("Keller-Segel functionals need u > 0");
    Pointwise pw;
    pw.du = derivative(u, 0, Parity::Even);
    pw.dv = derivative(st.v, 0, Parity::Even);
    pw.vxx = second_derivative(st.v, 0);
    pw.vt = Field(u.grid);
    pw.ratio_flux = Field(u.grid);
    const std::size_t n = u.size();
    pw.D.resize(n);
    pw.S.resize(n);
    pw.S2.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        pw.D[k] = ks_diffusion(params.p, u[k]);
        pw.S[k] = ks_sensitivity(params.q, u[k]);
        pw.S2[k] = ks_sensitivity_d2(params.q, u[k]);
        pw.vt[k] = pw.vxx[k] - st.v[k] + u[k];
        pw.ratio_flux[k] = pw.D[k] / pw.S[k] * pw.du[k];
    }
    pw.d_ratio_flux = derivative(pw.ratio_flux, 0, Parity::Odd);
    return pw;
}

template <class Fn>
double integrate_cells(const Grid& grid, Fn&& fn) {
    double sum = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) sum += fn(k);
    return sum * grid.spacing();
}

std::vector<double> interval_residual(const std::vector<double>& times, const std::vector<double>& functional,
                                      const std::vector<double>& rate) {
    if (times.size() < 2) throw UsageError("residuals need at least 2 snapshots");
    const double step = times[1] - times[0];
    std::vector<double> out;
    for (std::size_t k = 0; k + 1 < times.size(); ++k) {
        const double interval = times[k + 1] - times[k];
        if (std::abs(interval - step) > 1e-9 * step) throw UsageError("snapshot spacing is not uniform");
        out.push_back((functional[k + 1] - functional[k]) / interval + 0.5 * (rate[k] + rate[k + 1]));
    }
    return out;
}

}  // namespace

double classical_lyapunov(const KSState& st, const KSParams& params) {
    const Field& u = st.u;
    const Field dv = derivative(st.v, 0);
    if (u.min() <= 0.0) throw DomainError("Lyapunov functional needs u > 0");
    return integrate_cells(u.grid, [&](std::size_t k) {
        return ks_double_primitive(params.p, params.q, u[k]) - u[k] * st.v[k] +
               0.5 * (st.v[k] * st.v[k] + dv[k] * dv[k]);
    });
}

double classical_lyapunov_dissipation(const KSState& st, const KSParams& params) {
    const Pointwise pw = pointwise(st, params);
    return integrate_cells(st.u.grid, [&](std::size_t k) {
        const double drift = pw.ratio_flux[k] - pw.dv[k];
        return pw.vt[k] * pw.vt[k] + pw.S[k] * drift * drift;
    });
}

FAndD functional_F_and_D(const KSState& st, const KSParams& params) {
    if (params.strict) params.require_estimate_hypotheses();
    const Pointwise pw = pointwise(st, params);
    const Field& u = st.u;
    FAndD out;
    out.F = integrate_cells(u.grid, [&](std::size_t k) {
        return 0.5 * pw.D[k] * pw.D[k] / pw.S[k] * pw.du[k] * pw.du[k] - ks_psi(params.p, params.q, u[k]);
    });
    out.D = integrate_cells(u.grid, [&](std::size_t k) {
        const double w = pw.d_ratio_flux[k] - pw.vxx[k] + 0.5 * (st.v[k] + pw.vt[k]);
        return pw.S[k] * pw.D[k] * w * w;
    });
    return out;
}

double entropy_production_source(const KSState& st, const KSParams& params) {
    const Pointwise pw = pointwise(st, params);
    return integrate_cells(st.u.grid, [&](std::size_t k) {
        const double shift = st.v[k] + pw.vt[k];
        const double quarter = pw.S[k] * pw.D[k] * shift * shift / 4.0;
        const double g = pw.du[k];
        const double curvature = (pw.ratio_flux[k] - pw.dv[k]) * pw.D[k] * pw.D[k] * pw.S2[k] / (2.0 * pw.S[k]) * g * g * g;
        return quarter + curvature;
    });
}

std::vector<double> lyapunov_identity_residual(const KSTrajectory& traj, const KSParams& params) {
    std::vector<double> value, rate;
    for (const auto& st : traj.states) {
        value.push_back(classical_lyapunov(st, params));
        rate.push_back(classical_lyapunov_dissipation(st, params));
    }
    return interval_residual(traj.times, value, rate);
}

std::vector<double> entropy_production_residual(const KSTrajectory& traj, const KSParams& params) {
    std::vector<double> value, rate;
    for (const auto& st : traj.states) {
        const FAndD fd = functional_F_and_D(st, params);
        value.push_back(fd.F);
        rate.push_back(fd.D - entropy_production_source(st, params));
    }
    return interval_residual(traj.times, value, rate);
}

S1Residuals s1_functional_identity(const KSTrajectory& traj, const KSParams& params) {
    if (params.q != 0.0) throw UsageError("the S(u) = u identities need q = 0");
    std::vector<double> fisher, fisher_rate, big_f, big_f_rate;
    for (const auto& st : traj.states) {
        const Pointwise pw = pointwise(st, params);
        const Field& u = st.u;
        const double phi = integrate_cells(u.grid, [&](std::size_t k) {
            return 0.5 * pw.D[k] * pw.D[k] / u[k] * pw.du[k] * pw.du[k];
        });
        const double fisher_identity_rate = integrate_cells(u.grid, [&](std::size_t k) {
            const double z = pw.d_ratio_flux[k];
            return u[k] * pw.D[k] * z * z - u[k] * pw.D[k] * pw.vxx[k] * z;
        });
        // int u int_1^u D(s) ds
        const double potential = integrate_cells(u.grid, [&](std::size_t k) {
            const double p = params.p;
            const double inner = std::abs(p - 1.0) < 1e-12
                                     ? std::log((1.0 + u[k]) / 2.0)
                                     : (std::pow(1.0 + u[k], 1.0 - p) - std::pow(2.0, 1.0 - p)) / (1.0 - p);
            return u[k] * inner;
        });
        const double fg_identity_rate = integrate_cells(u.grid, [&](std::size_t k) {
            const double shift = st.v[k] + pw.vt[k];
            const double w = pw.d_ratio_flux[k] - pw.vxx[k] + 0.5 * shift;
            return u[k] * pw.D[k] * w * w - u[k] * pw.D[k] * shift * shift / 4.0;
        });
        fisher.push_back(phi);
        fisher_rate.push_back(fisher_identity_rate);
        big_f.push_back(phi - potential);
        big_f_rate.push_back(fg_identity_rate);
    }
    return S1Residuals{interval_residual(traj.times, fisher, fisher_rate),
                       interval_residual(traj.times, big_f, big_f_rate)};
}

std::vector<KSMonitor> apriori_monitor(const KSTrajectory& traj, const KSParams& params, double ceiling) {
    if (params.strict) params.require_estimate_hypotheses();
    std::vector<KSMonitor> out;
    const double p = params.p;
    for (std::size_t s = 0; s < traj.states.size(); ++s) {
        const KSState& st = traj.states[s];
        const Field& u = st.u;
        const Pointwise pw = pointwise(st, params);
        KSMonitor m;
        m.time = traj.times[s];
        m.mass = integrate(u);
        m.lyap_classical = classical_lyapunov(st, params);
        const FAndD fd = functional_F_and_D(st, params);
        m.lyap_F = fd.F;
        m.dissipation_D = fd.D;
        m.ep_estimate = integrate_cells(u.grid, [&](std::size_t k) {
            return pw.du[k] * pw.du[k] / (u[k] * std::pow(1.0 + u[k], p + 1.0));
        });
        m.lp_norm = integrate_cells(u.grid, [&](std::size_t k) { return std::pow(u[k], p); });
        m.l2_norm_sq = integrate_cells(u.grid, [&](std::size_t k) { return u[k] * u[k]; });
        m.u_max = u.max();
        m.log_bound = std::log1p(m.u_max);
        m.vt_accum = s < traj.vt_accum.size() ? traj.vt_accum[s] : 0.0;
        auto lr = [&](const Field& f, double r) {
            return std::pow(integrate_cells(u.grid, [&](std::size_t k) { return std::pow(std::abs(f[k]), r); }), 1.0 / r);
        };
        m.v_l2 = lr(st.v, 2.0);
        m.v_l4 = lr(st.v, 4.0);
        m.vx_l2 = lr(pw.dv, 2.0);
        m.vx_l4 = lr(pw.dv, 4.0);
        m.over_ceiling = m.u_max > ceiling;
        out.push_back(m);
    }
    return out;
}

LpInequalityReport lp_inequality_check(const KSTrajectory& traj, const KSParams& params) {
    if (traj.states.size() < 2) throw UsageError("need at least 2 snapshots");
    const double p = params.p;
    const double c = p * (p - 1.0);
    std::vector<double> lp, grad, u2, vt2;
    for (const auto& st : traj.states) {
        const Pointwise pw = pointwise(st, params);
        const Field& u = st.u;
        lp.push_back(integrate_cells(u.grid, [&](std::size_t k) { return std::pow(u[k], p); }));
        grad.push_back(integrate_cells(u.grid, [&](std::size_t k) {
            return std::pow(u[k], p - 2.0) * std::pow(1.0 + u[k], -p) * pw.du[k] * pw.du[k];
        }));
        u2.push_back(integrate_cells(u.grid, [&](std::size_t k) { return u[k] * u[k]; }));
        vt2.push_back(integrate_cells(u.grid, [&](std::size_t k) { return pw.vt[k] * pw.vt[k]; }));
    }
    const double h = traj.grid.spacing();
    LpInequalityReport report;
    for (std::size_t k = 0; k + 1 < lp.size(); ++k) {
        const double interval = traj.times[k + 1] - traj.times[k];
        const double rate = (lp[k + 1] - lp[k]) / interval;
        const double dissip = c * 0.5 * (grad[k] + grad[k + 1]);
        const double rhs = 1.5 * c * 0.5 * (u2[k] + u2[k + 1]) + 0.5 * c * 0.5 * (vt2[k] + vt2[k + 1]);
        const double tol = 10.0 * (h * h + traj.dt) * (std::abs(rate) + std::abs(dissip) + std::abs(rhs));
        const double slack = rhs + tol - (rate + dissip);
        report.slack.push_back(slack);
        if (slack < 0.0) report.pass = false;
    }
    return report;
}

namespace {

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace

std::vector<KSConvergenceRow> ks_residual_convergence(const KSParams& params, double mass,
                                                      const std::vector<int>& cells, double t_end,
                                                      double dt_coeff, int record_every, double amplitude) {
    std::vector<KSConvergenceRow> rows;
    KSParams loose = params;
    loose.strict = false;
    for (int n : cells) {
        const Grid grid(1, n);
        const double h = grid.spacing();
        KSRunConfig cfg;
        cfg.grid = grid;
        cfg.fixed_dt = dt_coeff * h * h;
        // t_end snapped to a whole number of snapshot intervals at this level
        const double interval = *cfg.fixed_dt * record_every;
        cfg.t_end = std::max(1.0, std::round(t_end / interval)) * interval;
        cfg.record_every = record_every;
        const KSTrajectory traj = ks_run(ks_initial_state(grid, mass, amplitude), loose, cfg);
        if (!traj.completed) throw NumericalAbort("convergence run aborted: " + traj.termination, traj.last_safe_time);
        KSConvergenceRow row;
        row.cells = n;
        row.h = h;
        row.dt = traj.dt;
        row.lyapunov = max_abs(lyapunov_identity_residual(traj, loose));
        row.entropy = max_abs(entropy_production_residual(traj, loose));
        if (params.q == 0.0) {
            const S1Residuals s1 = s1_functional_identity(traj, loose);
            row.fisher_identity = max_abs(s1.fisher_identity);
            row.fg_identity = max_abs(s1.fg_identity);
        }
        rows.push_back(row);
    }
    return rows;
}

std::vector<double> observed_orders(const std::vector<double>& maxima) {
    std::vector<double> out;
    for (std::size_t k = 0; k + 1 < maxima.size(); ++k) out.push_back(std::log2(maxima[k] / maxima[k + 1]));
    return out;
}

}  // namespace entroflow
