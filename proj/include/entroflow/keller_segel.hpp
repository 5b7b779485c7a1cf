#pragma once

// 1D quasilinear Keller-Segel system on (0,1) with zero-flux data
//
//   u_t = d_x(D(u) d_x u - S(u) d_x v),   v_t = d_xx v - v + u,
//   D(u) = (1+u)^-p,  S(u) = u (1+u)^-q,
//
// an explicit conservative scheme for it, and residual/monitor machinery for
// the classical Lyapunov identity, the Fisher-type entropy production
// identity and the a-priori estimates behind global existence at (p,q)=(2,1).
// v_t is always taken from the equation (d_xx v - v + u), never from time
// differences.

#include "entroflow/field_calculus.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace entroflow {

struct KSParams {
    double p = 2.0;
    double q = 1.0;
    /// Reject estimate monitors outside p - q = 1, q in (1/2, 1].
    bool strict = false;

    bool satisfies_estimate_hypotheses() const;
    /// Throws HypothesisError naming the violated condition.
    void require_estimate_hypotheses() const;
};

struct KSState {
    Field u;
    Field v;
    double time = 0.0;
};

struct KSRunConfig {
    Grid grid;
    double t_end = 1.0;
    double safety = 0.4;
    int record_every = 1;
    std::optional<double> fixed_dt;
    /// sup u above this is reported as blow-up suspicion.
    double ceiling = 1e6;
};

struct KSTrajectory {
    Grid grid;
    double dt = 0.0;
    std::vector<double> times;
    std::vector<KSState> states;
    std::vector<double> vt_accum;  // int_0^t int |v_t|^2 at each snapshot
    bool completed = true;
    std::string termination = "completed";
    double last_safe_time = 0.0;

    std::size_t size() const noexcept { return times.size(); }
};

/// u0 = M (1 + amplitude cos(pi x)) normalised to discrete mass M, v0 = M.
KSState ks_initial_state(const Grid& grid, double mass, double amplitude = 0.5);

/// min(safety h^2 / (2 max(max D(u), 1)), safety h / (max |S(u) d_x v| + tiny)).
double ks_stable_dt(const KSState& state, const KSParams& params, double safety);

/// One explicit step: face flux D(u_f) du/h - S(u_f) dv/h at the arithmetic
/// mean state u_f, zero flux at the domain faces; Euler for v with mirror
/// ghosts. Throws NumericalAbort on u <= 0 or v < -1e-14.
KSState ks_step(const KSState& state, const KSParams& params, double dt);

/// Uniform steps to t_end (count rounded up to a multiple of record_every).
/// Aborts are recorded in the returned trajectory, not thrown.
KSTrajectory ks_run(const KSState& initial, const KSParams& params, const KSRunConfig& config);

/// int G(u) - int u v + 1/2 int (v^2 + |d_x v|^2).
double classical_lyapunov(const KSState& state, const KSParams& params);

/// int |v_t|^2 + int S(u) |D/S d_x u - d_x v|^2.
double classical_lyapunov_dissipation(const KSState& state, const KSParams& params);

struct FAndD {
    double F = 0.0;
    double D = 0.0;
};

/// F = 1/2 int D^2/S |d_x u|^2 - int Psi(u),
/// D = int S D |d_x(D/S d_x u) - d_xx v + (v + v_t)/2|^2.
FAndD functional_F_and_D(const KSState& state, const KSParams& params);

/// Right-hand side of the entropy production identity:
/// int S D (v + v_t)^2 / 4 + int (D/S d_x u - d_x v) D^2 S''/(2S) (d_x u)^3.
double entropy_production_source(const KSState& state, const KSParams& params);

/// d/dt L + dissipation, per snapshot interval.
std::vector<double> lyapunov_identity_residual(const KSTrajectory& traj, const KSParams& params);

/// d/dt F + D - source, per snapshot interval.
std::vector<double> entropy_production_residual(const KSTrajectory& traj, const KSParams& params);

struct S1Residuals {
    std::vector<double> fisher_identity;   // Fisher-type identity with S(u) = u
    std::vector<double> fg_identity;  // d/dt F + G = int u D (v + v_t)^2 / 4
};

/// Requires q = 0, i.e. S(u) = u.
S1Residuals s1_functional_identity(const KSTrajectory& traj, const KSParams& params);

struct KSMonitor {
    double time = 0.0;
    double mass = 0.0;
    double lyap_classical = 0.0;
    double lyap_F = 0.0;
    double dissipation_D = 0.0;
    double ep_estimate = 0.0;  // int |d_x u|^2 / (u (1+u)^(p+1))
    double lp_norm = 0.0;      // int u^p
    double l2_norm_sq = 0.0;   // int u^2
    double log_bound = 0.0;    // ||log(1+u)||_inf
    double vt_accum = 0.0;
    double v_l2 = 0.0, v_l4 = 0.0, vx_l2 = 0.0, vx_l4 = 0.0;
    double u_max = 0.0;
    bool over_ceiling = false;
};

/// Throws HypothesisError in strict mode when the estimate hypotheses fail.
std::vector<KSMonitor> apriori_monitor(const KSTrajectory& traj, const KSParams& params, double ceiling = 1e6);

struct LpInequalityReport {
    std::vector<double> slack;  // rhs + tol - lhs per interval, >= 0 on pass
    bool pass = true;
};

/// Discrete check of
///   d/dt int u^p + p(p-1) int u^(p-2)(1+u)^-p |d_x u|^2
///     <= 3p(p-1)/2 int u^2 + p(p-1)/2 int |v_t|^2
/// per interval, tolerance 10 (h^2 + dt) times the magnitude of the terms.
LpInequalityReport lp_inequality_check(const KSTrajectory& traj, const KSParams& params);

struct KSConvergenceRow {
    int cells = 0;
    double h = 0.0;
    double dt = 0.0;
    double lyapunov = 0.0;  // max |residual| of the classical Lyapunov identity
    double entropy = 0.0;   // max |residual| of the entropy production identity
    double fisher_identity = NAN;     // q = 0 only
    double fg_identity = NAN;    // q = 0 only
};

/// Runs the same initial data on each grid with dt = dt_coeff h^2 and a fixed
/// number of steps per snapshot, so the snapshot interval also scales with h^2,
/// and reports the maximal identity residuals per level.
std::vector<KSConvergenceRow> ks_residual_convergence(const KSParams& params, double mass,
                                                      const std::vector<int>& cells, double t_end,
                                                      double dt_coeff = 0.1, int record_every = 4,
                                                      double amplitude = 0.5);

/// log2(coarse / fine) of consecutive rows for the selected column.
std::vector<double> observed_orders(const std::vector<double>& maxima);

}  // namespace entroflow
