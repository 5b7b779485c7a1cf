#pragma once

// Discrete checks of the nonlinear Bernis-type inequality
//
//   int a(f)^3/f^3 |grad f|^4  <=  (1 + sqrt n)^2  int f a(f) |grad(f^-1/2 grad Sigma(f))|^2
//
// and of the Hessian bound
//
//   int |D^2 Sigma(f)|^2  <=  (4 + (1 + sqrt n)^2) / (2 lambda)  * (same right-hand integral)
//
// for positive Neumann cosine fields on the unit box. The matrix field
// grad(f^-1/2 grad Sigma(f)) has one canonical discretization shared by every
// check: the vector field w_j = (a(f)/f) d_j f is differenced componentwise,
// odd along axis j and even across it.

#include "entroflow/coeff_models.hpp"
#include "entroflow/field_calculus.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace entroflow {

struct IneqReport {
    double lhs = 0.0;
    double rhs_integral = 0.0;
    double constant = 0.0;
    double ratio = 0.0;  // lhs / rhs_integral, 0 when both vanish
    bool pass = true;    // lhs <= constant * rhs_integral * (1 + tol)
};

double bernis_constant(int n);
double fisher_constant(int n, double lambda);

/// int f a(f) |grad(f^-1/2 grad Sigma(f))|^2_F (sum of squares, so >= 0 exactly).
double fisher_dissipation_integral(const Field& f, const CoeffModel& model);

IneqReport bernis_check(const Field& f, const CoeffModel& model, double tol);

/// Throws HypothesisError when a < lambda somewhere on [min f, max f].
IneqReport fisher_ineq_check(const Field& f, const CoeffModel& model, double lambda, double tol);

/// int |D^2 sqrt f|^2 / int f |D^2 log f|^2, the denominator taken through the
/// canonical matrix field with a = 1. Returns 0 when both integrals vanish.
double cmkm_ratio(const Field& f);

/// Minimum of a over the field values and a log-spaced probe of [min f, max f].
double lambda_on_range(const Field& f, const CoeffModel& model);

/// 50 h^2.
double default_ineq_tolerance(const Grid& grid);

struct TrialResult {
    std::size_t trial = 0;
    TestFunctionSpec spec;
    double lambda = 0.0;
    IneqReport bernis;
    IneqReport fisher;
    double cmkm = 0.0;
};

struct WorstRatioSummary {
    int n = 1;
    int cells = 64;
    std::uint64_t seed = 0;
    std::size_t trials = 0;
    double tol = 0.0;
    double max_bernis_ratio = 0.0;
    double max_fisher_ratio = 0.0;
    double max_fisher_normalized = 0.0;  // max of ratio / constant
    double max_cmkm_ratio = 0.0;
    TestFunctionSpec argmax_bernis;
    TestFunctionSpec argmax_fisher;
    TestFunctionSpec argmax_cmkm;
    bool all_pass = true;
    std::vector<TrialResult> results;  // ordered by trial index
};

/// Deterministic spec for one trial: c0 in [1,5], 1..4 modes per axis and
/// |a_k| <= 0.9 c0 / (total modes). Depends only on (seed, trial, n).
TestFunctionSpec sample_test_function(int n, std::uint64_t seed, std::size_t trial);

/// Runs both inequality checks and the cmkm ratio on `trials` sampled fields.
/// Trials are spread over `workers` threads; results are merged by trial index,
/// so the summary does not depend on the worker count.
WorstRatioSummary worst_ratio_search(int n, const CoeffModel& model, std::size_t trials, std::uint64_t seed,
                                     int cells = 64, unsigned workers = 0);

std::string describe(const TestFunctionSpec& spec);

}  // namespace entroflow
