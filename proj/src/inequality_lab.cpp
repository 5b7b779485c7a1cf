#include "entroflow/inequality_lab.hpp"

#include "entroflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <thread>

namespace entroflow {

double bernis_constant(int n) {
    const double c = 1.0 + std::sqrt(static_cast<double>(n));
    return c * c;
}

double fisher_constant(int n, double lambda) {
    if (!(lambda > 0.0)) throw HypothesisError("lambda must be positive");
    return (4.0 + bernis_constant(n)) / (2.0 * lambda);
}

double default_ineq_tolerance(const Grid& grid) { return 50.0 * grid.spacing() * grid.spacing(); }

namespace {

void require_positive_field(const Field& f) {
    if (f.min() <= 0.0) throw DomainError("inequality checks need a positive field");
}

// int weight(f) * |grad(w)|_F^2 with w_j = coeff(f) d_j f.
double matrix_field_integral(const Field& f, const std::vector<Field>& grad,
                             const std::function<double(double)>& coeff,
                             const std::function<double(double)>& weight) {
    const int n = f.grid.dim;
    Field integrand(f.grid, 0.0);
    for (int j = 0; j < n; ++j) {
        Field w(f.grid);
        for (std::size_t k = 0; k < f.size(); ++k) w[k] = coeff(f[k]) * grad[j][k];
        for (int i = 0; i < n; ++i) {
            const Field dw = derivative(w, i, i == j ? Parity::Odd : Parity::Even);
            for (std::size_t k = 0; k < f.size(); ++k) integrand[k] += dw[k] * dw[k];
        }
    }
    for (std::size_t k = 0; k < f.size(); ++k) integrand[k] *= weight(f[k]);
    return integrate(integrand);
}

// int |D^2 phi(f)|_F^2 by the chain rule phi'' grad f grad f^T + phi' D^2 f.
double composed_hessian_integral(const Field& f, const std::vector<Field>& grad,
                                 const std::vector<std::vector<Field>>& hess,
                                 const std::function<double(double)>& d1, const std::function<double(double)>& d2) {
    const int n = f.grid.dim;
    Field integrand(f.grid, 0.0);
    for (std::size_t k = 0; k < f.size(); ++k) {
        const double p1 = d1(f[k]), p2 = d2(f[k]);
        double sum = 0.0;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                const double entry = p2 * grad[i][k] * grad[j][k] + p1 * hess[i][j][k];
                sum += entry * entry;
            }
        }
        integrand[k] = sum;
    }
    return integrate(integrand);
}

IneqReport make_report(double lhs, double rhs, double constant, double tol) {
    IneqReport r;
    r.lhs = lhs;
    r.rhs_integral = rhs;
    r.constant = constant;
    if (rhs > 0.0) r.ratio = lhs / rhs;
    else r.ratio = lhs > 0.0 ? INFINITY : 0.0;
    r.pass = lhs <= constant * rhs * (1.0 + tol);
    return r;
}

}  // namespace

double fisher_dissipation_integral(const Field& f, const CoeffModel& model) {
    require_positive_field(f);
    const auto grad = neumann_gradient(f);
    return matrix_field_integral(
        f, grad, [&](double s) { return model.a(s) / s; }, [&](double s) { return s * model.a(s); });
}

IneqReport bernis_check(const Field& f, const CoeffModel& model, double tol) {
    require_positive_field(f);
    require_neumann_compatible(f);
    const auto grad = neumann_gradient(f);
    Field integrand(f.grid);
    for (std::size_t k = 0; k < f.size(); ++k) {
        double g2 = 0.0;
        for (const auto& g : grad) g2 += g[k] * g[k];
        const double ratio = model.a(f[k]) / f[k];
        integrand[k] = ratio * ratio * ratio * g2 * g2;
    }
    const double lhs = integrate(integrand);
    const double rhs = matrix_field_integral(
        f, grad, [&](double s) { return model.a(s) / s; }, [&](double s) { return s * model.a(s); });
    return make_report(lhs, rhs, bernis_constant(f.grid.dim), tol);
}

double lambda_on_range(const Field& f, const CoeffModel& model) {
    double lambda = INFINITY;
    for (double v : f.values) lambda = std::min(lambda, model.a(v));
    const double lo = f.min(), hi = f.max();
    for (int k = 0; k <= 64; ++k) {
        const double s = lo * std::pow(hi / lo, k / 64.0);
        lambda = std::min(lambda, model.a(std::clamp(s, lo, hi)));
    }
    return lambda;
}

IneqReport fisher_ineq_check(const Field& f, const CoeffModel& model, double lambda, double tol) {
    require_positive_field(f);
    require_neumann_compatible(f);
    const double available = lambda_on_range(f, model);
    if (available < lambda * (1.0 - 1e-12)) {
        std::ostringstream msg;
        msg << "a drops to " << available << " < lambda = " << lambda << " on the field range";
        throw HypothesisError(msg.str());
    }
    const auto grad = neumann_gradient(f);
    const auto hess = neumann_hessian(f);
    const double lhs = composed_hessian_integral(
        f, grad, hess, [&](double s) { return model.a(s) / std::sqrt(s); },
        [&](double s) { return model.da(s) / std::sqrt(s) - model.a(s) / (2.0 * s * std::sqrt(s)); });
    const double rhs = matrix_field_integral(
        f, grad, [&](double s) { return model.a(s) / s; }, [&](double s) { return s * model.a(s); });
    return make_report(lhs, rhs, fisher_constant(f.grid.dim, lambda), tol);
}

double cmkm_ratio(const Field& f) {
    require_positive_field(f);
    const auto grad = neumann_gradient(f);
    const auto hess = neumann_hessian(f);
    const double num = composed_hessian_integral(
        f, grad, hess, [](double s) { return 0.5 / std::sqrt(s); },
        [](double s) { return -0.25 / (s * std::sqrt(s)); });
    const double den = matrix_field_integral(
        f, grad, [](double s) { return 1.0 / s; }, [](double s) { return s; });
    if (den > 0.0) return num / den;
    return num > 0.0 ? INFINITY : 0.0;
}

TestFunctionSpec sample_test_function(int n, std::uint64_t seed, std::size_t trial) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32),
                      static_cast<std::uint32_t>(n)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> mode_count(1, 4);

    TestFunctionSpec spec;
    spec.offset = 1.0 + 4.0 * unit(rng);
    std::vector<int> modes(static_cast<std::size_t>(n));
    int total = 0;
    for (auto& m : modes) total += (m = mode_count(rng));
    const double bound = 0.9 * spec.offset / total;
    for (int m : modes) {
        std::vector<double> coeffs(static_cast<std::size_t>(m));
        for (auto& c : coeffs) c = bound * (2.0 * unit(rng) - 1.0);
        spec.cosine_coeffs.push_back(std::move(coeffs));
    }
    return spec;
}

WorstRatioSummary worst_ratio_search(int n, const CoeffModel& model, std::size_t trials, std::uint64_t seed,
                                     int cells, unsigned workers) {
    if (trials < 1) throw UsageError("worst_ratio_search needs at least one trial");
    const Grid grid(n, cells);
    const double tol = default_ineq_tolerance(grid);

    WorstRatioSummary summary;
    summary.n = n;
    summary.cells = cells;
    summary.seed = seed;
    summary.trials = trials;
    summary.tol = tol;
    summary.results.resize(trials);

    auto run_trial = [&](std::size_t t) {
        TrialResult r;
        r.trial = t;
        r.spec = sample_test_function(n, seed, t);
        const Field f = build_test_function(grid, r.spec);
        r.lambda = lambda_on_range(f, model);
        r.bernis = bernis_check(f, model, tol);
        r.fisher = fisher_ineq_check(f, model, r.lambda, tol);
        r.cmkm = cmkm_ratio(f);
        summary.results[t] = std::move(r);
    };

    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, trials));
    if (workers <= 1) {
        for (std::size_t t = 0; t < trials; ++t) run_trial(t);
    } else {
        std::vector<std::exception_ptr> errors(workers);
        {
            std::vector<std::jthread> pool;
            for (unsigned w = 0; w < workers; ++w) {
                pool.emplace_back([&, w] {
                    try {
                        for (std::size_t t = w; t < trials; t += workers) run_trial(t);
                    } catch (...) {
                        errors[w] = std::current_exception();
                    }
                });
            }
        }
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    summary.max_bernis_ratio = -INFINITY;
    summary.max_fisher_ratio = -INFINITY;
    summary.max_fisher_normalized = -INFINITY;
    summary.max_cmkm_ratio = -INFINITY;
    for (const auto& r : summary.results) {
        if (r.bernis.ratio > summary.max_bernis_ratio) {
            summary.max_bernis_ratio = r.bernis.ratio;
            summary.argmax_bernis = r.spec;
        }
        if (r.fisher.ratio > summary.max_fisher_ratio) {
            summary.max_fisher_ratio = r.fisher.ratio;
            summary.argmax_fisher = r.spec;
        }
        summary.max_fisher_normalized = std::max(summary.max_fisher_normalized, r.fisher.ratio / r.fisher.constant);
        if (r.cmkm > summary.max_cmkm_ratio) {
            summary.max_cmkm_ratio = r.cmkm;
            summary.argmax_cmkm = r.spec;
        }
        summary.all_pass = summary.all_pass && r.bernis.pass && r.fisher.pass;
    }
    return summary;
}

std::string describe(const TestFunctionSpec& spec) {
    std::ostringstream out;
    out.precision(6);
    out << "c0=" << spec.offset;
    for (std::size_t a = 0; a < spec.cosine_coeffs.size(); ++a) {
        out << " axis" << a << "=[";
        for (std::size_t k = 0; k < spec.cosine_coeffs[a].size(); ++k) out << (k ? "," : "") << spec.cosine_coeffs[a][k];
        out << "]";
    }
    return out.str();
}

}  // namespace entroflow
