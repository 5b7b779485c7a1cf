#include "entroflow/coeff_models.hpp"

#include "entroflow/errors.hpp"
#include "entroflow/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace entroflow {

struct CustomTable {
    std::vector<double> s;
    std::vector<double> a;
    std::vector<double> da;

    std::size_t interval(double x) const {
        auto it = std::upper_bound(s.begin(), s.end(), x);
        std::size_t k = static_cast<std::size_t>(it - s.begin());
        return std::clamp<std::size_t>(k == 0 ? 0 : k - 1, 0, s.size() - 2);
    }

    double value(double x) const {
        const std::size_t k = interval(x);
        const double h = s[k + 1] - s[k];
        const double t = (x - s[k]) / h;
        const double t2 = t * t, t3 = t2 * t;
        return (2 * t3 - 3 * t2 + 1) * a[k] + (t3 - 2 * t2 + t) * h * da[k] +
               (-2 * t3 + 3 * t2) * a[k + 1] + (t3 - t2) * h * da[k + 1];
    }

    double derivative(double x) const {
        const std::size_t k = interval(x);
        const double h = s[k + 1] - s[k];
        const double t = (x - s[k]) / h;
        const double t2 = t * t;
        return ((6 * t2 - 6 * t) * a[k] + (-6 * t2 + 6 * t) * a[k + 1]) / h +
               (3 * t2 - 4 * t + 1) * da[k] + (3 * t2 - 2 * t) * da[k + 1];
    }
};

namespace {

constexpr double kNearOne = 1e-12;

void require_positive(double s) {
    if (!(s > 0.0) || !std::isfinite(s)) {
        throw DomainError("argument must be positive and finite, got " + std::to_string(s));
    }
}

// m/(m-1) * (s^(m-1) - 1) without cancellation near m = 1.
double scaled_power_minus_one(double s, double e) {
    return std::expm1(e * std::log(s)) / e;
}

std::vector<double> fritsch_carlson_slopes(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    std::vector<double> d(n - 1), m(n);
    for (std::size_t k = 0; k + 1 < n; ++k) d[k] = (y[k + 1] - y[k]) / (x[k + 1] - x[k]);
    m[0] = d[0];
    m[n - 1] = d[n - 2];
    for (std::size_t k = 1; k + 1 < n; ++k) {
        if (d[k - 1] * d[k] <= 0.0) {
            m[k] = 0.0;
        } else {
            const double w1 = 2 * (x[k + 1] - x[k]) + (x[k] - x[k - 1]);
            const double w2 = (x[k + 1] - x[k]) + 2 * (x[k] - x[k - 1]);
            m[k] = (w1 + w2) / (w1 / d[k - 1] + w2 / d[k]);
        }
    }
    return m;
}

}  // namespace

// ---------------------------------------------------------------------------
// CoeffModel

CoeffModel CoeffModel::linear() {
    CoeffModel model(Family::Linear, 1.0);
    return model;
}

CoeffModel CoeffModel::power_law(double m) {
    if (!(m > 0.0) || !std::isfinite(m)) {
        throw ModelError("power-law exponent must be positive, got " + std::to_string(m));
    }
    CoeffModel model(Family::PowerLaw, m);
    model.check_positive_on_probe();
    return model;
}

CoeffModel CoeffModel::shifted_power_law(double m) {
    if (!(m > 0.0) || !std::isfinite(m)) {
        throw ModelError("shifted power-law exponent must be positive, got " + std::to_string(m));
    }
    CoeffModel model(Family::ShiftedPowerLaw, m);
    model.check_positive_on_probe();
    return model;
}

CoeffModel CoeffModel::custom(std::vector<double> s, std::vector<double> a, std::vector<double> da) {
    if (s.size() < 3 || a.size() != s.size() || da.size() != s.size()) {
        throw ModelError("custom table needs at least 3 rows of equal length");
    }
    if (s.front() != 0.0) throw ModelError("custom table must start at s = 0");
    for (std::size_t k = 0; k + 1 < s.size(); ++k) {
        if (!(s[k + 1] > s[k])) throw ModelError("custom table knots must be strictly increasing");
    }
    if (s.back() < 1.0) throw ModelError("custom table must cover s = 1");
    double slope_scale = 0.0;
    for (double d : da) slope_scale = std::max(slope_scale, std::abs(d));
    for (std::size_t k = 1; k + 1 < s.size(); ++k) {
        const double fd = (a[k + 1] - a[k - 1]) / (s[k + 1] - s[k - 1]);
        const double ref = std::max(std::abs(da[k]), slope_scale);
        if (std::abs(fd - da[k]) > 1e-4 * ref && std::abs(fd - da[k]) > 1e-14) {
            std::ostringstream msg;
            msg << "custom table derivative inconsistent at s = " << s[k] << ": a' = " << da[k]
                << ", differenced a gives " << fd;
            throw ModelError(msg.str());
        }
    }
    CoeffModel model(Family::Custom, 0.0);
    model.table_ = std::make_shared<const CustomTable>(CustomTable{std::move(s), std::move(a), std::move(da)});
    model.check_positive_on_probe();
    return model;
}

CoeffModel CoeffModel::from_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ModelError("cannot open coefficient table " + path.string());
    std::vector<double> s, a, da;
    std::string line;
    int columns = -1;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        std::vector<double> vals;
        double v;
        while (row >> v) vals.push_back(v);
        if (vals.empty()) continue;  // header
        if (columns < 0) columns = static_cast<int>(vals.size());
        if (static_cast<int>(vals.size()) != columns || (columns != 2 && columns != 3)) {
            throw ModelError("coefficient table rows must have 2 or 3 numeric columns");
        }
        s.push_back(vals[0]);
        a.push_back(vals[1]);
        if (columns == 3) da.push_back(vals[2]);
    }
    if (s.size() < 3) throw ModelError("coefficient table " + path.string() + " has fewer than 3 rows");
    if (columns == 2) da = fritsch_carlson_slopes(s, a);
    if (columns == 2) {
        // Slopes derived from the data are consistent by construction; skip the cross-check.
        CoeffModel model(Family::Custom, 0.0);
        if (s.front() != 0.0 || s.back() < 1.0) throw ModelError("custom table must span [0, >=1]");
        for (std::size_t k = 0; k + 1 < s.size(); ++k) {
            if (!(s[k + 1] > s[k])) throw ModelError("custom table knots must be strictly increasing");
        }
        model.table_ = std::make_shared<const CustomTable>(CustomTable{std::move(s), std::move(a), std::move(da)});
        model.check_positive_on_probe();
        return model;
    }
    return custom(std::move(s), std::move(a), std::move(da));
}

std::string CoeffModel::name() const {
    std::ostringstream out;
    switch (family_) {
    case Family::Linear: return "linear";
    case Family::PowerLaw: out << "power_law(m=" << m_ << ")"; break;
    case Family::ShiftedPowerLaw: out << "shifted_power_law(m=" << m_ << ")"; break;
    case Family::Custom: out << "custom(" << table_->s.size() << " knots)"; break;
    }
    return out.str();
}

double CoeffModel::upper_limit() const {
    return family_ == Family::Custom ? table_->s.back() : INFINITY;
}

double CoeffModel::a_unchecked(double s) const {
    switch (family_) {
    case Family::Linear: return 1.0;
    case Family::PowerLaw: return m_ * std::pow(s, m_ - 1.0);
    case Family::ShiftedPowerLaw: return m_ * std::pow(1.0 + s, m_ - 1.0);
    case Family::Custom: return table_->value(s);
    }
    return NAN;
}

double CoeffModel::a(double s) const {
    require_positive(s);
    if (s > upper_limit()) {
        throw DomainError("argument " + std::to_string(s) + " beyond the coefficient table");
    }
    const double value = a_unchecked(s);
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw ModelError("coefficient a(" + std::to_string(s) + ") = " + std::to_string(value) +
                         " is not positive");
    }
    return value;
}

double CoeffModel::da(double s) const {
    require_positive(s);
    switch (family_) {
    case Family::Linear: return 0.0;
    case Family::PowerLaw: return m_ * (m_ - 1.0) * std::pow(s, m_ - 2.0);
    case Family::ShiftedPowerLaw: return m_ * (m_ - 1.0) * std::pow(1.0 + s, m_ - 2.0);
    case Family::Custom:
        if (s > upper_limit()) throw DomainError("argument beyond the coefficient table");
        return table_->derivative(s);
    }
    return NAN;
}

void CoeffModel::check_positive_on_probe() const {
    std::vector<double> probe;
    const double hi = std::min(upper_limit(), 1e6);
    for (int k = 0; k <= 240; ++k) {
        const double s = std::exp(std::log(1e-6) + (std::log(hi) - std::log(1e-6)) * k / 240.0);
        probe.push_back(std::min(s, hi));
    }
    if (table_) {
        for (std::size_t k = 0; k + 1 < table_->s.size(); ++k) {
            probe.push_back(std::max(table_->s[k], 1e-300));
            probe.push_back(0.5 * (table_->s[k] + table_->s[k + 1]));
        }
        probe.push_back(table_->s.back());
    }
    for (double s : probe) {
        if (s <= 0.0) continue;
        const double value = a_unchecked(s);
        if (!(value > 0.0) || !std::isfinite(value)) {
            throw ModelError(name() + ": a(" + std::to_string(s) + ") = " + std::to_string(value) +
                             " is not positive");
        }
    }
}

double eval_coefficient(const CoeffModel& model, double s) { return model.a(s); }

// ---------------------------------------------------------------------------
// Primitives

namespace {

Primitives power_law_primitives(double m, double s) {
    Primitives out;
    const double ls = std::log(s);
    if (std::abs(m - 1.0) < kNearOne) {
        out.lambda = ls;
        out.entropy_density = s * ls - s + 1.0;
    } else {
        out.lambda = m * scaled_power_minus_one(s, m - 1.0);
        // (s^m - 1)/(m-1) - m (s-1)/(m-1)
        out.entropy_density = (std::expm1(m * ls) - m * (s - 1.0)) / (m - 1.0);
    }
    if (std::abs(m - 0.5) < kNearOne) {
        out.sigma = 0.5 * ls;
    } else {
        out.sigma = m * scaled_power_minus_one(s, m - 0.5);
    }
    out.flux_primitive = std::pow(s, m);
    return out;
}

}  // namespace

Primitives eval_primitives_quadrature(const CoeffModel& model, double s) {
    require_positive(s);
    if (s > model.upper_limit()) throw DomainError("argument beyond the coefficient table");

    // Log substitution t = log(tau) keeps the integrands smooth for s -> 0.
    const double ls = std::log(s);
    Primitives out;
    out.lambda = adaptive_simpson([&](double t) { return model.a(std::exp(t)); }, 0.0, ls);
    out.sigma = adaptive_simpson(
        [&](double t) {
            const double tau = std::exp(t);
            return model.a(tau) * std::sqrt(tau);
        },
        0.0, ls);
    const double a_from_one = adaptive_simpson(
        [&](double t) {
            const double tau = std::exp(t);
            return model.a(tau) * tau;
        },
        0.0, ls);
    // Integration by parts: int_1^s Lambda = s Lambda(s) - int_1^s a.
    out.entropy_density = s * out.lambda - a_from_one;

    // F(s) = int_0^s a with tau = s r^k. k m >= 2 makes the integrand vanish at r = 0
    // even for the s^(m-1) singularity of the power law.
    int k = 2;
    if (model.family() == Family::PowerLaw) k = std::max(2, static_cast<int>(std::ceil(2.0 / model.exponent())));
    out.flux_primitive = adaptive_simpson(
        [&](double r) {
            const double tau = s * std::pow(r, k);
            if (tau <= 0.0) return 0.0;
            return model.a(tau) * s * k * std::pow(r, k - 1);
        },
        0.0, 1.0);
    return out;
}

Primitives eval_primitives(const CoeffModel& model, double s) {
    require_positive(s);
    switch (model.family()) {
    case Family::Linear: return power_law_primitives(1.0, s);
    case Family::PowerLaw: return power_law_primitives(model.exponent(), s);
    default: return eval_primitives_quadrature(model, s);
    }
}

// ---------------------------------------------------------------------------
// PrimitiveCache

PrimitiveCache::PrimitiveCache(const CoeffModel& model, double lo, double hi, int knots) {
    if (!(lo > 0.0) || !(hi > lo) || knots < 2) throw UsageError("PrimitiveCache needs 0 < lo < hi, knots >= 2");
    knots_.resize(static_cast<std::size_t>(knots));
    for (int k = 0; k < knots; ++k) {
        knots_[k] = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * k / (knots - 1));
    }
    knots_.front() = lo;
    knots_.back() = hi;
    for (double s : knots_) {
        const Primitives p = eval_primitives(model, s);
        const double a = model.a(s);
        values_.push_back(p);
        slopes_.push_back(Primitives{a / s, p.lambda, a / std::sqrt(s), a});
    }
}

Primitives PrimitiveCache::operator()(double s) const {
    if (s < knots_.front() || s > knots_.back()) {
        throw DomainError("PrimitiveCache queried outside [" + std::to_string(knots_.front()) + ", " +
                          std::to_string(knots_.back()) + "]");
    }
    auto it = std::upper_bound(knots_.begin(), knots_.end(), s);
    std::size_t k = static_cast<std::size_t>(it - knots_.begin());
    k = std::clamp<std::size_t>(k == 0 ? 0 : k - 1, 0, knots_.size() - 2);
    const double h = knots_[k + 1] - knots_[k];
    const double t = (s - knots_[k]) / h;
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t, h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
    auto interp = [&](double Primitives::*field) {
        return h00 * (values_[k].*field) + h10 * h * (slopes_[k].*field) + h01 * (values_[k + 1].*field) +
               h11 * h * (slopes_[k + 1].*field);
    };
    return Primitives{interp(&Primitives::lambda), interp(&Primitives::entropy_density), interp(&Primitives::sigma),
                      interp(&Primitives::flux_primitive)};
}

// ---------------------------------------------------------------------------
// Keller-Segel

namespace {

// int_1^r (1+t)^alpha dt
double shifted_power_integral(double alpha, double r) {
    if (std::abs(alpha + 1.0) < kNearOne) return std::log((1.0 + r) / 2.0);
    return (std::pow(1.0 + r, alpha + 1.0) - std::pow(2.0, alpha + 1.0)) / (alpha + 1.0);
}

// int_1^phi int_1^r (1+t)^alpha dt dr
double shifted_power_double_integral(double alpha, double phi) {
    if (std::abs(alpha + 1.0) < kNearOne) return (1.0 + phi) * std::log((1.0 + phi) / 2.0) - (phi - 1.0);
    return (shifted_power_integral(alpha + 1.0, phi) - std::pow(2.0, alpha + 1.0) * (phi - 1.0)) / (alpha + 1.0);
}

bool on_critical_line(double p, double q) { return std::abs(p - q - 1.0) < kNearOne; }

void require_nonnegative(double s) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw DomainError("argument must be nonnegative, got " + std::to_string(s));
}

double ratio_primitive(double p, double q, double s) {
    require_positive(s);
    if (on_critical_line(p, q)) return std::log(2.0 * s / (1.0 + s));
    // D/S = (1+t)^(q-p)/t; t = e^w.
    return adaptive_simpson([&](double w) { return std::pow(1.0 + std::exp(w), q - p); }, 0.0, std::log(s));
}

double sigma_ds(double p, double q, double s) {
    // int_1^s D/sqrt(S) with t = w^2: 2 (1+w^2)^(q/2 - p) dw
    return adaptive_simpson([&](double w) { return 2.0 * std::pow(1.0 + w * w, 0.5 * q - p); }, 1.0, std::sqrt(s));
}

}  // namespace

double ks_diffusion(double p, double s) { return std::pow(1.0 + s, -p); }
double ks_sensitivity(double q, double s) { return s * std::pow(1.0 + s, -q); }
double ks_sensitivity_d1(double q, double s) { return std::pow(1.0 + s, -q - 1.0) * (1.0 + s - q * s); }
double ks_sensitivity_d2(double q, double s) { return std::pow(1.0 + s, -q - 2.0) * (q * (q - 1.0) * s - 2.0 * q); }

double ks_double_primitive(double p, double q, double s) {
    require_positive(s);
    if (on_critical_line(p, q)) {
        return s * std::log(s) - (1.0 + s) * std::log1p(s) + (s + 1.0) * std::log(2.0);
    }
    // Integration by parts: G(s) = s R(s) - int_1^s t D/S dt, t D/S = (1+t)^(q-p).
    return s * ratio_primitive(p, q, s) - shifted_power_integral(q - p, s);
}

double ks_psi(double p, double q, double s) {
    require_nonnegative(s);
    // t D S'/S = (1-q)(1+t)^-p + q (1+t)^(-p-1);  r D(r) = (1+r)^(1-p) - (1+r)^-p
    return (1.0 - q) * shifted_power_double_integral(-p, s) + q * shifted_power_double_integral(-p - 1.0, s) +
           shifted_power_integral(1.0 - p, s) - shifted_power_integral(-p, s);
}

KSCoeffs eval_ks(double p, double q, double s) {
    require_nonnegative(s);
    if (s == 0.0) {
        throw DomainError("eval_ks: G and the ratio primitive need s > 0; use ks_diffusion/ks_sensitivity at s = 0");
    }
    KSCoeffs out;
    out.p = p;
    out.q = q;
    out.diffusion = ks_diffusion(p, s);
    out.sensitivity = ks_sensitivity(q, s);
    out.ratio_primitive = ratio_primitive(p, q, s);
    out.double_primitive = ks_double_primitive(p, q, s);
    out.psi = ks_psi(p, q, s);
    out.sigma_ds = sigma_ds(p, q, s);
    return out;
}

}  // namespace entroflow
