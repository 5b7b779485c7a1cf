#pragma once

// Diffusion laws a(s) and their primitive functionals
//
//   Lambda(s) = int_1^s a(t)/t dt        H(s)     = int_1^s Lambda(t) dt
//   Sigma(s)  = int_1^s a(t)/sqrt(t) dt  F(s)     = int_0^s a(t) dt
//
// plus the Keller-Segel pair D(s) = (1+s)^-p, S(s) = s (1+s)^-q with its
// double primitive G and the Fisher-type potential Psi.

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace entroflow {

enum class Family { PowerLaw, ShiftedPowerLaw, Linear, Custom };

struct CustomTable;

class CoeffModel {
public:
    static CoeffModel linear();
    /// a(s) = m s^(m-1), m > 0.
    static CoeffModel power_law(double m);
    /// a(s) = m (1+s)^(m-1), m > 0.
    static CoeffModel shifted_power_law(double m);
    /// Cubic Hermite interpolant through (s_k, a_k, a'_k). The first knot must be 0
    /// and the table must cover s = 1. a' is cross-checked against centered
    /// differences of a; a relative mismatch above 1e-4 rejects the table.
    static CoeffModel custom(std::vector<double> s, std::vector<double> a, std::vector<double> da);
    /// Reads `s,a` or `s,a,da` rows (optional header). Two-column tables get
    /// monotone (Fritsch-Carlson) slopes.
    static CoeffModel from_csv(const std::filesystem::path& path);

    Family family() const noexcept { return family_; }
    double exponent() const noexcept { return m_; }
    std::string name() const;

    /// a(s); throws DomainError for s <= 0 (or outside a custom table).
    double a(double s) const;
    /// a'(s).
    double da(double s) const;
    /// Largest argument the model accepts.
    double upper_limit() const;

    bool has_closed_form() const noexcept {
        return family_ == Family::PowerLaw || family_ == Family::Linear;
    }

private:
    CoeffModel(Family f, double m) : family_(f), m_(m) {}
    void check_positive_on_probe() const;
    double a_unchecked(double s) const;

    Family family_;
    double m_;
    std::shared_ptr<const CustomTable> table_;
};

struct Primitives {
    double lambda = 0.0;
    double entropy_density = 0.0;
    double sigma = 0.0;
    double flux_primitive = 0.0;
};

double eval_coefficient(const CoeffModel& model, double s);

/// Closed forms for PowerLaw/Linear, adaptive quadrature otherwise.
Primitives eval_primitives(const CoeffModel& model, double s);

/// Always by quadrature (used to cross-check the closed forms).
Primitives eval_primitives_quadrature(const CoeffModel& model, double s);

/// Opt-in memoization of eval_primitives on a log-spaced knot set over [lo, hi].
/// Values between knots come from cubic Hermite interpolation using the exact
/// derivatives a/s, Lambda, a/sqrt(s), a at the knots. Immutable after
/// construction, so concurrent reads are safe.
class PrimitiveCache {
public:
    PrimitiveCache(const CoeffModel& model, double lo, double hi, int knots = 512);
    Primitives operator()(double s) const;
    double lo() const noexcept { return knots_.front(); }
    double hi() const noexcept { return knots_.back(); }

private:
    std::vector<double> knots_;
    std::vector<Primitives> values_;
    std::vector<Primitives> slopes_;
};

// ---------------------------------------------------------------------------
// Keller-Segel coefficients

struct KSCoeffs {
    double p = 0.0;
    double q = 0.0;
    double diffusion = 0.0;         // D(s)
    double sensitivity = 0.0;       // S(s)
    double ratio_primitive = 0.0;   // int_1^s D/S
    double double_primitive = 0.0;  // G(s)
    double psi = 0.0;               // Psi(s)
    double sigma_ds = 0.0;          // int_1^s D/sqrt(S)
};

double ks_diffusion(double p, double s);
double ks_sensitivity(double q, double s);
double ks_sensitivity_d1(double q, double s);
double ks_sensitivity_d2(double q, double s);

/// G(s); closed form on the critical line p - q = 1, quadrature otherwise.
double ks_double_primitive(double p, double q, double s);
/// Psi(s) in closed form (valid for all real p, q).
double ks_psi(double p, double q, double s);

/// All seven scalars. s = 0 is allowed for D and S only.
KSCoeffs eval_ks(double p, double q, double s);

}  // namespace entroflow
