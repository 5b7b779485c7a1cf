#pragma once

// Cell-centered fields on the unit box (0,1)^n, n <= 3, with homogeneous
// Neumann data imposed through mirror ghost cells.
//
// Derivatives take a Parity per axis. A Neumann field is even about each
// face (ghost = adjacent interior value). A flux-like field, i.e. a first
// derivative along that axis, is odd (ghost = minus the interior value).
// The odd mirror is what keeps composed derivatives second order at the
// boundary cells.

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <vector>

namespace entroflow {

struct Grid {
    int dim = 1;
    int cells = 64;

    Grid() = default;
    Grid(int dim, int cells);

    double spacing() const noexcept { return 1.0 / cells; }
    std::size_t size() const noexcept;
    std::size_t stride(int axis) const noexcept;
    /// Cell-center coordinate along an axis for cell index i.
    double center(int i) const noexcept { return (i + 0.5) / cells; }
    /// Per-axis indices of a flat index.
    void unflatten(std::size_t flat, int idx[3]) const noexcept;

    bool operator==(const Grid&) const = default;
};

struct Field {
    Grid grid;
    std::vector<double> values;

    Field() = default;
    explicit Field(const Grid& g, double fill = 0.0) : grid(g), values(g.size(), fill) {}
    Field(const Grid& g, std::vector<double> v);

    std::size_t size() const noexcept { return values.size(); }
    double& operator[](std::size_t k) { return values[k]; }
    double operator[](std::size_t k) const { return values[k]; }

    double min() const;
    double max() const;
};

enum class Parity { Even, Odd };

/// Evaluates fn at every cell center; fn receives (x, y, z) with unused axes 0.
Field sample(const Grid& grid, const std::function<double(double, double, double)>& fn);

/// Pointwise map.
Field map(const Field& f, const std::function<double(double)>& fn);

/// Midpoint rule h^n * sum(values).
double integrate(const Field& f);

/// Central difference along one axis with mirror ghosts of the given parity.
Field derivative(const Field& f, int axis, Parity parity = Parity::Even);

/// Compact second difference along one axis, even mirror.
Field second_derivative(const Field& f, int axis);

/// Central-difference gradient of a Neumann field.
std::vector<Field> neumann_gradient(const Field& f);

/// Hessian: compact second differences on the diagonal, composed first
/// differences d_i(d_j f) off the diagonal. Symmetric up to round-off.
std::vector<std::vector<Field>> neumann_hessian(const Field& f);

/// Discrete divergence of face fluxes: (F_{i+1/2} - F_{i-1/2}) / h with zero
/// flux on the domain faces. `face_flux` has cells-1 interior entries (1D only).
std::vector<double> flux_divergence(const std::vector<double>& face_flux, double h);

struct TestFunctionSpec {
    double offset = 1.0;                             // c0
    std::vector<std::vector<double>> cosine_coeffs;  // per axis: a_1, a_2, ...

    /// c0 - sum |a_k| over all axes.
    double positivity_margin() const;
};

/// f(x) = c0 + sum_axes sum_k a_k cos(k pi x_axis). Throws UsageError when the
/// positivity margin is below 0.05.
Field build_test_function(const Grid& grid, const TestFunctionSpec& spec);

/// Rejects fields whose boundary one-sided differences are first order in h,
/// i.e. fields that do not have (discretely) vanishing normal derivative.
void require_neumann_compatible(const Field& f);

/// CSV with columns x[,y[,z]],value and `%.12e` formatting.
void write_field_csv(std::ostream& out, const Field& f);

}  // namespace entroflow
