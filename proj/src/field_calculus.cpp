#include "entroflow/field_calculus.hpp"

#include "entroflow/csv_io.hpp"
#include "entroflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

namespace entroflow {

Grid::Grid(int d, int n) : dim(d), cells(n) {
    if (d < 1 || d > 3) throw UsageError("grid dimension must be 1, 2 or 3");
    if (n < 8) throw UsageError("grid needs at least 8 cells per axis");
}

std::size_t Grid::size() const noexcept {
    std::size_t n = 1;
    for (int a = 0; a < dim; ++a) n *= static_cast<std::size_t>(cells);
    return n;
}

std::size_t Grid::stride(int axis) const noexcept {
    std::size_t s = 1;
    for (int a = 0; a < axis; ++a) s *= static_cast<std::size_t>(cells);
    return s;
}

void Grid::unflatten(std::size_t flat, int idx[3]) const noexcept {
    for (int a = 0; a < 3; ++a) {
        if (a < dim) {
            idx[a] = static_cast<int>(flat % static_cast<std::size_t>(cells));
            flat /= static_cast<std::size_t>(cells);
        } else {
            idx[a] = 0;
        }
    }
}

Field::Field(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.size()) throw UsageError("field value count does not match the grid");
}

double Field::min() const { return *std::min_element(values.begin(), values.end()); }
double Field::max() const { return *std::max_element(values.begin(), values.end()); }

Field sample(const Grid& grid, const std::function<double(double, double, double)>& fn) {
    Field f(grid);
    int idx[3];
    for (std::size_t k = 0; k < f.size(); ++k) {
        grid.unflatten(k, idx);
        const double x = grid.center(idx[0]);
        const double y = grid.dim > 1 ? grid.center(idx[1]) : 0.0;
        const double z = grid.dim > 2 ? grid.center(idx[2]) : 0.0;
        f[k] = fn(x, y, z);
    }
    return f;
}

Field map(const Field& f, const std::function<double(double)>& fn) {
    Field out(f.grid);
    for (std::size_t k = 0; k < f.size(); ++k) out[k] = fn(f[k]);
    return out;
}

double integrate(const Field& f) {
    double sum = 0.0;
    for (double v : f.values) sum += v;
    return sum * std::pow(f.grid.spacing(), f.grid.dim);
}

namespace {

// Visits every cell with its neighbours along `axis`, ghosts resolved by parity.
template <class Fn>
void for_each_stencil(const Field& f, int axis, Parity parity, Fn&& fn) {
    if (axis < 0 || axis >= f.grid.dim) throw UsageError("axis out of range");
    const std::size_t stride = f.grid.stride(axis);
    const int n = f.grid.cells;
    const double sign = parity == Parity::Even ? 1.0 : -1.0;
    int idx[3];
    for (std::size_t k = 0; k < f.size(); ++k) {
        f.grid.unflatten(k, idx);
        const int i = idx[axis];
        const double center = f[k];
        const double left = i > 0 ? f[k - stride] : sign * center;
        const double right = i < n - 1 ? f[k + stride] : sign * center;
        fn(k, left, center, right);
    }
}

}  // namespace

Field derivative(const Field& f, int axis, Parity parity) {
    Field out(f.grid);
    const double inv = 0.5 / f.grid.spacing();
    for_each_stencil(f, axis, parity, [&](std::size_t k, double l, double, double r) { out[k] = (r - l) * inv; });
    return out;
}

Field second_derivative(const Field& f, int axis) {
    Field out(f.grid);
    const double inv = 1.0 / (f.grid.spacing() * f.grid.spacing());
    for_each_stencil(f, axis, Parity::Even,
                     [&](std::size_t k, double l, double c, double r) { out[k] = (r - 2.0 * c + l) * inv; });
    return out;
}

std::vector<Field> neumann_gradient(const Field& f) {
    std::vector<Field> grad;
    for (int a = 0; a < f.grid.dim; ++a) grad.push_back(derivative(f, a));
    return grad;
}

std::vector<std::vector<Field>> neumann_hessian(const Field& f) {
    const int n = f.grid.dim;
    const auto grad = neumann_gradient(f);
    std::vector<std::vector<Field>> hess(n, std::vector<Field>(n));
    for (int i = 0; i < n; ++i) {
        hess[i][i] = second_derivative(f, i);
        for (int j = 0; j < n; ++j) {
            // d_j f is even along axis i != j.
            if (i != j) hess[i][j] = derivative(grad[j], i, Parity::Even);
        }
    }
    return hess;
}

std::vector<double> flux_divergence(const std::vector<double>& face_flux, double h) {
    const std::size_t n = face_flux.size() + 1;
    std::vector<double> div(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double right = i + 1 < n ? face_flux[i] : 0.0;
        const double left = i > 0 ? face_flux[i - 1] : 0.0;
        div[i] = (right - left) / h;
    }
    return div;
}

double TestFunctionSpec::positivity_margin() const {
    double total = 0.0;
    for (const auto& axis : cosine_coeffs)
        for (double a : axis) total += std::abs(a);
    return offset - total;
}

Field build_test_function(const Grid& grid, const TestFunctionSpec& spec) {
    if (static_cast<int>(spec.cosine_coeffs.size()) > grid.dim) {
        throw UsageError("test function has more coefficient axes than the grid");
    }
    if (spec.positivity_margin() < 0.05) {
        throw UsageError("test function positivity margin " + std::to_string(spec.positivity_margin()) +
                         " is below 0.05");
    }
    return sample(grid, [&](double x, double y, double z) {
        const double coords[3] = {x, y, z};
        double v = spec.offset;
        for (std::size_t a = 0; a < spec.cosine_coeffs.size(); ++a) {
            const auto& coeffs = spec.cosine_coeffs[a];
            for (std::size_t k = 0; k < coeffs.size(); ++k) {
                v += coeffs[k] * std::cos(static_cast<double>(k + 1) * std::numbers::pi * coords[a]);
            }
        }
        return v;
    });
}

void require_neumann_compatible(const Field& f) {
    for (int axis = 0; axis < f.grid.dim; ++axis) {
        const Field d2 = second_derivative(f, axis);
        const std::size_t stride = f.grid.stride(axis);
        const int n = f.grid.cells;
        int idx[3];
        // Interior cells only: the mirror itself puts an O(1/h) kink into the
        // boundary second difference of a non-Neumann field.
        double curvature = 0.0;
        for (std::size_t k = 0; k < f.size(); ++k) {
            f.grid.unflatten(k, idx);
            if (idx[axis] > 0 && idx[axis] < n - 1) curvature = std::max(curvature, std::abs(d2[k]));
        }
        const double h = f.grid.spacing();
        const double allowed = 2.0 * curvature * h * h + 1e-12 * std::max(1.0, std::abs(f.max()));
        for (std::size_t k = 0; k < f.size(); ++k) {
            f.grid.unflatten(k, idx);
            double jump = 0.0;
            if (idx[axis] == 0) jump = f[k + stride] - f[k];
            else if (idx[axis] == n - 1) jump = f[k] - f[k - stride];
            else continue;
            if (std::abs(jump) > allowed) {
                throw UsageError("field is not Neumann compatible along axis " + std::to_string(axis) +
                                 ": boundary difference " + std::to_string(jump) + " is first order in h");
            }
        }
    }
}

void write_field_csv(std::ostream& out, const Field& f) {
    static const char* axes[] = {"x", "y", "z"};
    std::vector<std::string> header;
    for (int a = 0; a < f.grid.dim; ++a) header.emplace_back(axes[a]);
    header.emplace_back("value");
    CsvWriter csv(out, header);
    int idx[3];
    std::vector<double> row(header.size());
    for (std::size_t k = 0; k < f.size(); ++k) {
        f.grid.unflatten(k, idx);
        for (int a = 0; a < f.grid.dim; ++a) row[a] = f.grid.center(idx[a]);
        row.back() = f[k];
        csv.row(row);
    }
}

}  // namespace entroflow
