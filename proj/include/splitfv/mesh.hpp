#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace splitfv {

/// Uniform partition of [x_min, x_max) into n_cells cells I_j of width dx.
class Grid1D {
public:
    Grid1D(double x_min, double x_max, std::size_t n_cells) : x_min_(x_min), x_max_(x_max), n_cells_(n_cells) {
        if (!std::isfinite(x_min) || !std::isfinite(x_max) || !(x_max > x_min)) {
            throw std::invalid_argument("Grid1D: degenerate interval");
        }
        if (n_cells < 2) {
            throw std::invalid_argument("Grid1D: need at least 2 cells");
        }
        dx_ = (x_max_ - x_min_) / static_cast<double>(n_cells_);
    }

    [[nodiscard]] double x_min() const noexcept { return x_min_; }
    [[nodiscard]] double x_max() const noexcept { return x_max_; }
    [[nodiscard]] std::size_t n_cells() const noexcept { return n_cells_; }
    [[nodiscard]] double dx() const noexcept { return dx_; }
    [[nodiscard]] double length() const noexcept { return x_max_ - x_min_; }

    [[nodiscard]] double center(std::ptrdiff_t j) const noexcept {
        return x_min_ + (static_cast<double>(j) + 0.5) * dx_;
    }
    [[nodiscard]] double left_edge(std::size_t j) const noexcept { return x_min_ + static_cast<double>(j) * dx_; }

    [[nodiscard]] std::vector<double> cell_centers() const {
        std::vector<double> xs(n_cells_);
        for (std::size_t j = 0; j < n_cells_; ++j) xs[j] = center(static_cast<std::ptrdiff_t>(j));
        return xs;
    }

    friend bool operator==(const Grid1D& a, const Grid1D& b) noexcept {
        return a.x_min_ == b.x_min_ && a.x_max_ == b.x_max_ && a.n_cells_ == b.n_cells_;
    }

private:
    double x_min_;
    double x_max_;
    std::size_t n_cells_;
    double dx_{};
};

inline Grid1D build_grid(double x_min, double x_max, std::size_t n_cells) { return {x_min, x_max, n_cells}; }

/// Piecewise-constant state: one cell average per cell at a given time.
struct CellField {
    Grid1D grid;
    std::vector<double> values;
    double time = 0.0;

    CellField(Grid1D g, std::vector<double> v, double t = 0.0) : grid(g), values(std::move(v)), time(t) {
        if (values.size() != grid.n_cells()) {
            throw std::invalid_argument("CellField: value count does not match grid");
        }
        if (!(time >= 0.0)) throw std::invalid_argument("CellField: negative time");
    }

    static CellField constant(const Grid1D& g, double value, double t = 0.0) {
        return {g, std::vector<double>(g.n_cells(), value), t};
    }

    [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
    double& operator[](std::size_t j) noexcept { return values[j]; }
    double operator[](std::size_t j) const noexcept { return values[j]; }

    [[nodiscard]] bool all_finite() const noexcept {
        return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
    }
    [[nodiscard]] std::pair<double, double> range() const {
        auto [lo, hi] = std::minmax_element(values.begin(), values.end());
        return {*lo, *hi};
    }
};

/// Time horizon and step control shared by all drivers.
struct TimeAxis {
    double t_final = 1.0;
    double dt_max = std::numeric_limits<double>::infinity();
    double cfl_number = 0.9;

    void validate() const {
        if (!(t_final >= 0.0)) throw std::invalid_argument("TimeAxis: t_final must be nonnegative");
        if (!(dt_max > 0.0)) throw std::invalid_argument("TimeAxis: dt_max must be positive");
        if (!(cfl_number > 0.0)) throw std::invalid_argument("TimeAxis: cfl_number must be positive");
    }
};

/// Cell averages of u0 by composite midpoint quadrature with `quadrature_points` sub-points per cell.
template <class Fn>
CellField project_initial(Fn&& u0, const Grid1D& grid, std::size_t quadrature_points = 8) {
    if (quadrature_points == 0) throw std::invalid_argument("project_initial: quadrature_points must be positive");
    std::vector<double> values(grid.n_cells());
    const double h = grid.dx() / static_cast<double>(quadrature_points);
    for (std::size_t j = 0; j < grid.n_cells(); ++j) {
        const double a = grid.left_edge(j);
        double sum = 0.0;
        for (std::size_t q = 0; q < quadrature_points; ++q) {
            sum += static_cast<double>(u0(a + (static_cast<double>(q) + 0.5) * h));
        }
        values[j] = sum / static_cast<double>(quadrature_points);
        if (!std::isfinite(values[j])) {
            throw std::domain_error("project_initial: initial data not finite in cell " + std::to_string(j));
        }
    }
    return {grid, std::move(values), 0.0};
}

/// Sum of |u_{j+1} - u_j| over interior interfaces.
inline double total_variation(std::span<const double> values) noexcept {
    double tv = 0.0;
    for (std::size_t j = 1; j < values.size(); ++j) tv += std::abs(values[j] - values[j - 1]);
    return tv;
}
inline double total_variation(const CellField& field) noexcept { return total_variation(std::span<const double>(field.values)); }

inline double linf_norm(std::span<const double> values) noexcept {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}
inline double linf_norm(const CellField& field) noexcept { return linf_norm(std::span<const double>(field.values)); }

/// Discrete L1 distance dx * sum |a_j - b_j|.
inline double l1_distance(const CellField& a, const CellField& b) {
    if (!(a.grid == b.grid)) throw std::invalid_argument("l1_distance: grid mismatch");
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) s += std::abs(a[j] - b[j]);
    return a.grid.dx() * s;
}

}  // namespace splitfv
