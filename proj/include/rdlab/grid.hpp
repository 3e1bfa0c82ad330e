#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <span>

#include "rdlab/error.hpp"

namespace rdlab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Uniform cell-centered grid on [0, 1] with M cells; nodes x_i = (i + 1/2) h.
class GridSpec {
public:
    explicit GridSpec(int cells);

    int cells() const { return cells_; }
    double h() const { return 1.0 / static_cast<double>(cells_); }
    double node(int i) const { return (static_cast<double>(i) + 0.5) * h(); }

    bool operator==(const GridSpec&) const = default;

private:
    int cells_;
};

/// Finite real values over a GridSpec. Non-finite entries are rejected on
/// construction, so every GridFunction in circulation is finite.
class GridFunction {
public:
    GridFunction(GridSpec grid, Vector values);

    static GridFunction zeros(GridSpec grid);
    static GridFunction constant(GridSpec grid, double value);
    static GridFunction from_profile(GridSpec grid, const std::function<double(double)>& profile);

    const GridSpec& grid() const { return grid_; }
    const Vector& values() const { return values_; }
    int size() const { return static_cast<int>(values_.size()); }
    double operator[](int i) const { return values_[i]; }

    double sup_norm() const;
    /// (h * sum |u_i|^q)^(1/q)
    double lq_norm(double q) const;

private:
    GridSpec grid_;
    Vector values_;
};

double sup_norm(const Vector& v);
double lq_norm(const Vector& v, double h, double q);
bool all_finite(const Vector& v);

}  // namespace rdlab
