#include "rdlab/grid.hpp"

#include <string>

namespace rdlab {

GridSpec::GridSpec(int cells) : cells_(cells) {
    if (cells < 2) {
        throw Error("GridSpec: need at least 2 cells, got " + std::to_string(cells));
    }
}

GridFunction::GridFunction(GridSpec grid, Vector values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.cells()) {
        throw Error("GridFunction: value count does not match grid");
    }
    if (!all_finite(values_)) {
        throw Error("GridFunction: non-finite entry");
    }
}

GridFunction GridFunction::zeros(GridSpec grid) { return {grid, Vector::Zero(grid.cells())}; }

GridFunction GridFunction::constant(GridSpec grid, double value) {
    return {grid, Vector::Constant(grid.cells(), value)};
}

GridFunction GridFunction::from_profile(GridSpec grid, const std::function<double(double)>& profile) {
    Vector v(grid.cells());
    for (int i = 0; i < grid.cells(); ++i) v[i] = profile(grid.node(i));
    return {grid, std::move(v)};
}

double GridFunction::sup_norm() const { return rdlab::sup_norm(values_); }

double GridFunction::lq_norm(double q) const { return rdlab::lq_norm(values_, grid_.h(), q); }

double sup_norm(const Vector& v) {
    double m = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double a = std::abs(v[i]);
        // NaN propagates so that explosion checks see it
        if (std::isnan(a)) return a;
        if (a > m) m = a;
    }
    return m;
}

double lq_norm(const Vector& v, double h, double q) {
    if (!(q >= 1.0)) throw Error("lq_norm: exponent must be >= 1");
    double s = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) s += std::pow(std::abs(v[i]), q);
    return std::pow(h * s, 1.0 / q);
}

bool all_finite(const Vector& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i])) return false;
    }
    return true;
}

}  // namespace rdlab
