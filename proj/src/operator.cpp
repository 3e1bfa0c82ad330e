#include "rdlab/operator.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <random>
#include <string>

namespace rdlab {

namespace {

constexpr double kSymmetryTolerance = 1e-12;
constexpr double kMaxBasisCondition = 1e8;
constexpr double kMinResolventRcond = 1e-13;

std::shared_ptr<const SpectralData> decompose(const Matrix& m, bool symmetric) {
    auto data = std::make_shared<SpectralData>();
    if (symmetric) {
        Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
        if (solver.info() != Eigen::Success) return nullptr;
        data->real = true;
        data->eigenvalues = solver.eigenvalues();
        data->vectors = solver.eigenvectors();
        return data;
    }
    Eigen::EigenSolver<Matrix> solver(m);
    if (solver.info() != Eigen::Success) return nullptr;
    data->real = false;
    data->complex_eigenvalues = solver.eigenvalues();
    data->right = solver.eigenvectors();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(data->right);
    const auto& sv = svd.singularValues();
    const double smin = sv[sv.size() - 1];
    if (!(smin > 0.0)) return nullptr;
    data->basis_condition = sv[0] / smin;
    if (data->basis_condition > kMaxBasisCondition) return nullptr;
    data->left_inverse = data->right.inverse();
    const Eigen::MatrixXcd rebuilt =
        data->right * data->complex_eigenvalues.asDiagonal() * data->left_inverse;
    const double scale = std::max(1.0, m.norm());
    if ((rebuilt - m.cast<std::complex<double>>()).norm() > 1e-10 * scale) return nullptr;
    return data;
}

// f applied to the spectrum: V f(Lambda) V^{-1}, real part taken for the
// complex case.
template <typename F>
Matrix spectral_function(const SpectralData& s, F&& f) {
    if (s.real) {
        Vector fl(s.eigenvalues.size());
        for (Eigen::Index j = 0; j < fl.size(); ++j) fl[j] = std::real(f(std::complex<double>(s.eigenvalues[j])));
        return s.vectors * fl.asDiagonal() * s.vectors.transpose();
    }
    Eigen::VectorXcd fl(s.complex_eigenvalues.size());
    for (Eigen::Index j = 0; j < fl.size(); ++j) fl[j] = f(s.complex_eigenvalues[j]);
    return (s.right * fl.asDiagonal() * s.left_inverse).real();
}

template <typename F>
Vector spectral_apply(const SpectralData& s, F&& f, const Vector& x) {
    if (s.real) {
        Vector coeff = s.vectors.transpose() * x;
        for (Eigen::Index j = 0; j < coeff.size(); ++j) {
            coeff[j] *= std::real(f(std::complex<double>(s.eigenvalues[j])));
        }
        return s.vectors * coeff;
    }
    Eigen::VectorXcd coeff = s.left_inverse * x.cast<std::complex<double>>();
    for (Eigen::Index j = 0; j < coeff.size(); ++j) coeff[j] *= f(s.complex_eigenvalues[j]);
    return (s.right * coeff).real();
}

double min_value(const GridFunction& g) { return g.values().minCoeff(); }

}  // namespace

EllipticSpec EllipticSpec::constant(GridSpec grid, double a, double b, double c, double kappa) {
    return EllipticSpec{GridFunction::constant(grid, a), GridFunction::constant(grid, b),
                        GridFunction::constant(grid, c), kappa > 0.0 ? kappa : a};
}

FirstOrderScheme choose_first_order_scheme(const EllipticSpec& spec) {
    const double bmax = spec.b.values().cwiseAbs().maxCoeff();
    const double peclet = spec.grid().h() * bmax / (2.0 * min_value(spec.a));
    return peclet < 1.0 ? FirstOrderScheme::Central : FirstOrderScheme::Upwind;
}

DiscreteOperator::DiscreteOperator(GridSpec grid, Matrix matrix) : grid_(grid), matrix_(std::move(matrix)) {
    if (matrix_.rows() != grid_.cells() || matrix_.cols() != grid_.cells()) {
        throw Error("DiscreteOperator: matrix shape does not match grid");
    }
    if (!matrix_.allFinite()) throw Error("DiscreteOperator: non-finite matrix entry");
    const double scale = std::max(1.0, matrix_.cwiseAbs().maxCoeff());
    const double asym = (matrix_ - matrix_.transpose()).cwiseAbs().maxCoeff();
    symmetric_ = asym <= kSymmetryTolerance * scale;
    if (symmetric_ && asym > 0.0) {
        matrix_ = 0.5 * (matrix_ + matrix_.transpose()).eval();
    }
    spectral_ = decompose(matrix_, symmetric_);
}

double DiscreteOperator::spectral_bound() const {
    if (spectral_) {
        if (spectral_->real) return spectral_->eigenvalues.maxCoeff();
        return spectral_->complex_eigenvalues.real().maxCoeff();
    }
    double bound = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < dim(); ++i) {
        const double radius = matrix_.row(i).cwiseAbs().sum() - std::abs(matrix_(i, i));
        bound = std::max(bound, matrix_(i, i) + radius);
    }
    return bound;
}

GridFunction DiscreteOperator::apply(const GridFunction& x) const {
    if (!(x.grid() == grid_)) throw Error("DiscreteOperator::apply: grid mismatch");
    Vector y = matrix_ * x.values();
    if (!all_finite(y)) throw Error("DiscreteOperator::apply: non-finite result");
    return {grid_, std::move(y)};
}

DiscreteOperator build_neumann_operator(const EllipticSpec& spec) {
    const GridSpec& grid = spec.grid();
    if (!(spec.b.grid() == grid) || !(spec.c.grid() == grid)) {
        throw Error("build_neumann_operator: coefficient grids differ");
    }
    if (!(spec.kappa > 0.0)) throw Error("build_neumann_operator: ellipticity floor must be positive");
    if (min_value(spec.a) < spec.kappa) {
        throw Error("build_neumann_operator: min a = " + std::to_string(min_value(spec.a)) +
                    " is below the ellipticity floor " + std::to_string(spec.kappa));
    }

    const int m = grid.cells();
    const double h = grid.h();
    const double inv_h2 = 1.0 / (h * h);
    const FirstOrderScheme scheme = choose_first_order_scheme(spec);

    Matrix mat = Matrix::Zero(m, m);
    for (int i = 0; i < m; ++i) {
        const double a = spec.a[i];
        const double b = spec.b[i];
        double lower = a * inv_h2;
        double upper = a * inv_h2;
        double diag = -2.0 * a * inv_h2 + spec.c[i];
        if (scheme == FirstOrderScheme::Central) {
            lower -= b / (2.0 * h);
            upper += b / (2.0 * h);
        } else if (b >= 0.0) {
            upper += b / h;
            diag -= b / h;
        } else {
            lower -= b / h;
            diag += b / h;
        }
        // ghost cells copy the boundary value (zero flux)
        if (i == 0) {
            diag += lower;
        } else {
            mat(i, i - 1) = lower;
        }
        if (i == m - 1) {
            diag += upper;
        } else {
            mat(i, i + 1) = upper;
        }
        mat(i, i) = diag;
    }
    return {grid, std::move(mat)};
}

Matrix resolvent_matrix(const DiscreteOperator& op, double lambda) {
    const int m = op.dim();
    const Matrix shifted = lambda * Matrix::Identity(m, m) - op.matrix();
    Eigen::PartialPivLU<Matrix> lu(shifted);
    if (!(lu.rcond() > kMinResolventRcond)) {
        throw Error("resolvent: lambda = " + std::to_string(lambda) + " is (numerically) in the spectrum");
    }
    Matrix r = lu.solve(Matrix::Identity(m, m));
    // one refinement sweep
    const Matrix residual = Matrix::Identity(m, m) - shifted * r;
    r += lu.solve(residual);
    return r;
}

GridFunction resolvent_apply(const DiscreteOperator& op, double lambda, const GridFunction& x) {
    const int m = op.dim();
    const Matrix shifted = lambda * Matrix::Identity(m, m) - op.matrix();
    Eigen::PartialPivLU<Matrix> lu(shifted);
    if (!(lu.rcond() > kMinResolventRcond)) {
        throw Error("resolvent: lambda = " + std::to_string(lambda) + " is (numerically) in the spectrum");
    }
    Vector y = lu.solve(x.values());
    Vector residual = x.values() - shifted * y;
    y += lu.solve(residual);
    residual = x.values() - shifted * y;
    if (residual.norm() > 1e-10 * std::max(x.values().norm(), std::numeric_limits<double>::min())) {
        throw Error("resolvent: residual above tolerance");
    }
    return {op.grid(), std::move(y)};
}

Matrix expm(const Matrix& a) {
    static constexpr double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                   1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                   670442572800.0,      33522128640.0,       1323241920.0,
                                   40840800.0,          960960.0,            16380.0,
                                   182.0,               1.0};
    constexpr double theta13 = 5.371920351148152;

    const Eigen::Index n = a.rows();
    const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
    if (!std::isfinite(norm1)) throw Error("expm: non-finite input");
    int squarings = 0;
    if (norm1 > theta13) squarings = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
    const Matrix s = a / std::ldexp(1.0, squarings);

    const Matrix id = Matrix::Identity(n, n);
    const Matrix s2 = s * s;
    const Matrix s4 = s2 * s2;
    const Matrix s6 = s4 * s2;
    const Matrix u = s * (s6 * (b[13] * s6 + b[11] * s4 + b[9] * s2) + b[7] * s6 + b[5] * s4 + b[3] * s2 + b[1] * id);
    const Matrix v = s6 * (b[12] * s6 + b[10] * s4 + b[8] * s2) + b[6] * s6 + b[4] * s4 + b[2] * s2 + b[0] * id;
    Matrix result = (v - u).partialPivLu().solve(v + u);
    for (int k = 0; k < squarings; ++k) result = (result * result).eval();
    if (!result.allFinite()) throw Error("expm: non-finite result");
    return result;
}

Matrix semigroup_matrix(const DiscreteOperator& op, double t, SemigroupMethod method) {
    if (!(t >= 0.0)) throw Error("semigroup: negative time");
    const int m = op.dim();
    if (t == 0.0) return Matrix::Identity(m, m);
    const SpectralData* s = op.spectral();
    bool spectral = false;
    switch (method) {
        case SemigroupMethod::Auto: spectral = s != nullptr && op.symmetric(); break;
        case SemigroupMethod::Spectral:
            if (s == nullptr) throw Error("semigroup: no spectral data for this operator");
            spectral = true;
            break;
        case SemigroupMethod::MatrixExponential: spectral = false; break;
    }
    Matrix result = spectral ? spectral_function(*s, [t](std::complex<double> l) { return std::exp(t * l); })
                             : expm(t * op.matrix());
    if (!result.allFinite()) throw Error("semigroup: non-finite result");
    return result;
}

GridFunction semigroup_apply(const DiscreteOperator& op, double t, const GridFunction& x, SemigroupMethod method) {
    if (!(t >= 0.0)) throw Error("semigroup: negative time");
    if (t == 0.0) return x;
    const SpectralData* s = op.spectral();
    Vector y;
    if (method != SemigroupMethod::MatrixExponential && s != nullptr &&
        (op.symmetric() || method == SemigroupMethod::Spectral)) {
        y = spectral_apply(*s, [t](std::complex<double> l) { return std::exp(t * l); }, x.values());
    } else {
        y = semigroup_matrix(op, t, method) * x.values();
    }
    if (!all_finite(y)) throw Error("semigroup: non-finite result");
    return {op.grid(), std::move(y)};
}

FractionalNormSpec FractionalNormSpec::with_default_shift(const DiscreteOperator& op, double theta) {
    return {theta, 1.0 + std::max(0.0, op.spectral_bound())};
}

Vector fractional_power_apply(const DiscreteOperator& op, const FractionalNormSpec& frac, PowerSign sign,
                              const Vector& x) {
    if (!(frac.theta >= 0.0 && frac.theta < 0.5)) throw Error("fractional power: theta must lie in [0, 1/2)");
    if (frac.theta == 0.0) return x;
    const SpectralData* s = op.spectral();
    if (s == nullptr) {
        throw Error(
            "fractional power: operator is not diagonalizable within tolerance; use a symmetric operator for "
            "fractional-norm experiments");
    }
    if (frac.shift - op.spectral_bound() <= 0.0) {
        throw Error("fractional power: shift w' must exceed the spectral bound");
    }
    const double exponent = static_cast<double>(static_cast<int>(sign)) * frac.theta;
    const double w = frac.shift;
    return spectral_apply(*s, [w, exponent](std::complex<double> l) { return std::pow(w - l, exponent); }, x);
}

GridFunction fractional_power_apply(const DiscreteOperator& op, const FractionalNormSpec& frac, PowerSign sign,
                                    const GridFunction& x) {
    return {op.grid(), fractional_power_apply(op, frac, sign, x.values())};
}

DiscreteOperator yosida_approximand(const DiscreteOperator& op, double n) {
    if (!(n > 0.0)) throw Error("yosida: index must be positive");
    if (!(n > op.spectral_bound())) throw Error("yosida: index must exceed the spectral bound");
    const int m = op.dim();
    Matrix an = n * n * resolvent_matrix(op, n) - n * Matrix::Identity(m, m);
    return {op.grid(), std::move(an)};
}

double norm_in(const DiscreteOperator& reference, const DistanceNorm& norm, const Vector& y) {
    if (std::holds_alternative<SupNorm>(norm)) return sup_norm(y);
    const auto& f = std::get<FractionalNorm>(norm);
    return lq_norm(fractional_power_apply(reference, f.frac, PowerSign::Positive, y), reference.grid().h(), f.q);
}

namespace {

Vector semigroup_vector(const DiscreteOperator& op, double t, const Vector& x) {
    return semigroup_apply(op, t, GridFunction(op.grid(), x)).values();
}

}  // namespace

double semigroup_distance(const DiscreteOperator& opA, const DiscreteOperator& opB, double horizon,
                          const GridFunction& x, const DistanceNorm& norm, int samples) {
    if (!(horizon > 0.0)) throw Error("semigroup_distance: horizon must be positive");
    if (samples < 2) throw Error("semigroup_distance: need at least two time samples");
    if (!(opA.grid() == opB.grid())) throw Error("semigroup_distance: grids differ");
    double worst = 0.0;
    for (int k = 0; k < samples; ++k) {
        const double t = horizon * static_cast<double>(k) / static_cast<double>(samples - 1);
        const Vector diff = semigroup_vector(opA, t, x.values()) - semigroup_vector(opB, t, x.values());
        worst = std::max(worst, norm_in(opA, norm, diff));
    }
    return worst;
}

double generator_semigroup_distance(const DiscreteOperator& opA, const DiscreteOperator& opB, double t_min,
                                    double horizon, const GridFunction& x, const DistanceNorm& norm, int samples) {
    if (!(t_min > 0.0 && horizon > t_min)) throw Error("generator distance: need 0 < t_min < T");
    if (samples < 2) throw Error("generator distance: need at least two time samples");
    double worst = 0.0;
    for (int k = 0; k < samples; ++k) {
        const double t = t_min + (horizon - t_min) * static_cast<double>(k) / static_cast<double>(samples - 1);
        const Vector diff =
            opA.matrix() * semigroup_vector(opA, t, x.values()) - opB.matrix() * semigroup_vector(opB, t, x.values());
        worst = std::max(worst, norm_in(opA, norm, diff));
    }
    return worst;
}

DissipativityReport dissipativity_check(const DiscreteOperator& op, int trials, std::uint64_t seed) {
    const int m = op.dim();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::uniform_int_distribution<int> pick(0, m - 1);
    std::uniform_int_distribution<int> kind(0, 2);

    DissipativityReport report;
    report.trials = trials;
    report.max_value = -std::numeric_limits<double>::infinity();
    report.tolerance = 1e-12 * std::max(1.0, op.matrix().cwiseAbs().rowwise().sum().maxCoeff());
    const double pi = std::acos(-1.0);

    Vector u(m);
    for (int trial = 0; trial < trials; ++trial) {
        switch (kind(rng)) {
            case 0:
                for (int i = 0; i < m; ++i) u[i] = normal(rng);
                break;
            case 1: {
                u.setZero();
                for (int k = 0; k < 6; ++k) {
                    const double c = normal(rng) / (1.0 + k);
                    for (int i = 0; i < m; ++i) u[i] += c * std::cos(pi * k * op.grid().node(i));
                }
                break;
            }
            default:
                for (int i = 0; i < m; ++i) u[i] = 0.1 * normal(rng);
                u[pick(rng)] += (normal(rng) > 0 ? 1.0 : -1.0) * 5.0;
                break;
        }
        const double norm = sup_norm(u);
        if (norm == 0.0) continue;
        u /= norm;
        Eigen::Index arg = 0;
        u.cwiseAbs().maxCoeff(&arg);
        const double value = (u[arg] > 0 ? 1.0 : -1.0) * op.matrix().row(arg).dot(u);
        if (value > report.max_value) {
            report.max_value = value;
            if (value > report.tolerance) report.witness = u;
        }
    }
    report.dissipative = report.max_value <= report.tolerance;
    return report;
}

EllipticSpec PerturbationFamily::perturbed_coefficients(const EllipticSpec& base, double n) const {
    if (std::isinf(n) || kind == FamilyKind::Identity || kind == FamilyKind::Yosida) return base;
    const double step = delta / n;
    const GridSpec& grid = base.grid();
    return EllipticSpec{GridFunction(grid, base.a.values() * (1.0 + step)),
                        GridFunction(grid, base.b.values().array() + step),
                        GridFunction(grid, base.c.values().array() - step), base.kappa};
}

DiscreteOperator PerturbationFamily::member(const EllipticSpec& base, double n) const {
    if (!(n > 0.0)) throw Error("perturbation family: index must be positive");
    if (std::isinf(n) || kind == FamilyKind::Identity) return build_neumann_operator(base);
    switch (kind) {
        case FamilyKind::Yosida: return yosida_approximand(build_neumann_operator(base), n);
        case FamilyKind::Coefficient: return build_neumann_operator(perturbed_coefficients(base, n));
        case FamilyKind::Joint: return yosida_approximand(build_neumann_operator(perturbed_coefficients(base, n)), n);
        case FamilyKind::Identity: break;
    }
    return build_neumann_operator(base);
}

FamilyKind parse_family(const std::string& name) {
    if (name == "identity") return FamilyKind::Identity;
    if (name == "yosida") return FamilyKind::Yosida;
    if (name == "coefficient") return FamilyKind::Coefficient;
    if (name == "joint") return FamilyKind::Joint;
    throw Error("unknown perturbation family '" + name + "'");
}

std::string family_name(FamilyKind kind) {
    switch (kind) {
        case FamilyKind::Identity: return "identity";
        case FamilyKind::Yosida: return "yosida";
        case FamilyKind::Coefficient: return "coefficient";
        case FamilyKind::Joint: return "joint";
    }
    return "unknown";
}

}  // namespace rdlab
