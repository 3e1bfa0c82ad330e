#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>

#include "rdlab/grid.hpp"

namespace rdlab {

/// Coefficients of a u'' + b u' + c u on the unit interval.
struct EllipticSpec {
    GridFunction a;
    GridFunction b;
    GridFunction c;
    double kappa;

    static EllipticSpec constant(GridSpec grid, double a, double b, double c, double kappa = 0.0);
    const GridSpec& grid() const { return a.grid(); }
};

enum class FirstOrderScheme { Central, Upwind };

/// Central differences keep the discrete maximum principle while the cell
/// Peclet number h max|b| / (2 min a) stays below one.
FirstOrderScheme choose_first_order_scheme(const EllipticSpec& spec);

/// Cached eigendecomposition. Symmetric operators carry a real orthonormal
/// basis; other diagonalizable operators carry complex eigenvectors plus the
/// inverse basis.
struct SpectralData {
    bool real = true;
    Vector eigenvalues;          // real case
    Matrix vectors;              // real case, orthonormal columns
    Eigen::VectorXcd complex_eigenvalues;
    Eigen::MatrixXcd right;      // complex case
    Eigen::MatrixXcd left_inverse;
    double basis_condition = 1.0;
};

class DiscreteOperator {
public:
    /// Takes ownership of the matrix; computes spectral data eagerly. The
    /// operator is immutable afterwards and safe to share across threads.
    DiscreteOperator(GridSpec grid, Matrix matrix);

    const GridSpec& grid() const { return grid_; }
    const Matrix& matrix() const { return matrix_; }
    int dim() const { return static_cast<int>(matrix_.rows()); }
    bool symmetric() const { return symmetric_; }
    /// Null when the matrix is numerically defective.
    const SpectralData* spectral() const { return spectral_.get(); }
    /// max Re(lambda); falls back to a Gershgorin estimate without spectral data.
    double spectral_bound() const;

    Vector apply(const Vector& x) const { return matrix_ * x; }
    GridFunction apply(const GridFunction& x) const;

private:
    GridSpec grid_;
    Matrix matrix_;
    bool symmetric_ = false;
    std::shared_ptr<const SpectralData> spectral_;
};

DiscreteOperator build_neumann_operator(const EllipticSpec& spec);

/// Solves (lambda - A) y = x. Throws on (near-)singular systems.
GridFunction resolvent_apply(const DiscreteOperator& op, double lambda, const GridFunction& x);
Matrix resolvent_matrix(const DiscreteOperator& op, double lambda);

/// Scaling-and-squaring with a degree-13 Pade approximant.
Matrix expm(const Matrix& a);

enum class SemigroupMethod { Auto, Spectral, MatrixExponential };

/// e^{tA} as a matrix. Auto uses the spectral route for symmetric operators.
Matrix semigroup_matrix(const DiscreteOperator& op, double t, SemigroupMethod method = SemigroupMethod::Auto);
GridFunction semigroup_apply(const DiscreteOperator& op, double t, const GridFunction& x,
                             SemigroupMethod method = SemigroupMethod::Auto);

struct FractionalNormSpec {
    double theta = 0.0;
    double shift = 1.0;  // w'

    /// Shift 1 + max(0, spectral bound).
    static FractionalNormSpec with_default_shift(const DiscreteOperator& op, double theta);
};

enum class PowerSign { Positive = 1, Negative = -1 };

/// (w' - A)^{+-theta} x via spectral calculus.
GridFunction fractional_power_apply(const DiscreteOperator& op, const FractionalNormSpec& frac, PowerSign sign,
                                    const GridFunction& x);
Vector fractional_power_apply(const DiscreteOperator& op, const FractionalNormSpec& frac, PowerSign sign,
                              const Vector& x);

/// n^2 R(n, A) - n
DiscreteOperator yosida_approximand(const DiscreteOperator& op, double n);

struct SupNorm {};
/// ||(w' - A_ref)^theta y||_{L^q}
struct FractionalNorm {
    FractionalNormSpec frac;
    double q = 2.0;
};
using DistanceNorm = std::variant<SupNorm, FractionalNorm>;

/// Norm of y measured against the reference operator's scale.
double norm_in(const DiscreteOperator& reference, const DistanceNorm& norm, const Vector& y);

/// max over `samples` equispaced t in [0, T] of ||S_A(t)x - S_B(t)x||, the
/// norm built from opA.
double semigroup_distance(const DiscreteOperator& opA, const DiscreteOperator& opB, double horizon,
                          const GridFunction& x, const DistanceNorm& norm, int samples = 64);

/// max over sampled t in [t_min, T] of ||A S_A(t)x - B S_B(t)x||.
double generator_semigroup_distance(const DiscreteOperator& opA, const DiscreteOperator& opB, double t_min,
                                    double horizon, const GridFunction& x, const DistanceNorm& norm,
                                    int samples = 64);

struct DissipativityReport {
    double max_value = 0.0;  // max over trials of sign(u_i*) (Au)_i* at the argmax i*
    double tolerance = 0.0;
    int trials = 0;
    bool dissipative = false;
    std::optional<Vector> witness;
};

DissipativityReport dissipativity_check(const DiscreteOperator& op, int trials, std::uint64_t seed);

// Perturbation families A_n -> A.

enum class FamilyKind { Identity, Yosida, Coefficient, Joint };

struct PerturbationFamily {
    FamilyKind kind = FamilyKind::Yosida;
    double delta = 1.0;  // coefficient perturbation strength

    /// Operator at index n; n = +inf returns the unperturbed operator.
    DiscreteOperator member(const EllipticSpec& base, double n) const;
    EllipticSpec perturbed_coefficients(const EllipticSpec& base, double n) const;
};

FamilyKind parse_family(const std::string& name);
std::string family_name(FamilyKind kind);

}  // namespace rdlab
