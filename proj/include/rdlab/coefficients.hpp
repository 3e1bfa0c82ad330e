#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rdlab/grid.hpp"

namespace rdlab {

/// Pointwise map u -> F(t, u) on a grid. Must not throw on overflow; callers
/// detect non-finite output.
using FieldMap = std::function<void(double t, const Vector& u, Vector& out)>;

using Coefficient = std::function<double(double t, double x)>;

/// f(t, x, eta) = -a(t, x) eta^{2k+1} + sum_{j=0}^{2k} a_j(t, x) eta^j
struct ReactionSpec {
    int k = 1;
    Coefficient leading;
    std::vector<Coefficient> lower;  // a_0 .. a_{2k}
    bool space_dependent = false;
    bool time_dependent = false;
    std::string name;

    /// Constant coefficients; `lower` is padded with zeros up to degree 2k.
    static ReactionSpec polynomial(int k, double leading, std::vector<double> lower, std::string name = "");

    int degree() const { return 2 * k + 1; }
    double eval(double t, double x, double eta) const;
    /// Ascending coefficients c_0 .. c_{2k+1} of f(t, x, .).
    std::vector<double> coefficients(double t, double x) const;

    /// Sampled (c, C) with c <= a <= C and |a_j| <= C.
    struct Bounds {
        double floor;
        double ceiling;
    };
    Bounds bounds() const;
    /// Empty when the spec satisfies 0 < c <= a <= C, |a_j| <= C.
    std::optional<std::string> violation() const;

    /// (t, x) points used by the scalar audits.
    std::vector<std::pair<double, double>> sample_points() const;
};

GridFunction eval_reaction(const ReactionSpec& spec, double t, const GridFunction& u);

/// Reaction field bound to a grid, coefficient tables precomputed when the
/// spec is time independent.
FieldMap reaction_field(const ReactionSpec& spec, GridSpec grid);

enum class GrowthLaw { Bounded, FractionalGrowth, Linear };

struct DiffusionSpec {
    std::function<double(double t, double x, double eta)> g;
    GrowthLaw law = GrowthLaw::Bounded;
    double c_prime = 1.0;
    double exponent = 0.0;  // 1/N + eps for FractionalGrowth
    std::string name;
    /// (radius, sampled Lipschitz constant on [-r, r])
    std::vector<std::pair<double, double>> lipschitz;

    static DiffusionSpec zero();
    static DiffusionSpec constant(double c);
    static DiffusionSpec fractional(double c, int n, double eps);
    static DiffusionSpec bounded_sigmoid(double c);
    static DiffusionSpec linear(double c);
    /// Audits the declared growth law and fills the Lipschitz table.
    static DiffusionSpec custom(std::function<double(double, double, double)> g, GrowthLaw law, double c_prime,
                                double exponent, std::string name);

    double growth_bound(double eta) const;
    bool is_zero() const { return name == "zero"; }
};

/// g(t, x_i, u_i) per cell.
FieldMap diffusion_field(const DiffusionSpec& spec, GridSpec grid);

struct GrowthVerdict {
    bool ok = true;
    double tightest_c = 0.0;
    std::optional<double> witness;
};

/// Checks |g| <= c' (1 + |eta|)^{1/N + eps} on a log-spaced grid up to 1e4,
/// with c' the spec's declared constant.
GrowthVerdict audit_growth(const DiffusionSpec& spec, int n, double eps);

struct TruncationPolicy {
    double radius;
};

/// F(u) when ||u||_inf <= r, otherwise F(r u / ||u||_inf).
Vector truncate_field(const FieldMap& field, const TruncationPolicy& policy, double t, const Vector& u);

/// Radial retraction onto the sup-norm ball; returns u itself (no copy) inside the ball.
const Vector& retract(const Vector& u, const TruncationPolicy& policy, Vector& scratch);

// Brute-force constant derivation on [-R, R]^2.

struct GridSearch {
    double radius = 10.0;
    double step = 0.01;
    double verify_step = 0.001;
};

struct Witness {
    double eta;
    double zeta;
    double x;
    double lhs;
    double rhs;
};

struct InequalityAudit {
    long long points = 0;
    long long violations = 0;
    std::optional<Witness> witness;
};

/// Sign bound, scalar form: f(eta + zeta) sgn(eta) <= a' (1 + |zeta|^N).
struct SignBound {
    double a_prime;
    int n;
    double brute_minimum;
    InequalityAudit verification;
};

SignBound derive_sign_bound(const ReactionSpec& spec, const GridSearch& search = {});
InequalityAudit verify_sign_bound(const ReactionSpec& spec, double a_prime, int n, double radius, double step);

/// W = [f(eta + zeta) - f(zeta)] sgn(eta) <= a - b |eta|^{2k+1} + c |zeta|^{2k+1}
struct DissipativityTriplet {
    double a;
    double b;
    double c;
};

struct Envelope {
    double a1, a2, b1, b2;
};

/// a1 - b1 eta^{2k+1} <= f <= a2 - b2 eta^{2k+1} on |eta| <= 2R.
Envelope derive_envelope(const ReactionSpec& spec, double radius);
/// a = a2 - a1, b = min(b1, b2), c = max(b1, b2) (1 + sum_{j=1}^{2k} binom(2k+1, j))
DissipativityTriplet closed_form_triplet(const Envelope& env, int k);
InequalityAudit verify_triplet(const ReactionSpec& spec, const DissipativityTriplet& triplet, double radius,
                               double step);

/// Closed-form triplet from the envelope, verified by brute force. Throws with
/// a witness on any violation.
DissipativityTriplet derive_dissipativity_triplet(const ReactionSpec& spec, const GridSearch& search = {});

/// Triplet with b = fraction * min(b1, b2), a = a2 - a1 and c fitted by grid
/// search (inflated 10%, re-verified on the fine grid).
DissipativityTriplet fit_dissipativity_triplet(const ReactionSpec& spec, double b_fraction,
                                               const GridSearch& search = {});

/// Dissipative growth condition: [f(y + x) - f(y)] sgn x <= a''(1 + |y|)^m - b''|x|^m and |f(y)| <= a''(1 + |y|)^m.
struct FppConstants {
    double a2;
    double b2;
    double m;
    DissipativityTriplet triplet;
    InequalityAudit verification;
};

/// Scans b'' over fractions of the envelope slope and keeps the pair with the
/// smallest (4a''/b'')^{1/m}.
FppConstants derive_fpp_constants(const ReactionSpec& spec, const GridSearch& search = {});
InequalityAudit verify_fpp(const ReactionSpec& spec, double a2, double b2, double m, double radius, double step);

double binomial(int n, int k);

}  // namespace rdlab
