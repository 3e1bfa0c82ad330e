#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rdlab/grid.hpp"
#include "rdlab/solver.hpp"

namespace rdlab {

/// Subdifferential of the grid sup-norm at u, normalized so that
/// <u, x*> = ||u||_inf. Each argmax index i gives x*: v -> sign(u_i) v_i.
struct SubdiffDescriptor {
    std::vector<int> indices;
    std::vector<int> signs;
    bool degenerate = false;  // more than one argmax, or u = 0
    double norm = 0.0;

    /// <v, x*_k> for the k-th extreme functional.
    double apply(std::size_t k, const Vector& v) const { return signs[k] * v[indices[k]]; }
};

/// Argmax set within 1e-12 ||u|| of the maximum. u = 0 yields every index
/// with sign +1, flagged degenerate.
SubdiffDescriptor norm_subdifferential(const Vector& u);

enum class Side { Plus, Minus };

/// d+/- ||u(t)|| given u and u'(t): max (Plus) or min (Minus) of <du, x*>.
double one_sided_norm_derivative(const Vector& u, const Vector& du, Side side);

/// Constants of the sign condition <F(t, x + y), x*> <= a'(1 + ||y||)^N + b'||x||.
struct GronwallConstants {
    double a_prime = 0.0;
    double b_prime = 0.0;
    double n = 1.0;
};

/// e^{b't}(||x|| + int_0^t a'(1 + ||v(s)||)^N ds) at each sample time,
/// integral by the trapezoid rule. `times` must start at 0.
std::vector<double> gronwall_bound(const GronwallConstants& constants, double x_norm,
                                   const std::vector<double>& times, const std::vector<double>& v_sup);

struct PathVerdict {
    bool pass = true;
    double max_excess = 0.0;  // max over samples of ||u|| - bound (may be negative)
    double slack = 0.0;
    std::optional<double> witness_time;
    std::string detail;
};

/// Checks ||u(t)|| <= bound(t) + slack at every stored snapshot of the record.
/// `v_sup` is sampled at the record's times.
PathVerdict check_gronwall_on_path(const PathRecord& record, const std::vector<double>& v_sup,
                                   const GronwallConstants& constants, double slack);

/// Empirical slack: 2 max_t | ||u_dt(t)|| - ||u_dt/2(t)|| | / dt over the
/// snapshot times shared by a refinement pair.
double refinement_slack_constant(const PathRecord& coarse, const PathRecord& fine, double dt);

/// (4a''/b'')^{1/m}(1 + v_sup)
double dissbound_value(double a2, double b2, double m, double v_sup);

/// sup_t ||u(t)|| <= dissbound_value + slack on a record started from u = 0.
PathVerdict check_dissbound_on_path(const PathRecord& record, double v_sup, double a2, double b2, double m,
                                    double slack);

using ScalarRhs = std::function<double(double t, double x)>;

/// Adaptive Dormand-Prince integration to tolerance 1e-10 (absolute and
/// relative), reporting x at each requested time. Times must be monotone
/// starting at t0 (either direction). Throws when the step size underflows.
std::vector<double> integrate_scalar(const ScalarRhs& f, double t0, double x0, const std::vector<double>& times);

/// psi' = -b psi^m + gamma^m, with psi^m read as sign(psi)|psi|^m.
struct ScalarODEProblem {
    double b = 1.0;
    double gamma = 0.0;
    double m = 1.0;
    double t0 = 0.0;
    double psi0 = 0.0;

    double equilibrium() const;
    double rhs(double psi) const;
};

/// psi at the requested times (monotone, beginning at or after t0).
std::vector<double> scalar_ode_solve(const ScalarODEProblem& problem, const std::vector<double>& times);

struct SampledFunction {
    std::vector<double> t;
    std::vector<double> x;
};

enum class ComparisonDirection { Forward, Backward };
enum class ComparisonOutcome { Pass, Violation, Inconclusive };

struct ComparisonVerdict {
    ComparisonOutcome outcome = ComparisonOutcome::Pass;
    std::optional<double> witness_time;
    std::string detail;
};

/// Audits that u_plus is a super-solution and u_minus a sub-solution of
/// x' = f(t, x) at the sample resolution (trapezoid difference quotients,
/// absolute tolerance `tol`), then checks the ordering conclusion. Forward:
/// u+(t0) > u-(t0) implies u+ > u- on [t0, end]. Backward: u+(t0) <= u-(t0)
/// implies u+ <= u- on [start, t0]. t0 must be a sample time.
ComparisonVerdict comparison_check(const ScalarRhs& f, const SampledFunction& u_plus, const SampledFunction& u_minus,
                                   double t0, ComparisonDirection direction, double tol = 1e-6);

std::string outcome_name(ComparisonOutcome outcome);

/// Super- and sub-solutions of x' = f on `times`, integrating f + margin and
/// f - margin through t0. Forward starts u+ at x0 + offset and u- at x0;
/// Backward starts u+ at x0 - offset and u- at x0.
std::pair<SampledFunction, SampledFunction> certified_pair(const ScalarRhs& f, double margin, double offset, double x0,
                                                           double t0, const std::vector<double>& times,
                                                           ComparisonDirection direction);

}  // namespace rdlab
