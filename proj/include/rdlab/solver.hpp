#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rdlab/coefficients.hpp"
#include "rdlab/grid.hpp"
#include "rdlab/noise.hpp"
#include "rdlab/operator.hpp"

namespace rdlab {

enum class Scheme { ExponentialEuler, SemiImplicitEuler };

Scheme parse_scheme(const std::string& name);
std::string scheme_name(Scheme scheme);

struct SolverConfig {
    double horizon = 1.0;
    double dt = 1e-3;
    Scheme scheme = Scheme::ExponentialEuler;
    std::vector<double> ladder;  // strictly increasing; empty for untruncated bookkeeping only
    double cap = 1e8;
    double p = 4.0;
    int stride = 1;

    /// Throws when dt does not divide T (to 1e-9), the ladder is not strictly
    /// increasing or the cap does not exceed the top radius.
    void validate() const;
    int steps() const;
    double time_at(int step) const { return static_cast<double>(step) * dt; }
};

/// Linear part of one step, precomputed per (operator, dt, scheme).
class Stepper {
public:
    Stepper(const DiscreteOperator& op, double dt, Scheme scheme);

    double dt() const { return dt_; }
    Scheme scheme() const { return scheme_; }
    const DiscreteOperator& op() const { return op_; }
    /// Exponential Euler: out = S(dt) rhs. Semi-implicit: solves (I - dt A) out = rhs.
    void propagate(const Vector& rhs, Vector& out) const;

private:
    DiscreteOperator op_;
    double dt_;
    Scheme scheme_;
    Matrix propagator_;
    Eigen::PartialPivLU<Matrix> implicit_;
};

/// Drift F, diffusion g (empty map means g = 0) and the noise model.
struct Dynamics {
    FieldMap drift;
    FieldMap diffusion;
    const NoiseModel* noise = nullptr;
};

struct MildState {
    double t = 0.0;
    Vector u;
    NoiseStream stream;
};

struct StepOutcome {
    MildState state;
    bool exploded = false;
    double blowup_time = 0.0;  // valid when exploded
};

/// One step of the scheme with optionally truncated fields. The state passed
/// in must be finite; a non-finite result is reported as explosion.
StepOutcome step(const MildState& state, const Stepper& stepper, const Dynamics& dynamics,
                 const std::optional<TruncationPolicy>& policy = std::nullopt, double cap = 1e8);
StepOutcome step(const MildState& state, const DiscreteOperator& op, const Dynamics& dynamics, double dt,
                 Scheme scheme = Scheme::ExponentialEuler,
                 const std::optional<TruncationPolicy>& policy = std::nullopt);

struct PathRecord {
    std::vector<double> times;
    std::vector<Vector> states;
    double running_max = 0.0;  // over every step, not only stored snapshots
    std::vector<double> ladder;
    std::vector<double> crossings;  // rho^(r); T when never crossed
    std::vector<bool> crossed;
    double sigma = 0.0;
    bool exploded = false;
    double horizon = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t path = 0;
    std::optional<double> truncation_radius;

    /// Crossing time of a ladder radius; throws when r is not on the ladder.
    double crossing(double r) const;
    bool crossed_radius(double r) const;
};

PathRecord run_path(const SolverConfig& config, const Stepper& stepper, const Dynamics& dynamics, const Vector& xi,
                    NoiseStream stream, const std::optional<TruncationPolicy>& policy = std::nullopt);

class ConsistencyError : public Error {
public:
    using Error::Error;
};

struct TruncatedPairReport {
    PathRecord small;  // radius r
    PathRecord large;  // radius s
    double rho = 0.0;  // rho^(r) of the r-truncated run
    int crossing_index = -1;    // snapshot index at which rho^(r) is declared; -1 if never
    int first_difference = -1;  // first snapshot index where the records differ; -1 if never
};

/// Runs the r- and s-truncated dynamics on the same noise (stride forced to 1)
/// and checks bitwise agreement through the step declaring rho^(r). Throws
/// ConsistencyError on disagreement.
TruncatedPairReport run_truncated_pair(const SolverConfig& config, double r, double s, const Stepper& stepper,
                                       const Dynamics& dynamics, const Vector& xi, NoiseStream stream);

/// The agreement audit of run_truncated_pair on records already computed with
/// stride 1 from the same datum and stream.
TruncatedPairReport audit_truncated_pair(PathRecord small, PathRecord large, double r);

/// Maximal solution by patching truncated runs up the ladder, finishing with
/// the untruncated dynamics. Throws ConsistencyError when consecutive levels
/// disagree before the lower level's exit time.
PathRecord assemble_maximal(const SolverConfig& config, const Stepper& stepper, const Dynamics& dynamics,
                            const Vector& xi, NoiseStream stream);

bool bitwise_equal(const Vector& a, const Vector& b);
/// First index where the stored trajectories differ (time or state); -1 if none
/// within the common length.
int first_difference(const PathRecord& a, const PathRecord& b);

struct MomentEstimate {
    double value = 0.0;
    double std_error = 0.0;
    int samples = 0;
    int exploded = 0;
};

/// Mean of (running max)^p with jackknife standard error. Exploded records
/// make the estimate +inf. Summation runs in record order.
MomentEstimate estimate_moment(const std::vector<PathRecord>& records, double p);
MomentEstimate estimate_moment(const std::vector<double>& running_max, const std::vector<bool>& exploded, double p);

/// Jackknife mean and standard error of a sample, summed in order.
std::pair<double, double> jackknife_mean(const std::vector<double>& values);

}  // namespace rdlab
