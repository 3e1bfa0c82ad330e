#include "rdlab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

namespace rdlab {

Scheme parse_scheme(const std::string& name) {
    if (name == "exponential_euler") return Scheme::ExponentialEuler;
    if (name == "semi_implicit_euler") return Scheme::SemiImplicitEuler;
    throw Error("unknown scheme '" + name + "'");
}

std::string scheme_name(Scheme scheme) {
    return scheme == Scheme::ExponentialEuler ? "exponential_euler" : "semi_implicit_euler";
}

void SolverConfig::validate() const {
    if (!(horizon > 0.0)) throw Error("solver: horizon must be positive");
    if (!(dt > 0.0)) throw Error("solver: step must be positive");
    const double ratio = horizon / dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) throw Error("solver: dt must divide T");
    for (std::size_t i = 1; i < ladder.size(); ++i) {
        if (!(ladder[i] > ladder[i - 1])) throw Error("solver: ladder radii must be strictly increasing");
    }
    if (!ladder.empty() && !(ladder.front() > 0.0)) throw Error("solver: ladder radii must be positive");
    if (!ladder.empty() && !(cap > ladder.back())) throw Error("solver: cap must exceed the top ladder radius");
    if (!(p > 0.0)) throw Error("solver: moment exponent must be positive");
    if (stride < 1) throw Error("solver: record stride must be at least 1");
}

int SolverConfig::steps() const { return static_cast<int>(std::llround(horizon / dt)); }

Stepper::Stepper(const DiscreteOperator& op, double dt, Scheme scheme) : op_(op), dt_(dt), scheme_(scheme) {
    if (!(dt > 0.0)) throw Error("stepper: dt must be positive");
    if (scheme == Scheme::ExponentialEuler) {
        propagator_ = semigroup_matrix(op, dt);
    } else {
        const int m = op.dim();
        implicit_.compute(Matrix::Identity(m, m) - dt * op.matrix());
    }
}

void Stepper::propagate(const Vector& rhs, Vector& out) const {
    if (scheme_ == Scheme::ExponentialEuler) {
        out.noalias() = propagator_ * rhs;
    } else {
        out = implicit_.solve(rhs);
    }
}

namespace {

struct Workspace {
    Vector scratch;
    Vector drift;
    Vector g;
    Vector dw;
    Vector rhs;
};

// Shared by every caller so truncated and untruncated dynamics take the same
// arithmetic path inside the ball.
void advance(const Stepper& stepper, const Dynamics& dyn, const std::optional<TruncationPolicy>& policy, double t,
             const Vector& u, const NoiseStream& stream, Workspace& ws, Vector& out) {
    const Vector& arg = policy ? retract(u, *policy, ws.scratch) : u;
    const double dt = stepper.dt();
    dyn.drift(t, arg, ws.drift);
    ws.rhs = u + dt * ws.drift;
    if (dyn.diffusion && dyn.noise != nullptr) {
        dyn.noise->draw(stream, dt, ws.dw);
        dyn.diffusion(t, arg, ws.g);
        ws.rhs += ws.g.cwiseProduct(ws.dw);
    }
    stepper.propagate(ws.rhs, out);
}

}  // namespace

StepOutcome step(const MildState& state, const Stepper& stepper, const Dynamics& dynamics,
                 const std::optional<TruncationPolicy>& policy, double cap) {
    if (!all_finite(state.u)) throw Error("step: state must be finite");
    Workspace ws;
    StepOutcome outcome;
    outcome.state.stream = state.stream;
    advance(stepper, dynamics, policy, state.t, state.u, state.stream, ws, outcome.state.u);
    outcome.state.t = state.t + stepper.dt();
    ++outcome.state.stream.step;
    if (!(sup_norm(outcome.state.u) <= cap)) {
        outcome.exploded = true;
        outcome.blowup_time = outcome.state.t;
        outcome.state.u = state.u;
        outcome.state.t = state.t;
    }
    return outcome;
}

StepOutcome step(const MildState& state, const DiscreteOperator& op, const Dynamics& dynamics, double dt,
                 Scheme scheme, const std::optional<TruncationPolicy>& policy) {
    return step(state, Stepper(op, dt, scheme), dynamics, policy);
}

double PathRecord::crossing(double r) const {
    for (std::size_t i = 0; i < ladder.size(); ++i) {
        if (ladder[i] == r) return crossings[i];
    }
    throw Error("PathRecord: radius not on the ladder");
}

bool PathRecord::crossed_radius(double r) const {
    for (std::size_t i = 0; i < ladder.size(); ++i) {
        if (ladder[i] == r) return crossed[i];
    }
    throw Error("PathRecord: radius not on the ladder");
}

PathRecord run_path(const SolverConfig& config, const Stepper& stepper, const Dynamics& dynamics, const Vector& xi,
                    NoiseStream stream, const std::optional<TruncationPolicy>& policy) {
    config.validate();
    if (std::abs(stepper.dt() - config.dt) > 1e-15 * config.dt) throw Error("run_path: stepper dt differs from config");
    if (!all_finite(xi)) throw Error("run_path: initial datum must be finite");
    if (xi.size() != stepper.op().dim()) throw Error("run_path: initial datum has the wrong size");

    const int steps = config.steps();
    PathRecord rec;
    rec.ladder = config.ladder;
    rec.crossings.assign(config.ladder.size(), config.horizon);
    rec.crossed.assign(config.ladder.size(), false);
    rec.horizon = config.horizon;
    rec.seed = stream.seed;
    rec.path = stream.path;
    if (policy) rec.truncation_radius = policy->radius;
    rec.times.reserve(steps / config.stride + 2);
    rec.states.reserve(steps / config.stride + 2);
    rec.times.push_back(0.0);
    rec.states.push_back(xi);
    rec.running_max = sup_norm(xi);
    rec.sigma = config.horizon;
    // a datum already outside the ball exits at t = 0
    for (std::size_t i = 0; i < rec.ladder.size(); ++i) {
        if (!(rec.running_max <= rec.ladder[i])) {
            rec.crossed[i] = true;
            rec.crossings[i] = 0.0;
        }
    }

    Workspace ws;
    Vector u = xi;
    Vector next(xi.size());
    const std::uint64_t first_step = stream.step;
    for (int k = 0; k < steps; ++k) {
        stream.step = first_step + static_cast<std::uint64_t>(k);
        advance(stepper, dynamics, policy, config.time_at(k), u, stream, ws, next);
        const double t_next = config.time_at(k + 1);
        const double norm = sup_norm(next);
        for (std::size_t i = 0; i < rec.ladder.size(); ++i) {
            if (!rec.crossed[i] && !(norm <= rec.ladder[i])) {
                rec.crossed[i] = true;
                rec.crossings[i] = t_next;
            }
        }
        if (!(norm <= config.cap)) {
            rec.exploded = true;
            rec.sigma = t_next;
            break;
        }
        u.swap(next);
        rec.running_max = std::max(rec.running_max, norm);
        if ((k + 1) % config.stride == 0 || k + 1 == steps) {
            rec.times.push_back(t_next);
            rec.states.push_back(u);
        }
    }
    return rec;
}

bool bitwise_equal(const Vector& a, const Vector& b) {
    return a.size() == b.size() &&
           std::memcmp(a.data(), b.data(), static_cast<std::size_t>(a.size()) * sizeof(double)) == 0;
}

int first_difference(const PathRecord& a, const PathRecord& b) {
    const std::size_t n = std::min(a.states.size(), b.states.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (a.times[i] != b.times[i] || !bitwise_equal(a.states[i], b.states[i])) return static_cast<int>(i);
    }
    return -1;
}

namespace {

// Index of the first stored snapshot with t >= limit that carries the
// crossing, i.e. the last index that must agree.
int last_index_through(const PathRecord& rec, double limit) {
    int last = -1;
    for (std::size_t i = 0; i < rec.times.size(); ++i) {
        if (rec.times[i] <= limit) last = static_cast<int>(i);
    }
    return last;
}

void require_agreement(const PathRecord& lower, const PathRecord& upper, int through, const std::string& what) {
    for (int i = 0; i <= through; ++i) {
        if (i >= static_cast<int>(lower.states.size()) || i >= static_cast<int>(upper.states.size()) ||
            lower.times[i] != upper.times[i] || !bitwise_equal(lower.states[i], upper.states[i])) {
            std::ostringstream msg;
            msg << what << ": trajectories differ at snapshot " << i << " (t = "
                << (i < static_cast<int>(lower.times.size()) ? lower.times[i] : std::nan(""))
                << ") before the lower level's exit at snapshot " << through << " (seed " << lower.seed << ", path "
                << lower.path << ")";
            throw ConsistencyError(msg.str());
        }
    }
}

}  // namespace

TruncatedPairReport audit_truncated_pair(PathRecord small, PathRecord large, double r) {
    if (!small.truncation_radius || !large.truncation_radius || *small.truncation_radius != r ||
        !(r <= *large.truncation_radius)) {
        throw Error("audit_truncated_pair: records must be r- and s-truncated with r <= s");
    }
    TruncatedPairReport report;
    report.small = std::move(small);
    report.large = std::move(large);
    report.rho = report.small.horizon;
    const int n = static_cast<int>(report.small.states.size());
    for (int i = 0; i < n; ++i) {
        if (!(sup_norm(report.small.states[i]) <= r)) {
            report.crossing_index = i;
            report.rho = report.small.times[i];
            break;
        }
    }
    report.first_difference = first_difference(report.small, report.large);
    const int through = report.crossing_index >= 0 ? report.crossing_index : n - 1;
    require_agreement(report.small, report.large, through, "run_truncated_pair");
    return report;
}

TruncatedPairReport run_truncated_pair(const SolverConfig& config, double r, double s, const Stepper& stepper,
                                       const Dynamics& dynamics, const Vector& xi, NoiseStream stream) {
    if (!(r > 0.0 && r <= s)) throw Error("run_truncated_pair: need 0 < r <= s");
    SolverConfig audit = config;
    audit.stride = 1;
    return audit_truncated_pair(run_path(audit, stepper, dynamics, xi, stream, TruncationPolicy{r}),
                                run_path(audit, stepper, dynamics, xi, stream, TruncationPolicy{s}), r);
}

PathRecord assemble_maximal(const SolverConfig& config, const Stepper& stepper, const Dynamics& dynamics,
                            const Vector& xi, NoiseStream stream) {
    if (config.ladder.empty()) throw Error("assemble_maximal: ladder must be nonempty");
    const std::size_t levels = config.ladder.size();

    std::vector<PathRecord> runs;
    std::vector<double> exits;
    runs.push_back(run_path(config, stepper, dynamics, xi, stream, TruncationPolicy{config.ladder[0]}));
    for (std::size_t level = 0; level < levels; ++level) {
        const PathRecord& current = runs.back();
        if (!current.crossed[level]) break;
        const double exit = current.crossings[level];
        exits.push_back(exit);
        std::optional<TruncationPolicy> next_policy;
        if (level + 1 < levels) next_policy = TruncationPolicy{config.ladder[level + 1]};
        runs.push_back(run_path(config, stepper, dynamics, xi, stream, next_policy));
        require_agreement(runs[level], runs.back(), last_index_through(runs[level], exit), "assemble_maximal");
    }

    PathRecord assembled = runs.back();
    assembled.truncation_radius.reset();
    // patch: level j supplies (exit_{j-1}, exit_j]
    double from = -1.0;
    for (std::size_t j = 0; j + 1 < runs.size(); ++j) {
        const PathRecord& part = runs[j];
        for (std::size_t i = 0; i < part.times.size() && i < assembled.times.size(); ++i) {
            if (part.times[i] > from && part.times[i] <= exits[j]) assembled.states[i] = part.states[i];
        }
        assembled.crossings[j] = part.crossings[j];
        assembled.crossed[j] = part.crossed[j];
        from = exits[j];
    }
    return assembled;
}

std::pair<double, double> jackknife_mean(const std::vector<double>& values) {
    const std::size_t n = values.size();
    if (n == 0) throw Error("jackknife: empty sample");
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / static_cast<double>(n);
    if (n < 2) return {mean, std::numeric_limits<double>::quiet_NaN()};
    double loo_mean = 0.0;
    std::vector<double> loo(n);
    for (std::size_t i = 0; i < n; ++i) {
        loo[i] = (sum - values[i]) / static_cast<double>(n - 1);
        loo_mean += loo[i];
    }
    loo_mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : loo) ss += (v - loo_mean) * (v - loo_mean);
    return {mean, std::sqrt(static_cast<double>(n - 1) / static_cast<double>(n) * ss)};
}

MomentEstimate estimate_moment(const std::vector<double>& running_max, const std::vector<bool>& exploded, double p) {
    if (running_max.empty()) throw Error("estimate_moment: empty collection");
    MomentEstimate est;
    est.samples = static_cast<int>(running_max.size());
    est.exploded = static_cast<int>(std::count(exploded.begin(), exploded.end(), true));
    if (est.exploded > 0) {
        est.value = std::numeric_limits<double>::infinity();
        est.std_error = std::numeric_limits<double>::infinity();
        return est;
    }
    std::vector<double> powered(running_max.size());
    for (std::size_t i = 0; i < running_max.size(); ++i) powered[i] = std::pow(running_max[i], p);
    const auto [mean, se] = jackknife_mean(powered);
    est.value = mean;
    est.std_error = se;
    return est;
}

MomentEstimate estimate_moment(const std::vector<PathRecord>& records, double p) {
    std::vector<double> maxima;
    std::vector<bool> exploded;
    for (const auto& r : records) {
        maxima.push_back(r.running_max);
        exploded.push_back(r.exploded);
    }
    return estimate_moment(maxima, exploded, p);
}

}  // namespace rdlab
