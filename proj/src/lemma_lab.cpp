#include "rdlab/lemma_lab.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/numeric/odeint.hpp>

namespace rdlab {

SubdiffDescriptor norm_subdifferential(const Vector& u) {
    if (u.size() == 0) throw Error("norm_subdifferential: empty vector");
    SubdiffDescriptor d;
    d.norm = sup_norm(u);
    if (!std::isfinite(d.norm)) throw Error("norm_subdifferential: non-finite vector");
    const double cut = d.norm - 1e-12 * d.norm;
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        if (d.norm == 0.0 || std::abs(u[i]) >= cut) {
            d.indices.push_back(static_cast<int>(i));
            d.signs.push_back(u[i] < 0.0 ? -1 : 1);
        }
    }
    d.degenerate = d.norm == 0.0 || d.indices.size() > 1;
    return d;
}

double one_sided_norm_derivative(const Vector& u, const Vector& du, Side side) {
    if (u.size() != du.size()) throw Error("one_sided_norm_derivative: size mismatch");
    const auto d = norm_subdifferential(u);
    double best = d.apply(0, du);
    for (std::size_t k = 1; k < d.indices.size(); ++k) {
        const double v = d.apply(k, du);
        best = side == Side::Plus ? std::max(best, v) : std::min(best, v);
    }
    return best;
}

std::vector<double> gronwall_bound(const GronwallConstants& c, double x_norm, const std::vector<double>& times,
                                   const std::vector<double>& v_sup) {
    if (times.empty() || times.size() != v_sup.size()) throw Error("gronwall_bound: times and v_sup must match");
    if (times.front() != 0.0) throw Error("gronwall_bound: samples must start at t = 0");
    if (c.a_prime < 0.0 || c.b_prime < 0.0 || x_norm < 0.0) throw Error("gronwall_bound: negative constant");
    std::vector<double> out(times.size());
    double integral = 0.0;
    double prev = c.a_prime * std::pow(1.0 + v_sup[0], c.n);
    out[0] = x_norm;
    for (std::size_t i = 1; i < times.size(); ++i) {
        const double cur = c.a_prime * std::pow(1.0 + v_sup[i], c.n);
        integral += 0.5 * (times[i] - times[i - 1]) * (prev + cur);
        prev = cur;
        out[i] = std::exp(c.b_prime * times[i]) * (x_norm + integral);
    }
    return out;
}

namespace {

PathVerdict check_against(const PathRecord& record, const std::vector<double>& bound, double slack,
                          const char* what) {
    PathVerdict v;
    v.slack = slack;
    v.max_excess = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < record.states.size(); ++i) {
        const double excess = sup_norm(record.states[i]) - bound[i];
        if (excess > v.max_excess) v.max_excess = excess;
        if (!(excess <= slack) && v.pass) {
            v.pass = false;
            v.witness_time = record.times[i];
            std::ostringstream msg;
            msg << what << " violated at t = " << record.times[i] << ": norm " << sup_norm(record.states[i])
                << " exceeds bound " << bound[i] << " + slack " << slack;
            v.detail = msg.str();
        }
    }
    if (record.exploded) {
        v.pass = false;
        v.witness_time = record.sigma;
        v.detail = std::string(what) + ": trajectory exploded";
    }
    return v;
}

}  // namespace

PathVerdict check_gronwall_on_path(const PathRecord& record, const std::vector<double>& v_sup,
                                   const GronwallConstants& constants, double slack) {
    if (record.states.empty()) throw Error("check_gronwall_on_path: empty record");
    const auto bound = gronwall_bound(constants, sup_norm(record.states.front()), record.times, v_sup);
    return check_against(record, bound, slack, "Gronwall bound");
}

double refinement_slack_constant(const PathRecord& coarse, const PathRecord& fine, double dt) {
    double worst = 0.0;
    std::size_t j = 0;
    for (std::size_t i = 0; i < coarse.times.size(); ++i) {
        while (j < fine.times.size() && fine.times[j] < coarse.times[i] - 1e-12) ++j;
        if (j == fine.times.size()) break;
        if (std::abs(fine.times[j] - coarse.times[i]) > 1e-12) continue;
        worst = std::max(worst, std::abs(sup_norm(coarse.states[i]) - sup_norm(fine.states[j])));
    }
    return 2.0 * worst / dt;
}

double dissbound_value(double a2, double b2, double m, double v_sup) {
    if (!(a2 > 0.0 && b2 > 0.0 && m > 0.0) || v_sup < 0.0) throw Error("dissbound_value: constants must be positive");
    return std::pow(4.0 * a2 / b2, 1.0 / m) * (1.0 + v_sup);
}

PathVerdict check_dissbound_on_path(const PathRecord& record, double v_sup, double a2, double b2, double m,
                                    double slack) {
    if (record.states.empty()) throw Error("check_dissbound_on_path: empty record");
    if (sup_norm(record.states.front()) != 0.0) throw Error("check_dissbound_on_path: record must start at u = 0");
    const std::vector<double> bound(record.states.size(), dissbound_value(a2, b2, m, v_sup));
    return check_against(record, bound, slack, "dissipative bound");
}

std::vector<double> integrate_scalar(const ScalarRhs& f, double t0, double x0, const std::vector<double>& times) {
    namespace odeint = boost::numeric::odeint;
    using stepper_type = odeint::runge_kutta_dopri5<double, double, double, double, odeint::vector_space_algebra>;
    if (times.empty()) return {};
    std::vector<double> grid;
    grid.reserve(times.size() + 1);
    grid.push_back(t0);
    for (double t : times) {
        if (t != t0 || grid.size() > 1) grid.push_back(t);
    }
    const double span = grid.back() - t0;
    std::vector<double> out;
    out.reserve(times.size());
    if (times.front() == t0) out.push_back(x0);
    if (span == 0.0) {
        out.resize(times.size(), x0);
        return out;
    }
    const double direction = span > 0 ? 1.0 : -1.0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if ((grid[i] - grid[i - 1]) * direction < 0) throw Error("integrate_scalar: times must be monotone");
    }
    double x = x0;
    auto rhs = [&](const double& state, double& deriv, double t) { deriv = f(t, state); };
    bool first = true;
    auto observe = [&](const double& state, double) {
        if (first) {
            first = false;
            return;
        }
        out.push_back(state);
    };
    try {
        odeint::integrate_times(odeint::make_controlled<stepper_type>(1e-10, 1e-10), rhs, x, grid.begin(),
                                grid.end(), direction * std::abs(span) * 1e-3, observe,
                                odeint::max_step_checker(100000));
    } catch (const std::exception& e) {
        throw Error(std::string("integrate_scalar: step size underflow or no progress (") + e.what() + ")");
    }
    for (double v : out) {
        if (!std::isfinite(v)) throw Error("integrate_scalar: solution left the finite range");
    }
    return out;
}

double ScalarODEProblem::equilibrium() const { return std::pow(std::pow(gamma, m) / b, 1.0 / m); }

double ScalarODEProblem::rhs(double psi) const {
    const double p = std::copysign(std::pow(std::abs(psi), m), psi);
    return -b * p + std::pow(gamma, m);
}

std::vector<double> scalar_ode_solve(const ScalarODEProblem& problem, const std::vector<double>& times) {
    if (!(problem.b > 0.0 && problem.m > 0.0) || problem.gamma < 0.0) {
        throw Error("scalar_ode_solve: need b > 0, m > 0, gamma >= 0");
    }
    for (double t : times) {
        if (t < problem.t0) throw Error("scalar_ode_solve: times must not precede t0");
    }
    return integrate_scalar([&](double, double psi) { return problem.rhs(psi); }, problem.t0, problem.psi0, times);
}

std::string outcome_name(ComparisonOutcome outcome) {
    switch (outcome) {
        case ComparisonOutcome::Pass: return "pass";
        case ComparisonOutcome::Violation: return "violation";
        case ComparisonOutcome::Inconclusive: return "inconclusive";
    }
    return "unknown";
}

ComparisonVerdict comparison_check(const ScalarRhs& f, const SampledFunction& u_plus, const SampledFunction& u_minus,
                                   double t0, ComparisonDirection direction, double tol) {
    const auto& t = u_plus.t;
    if (t.size() < 2 || t != u_minus.t || u_plus.x.size() != t.size() || u_minus.x.size() != t.size()) {
        throw Error("comparison_check: samples must share one time grid");
    }
    const auto it = std::find(t.begin(), t.end(), t0);
    if (it == t.end()) throw Error("comparison_check: t0 must be a sample time");
    const std::size_t i0 = static_cast<std::size_t>(it - t.begin());

    ComparisonVerdict verdict;
    for (std::size_t i = 1; i < t.size(); ++i) {
        const double h = t[i] - t[i - 1];
        if (!(h > 0.0)) throw Error("comparison_check: sample times must increase");
        const double dp = (u_plus.x[i] - u_plus.x[i - 1]) / h;
        const double dm = (u_minus.x[i] - u_minus.x[i - 1]) / h;
        const double fp = 0.5 * (f(t[i - 1], u_plus.x[i - 1]) + f(t[i], u_plus.x[i]));
        const double fm = 0.5 * (f(t[i - 1], u_minus.x[i - 1]) + f(t[i], u_minus.x[i]));
        if (dp < fp - tol || dm > fm + tol) {
            verdict.outcome = ComparisonOutcome::Inconclusive;
            verdict.witness_time = t[i];
            std::ostringstream msg;
            msg << "hypothesis fails on [" << t[i - 1] << ", " << t[i] << "]: "
                << (dp < fp - tol ? "u+ is not a super-solution" : "u- is not a sub-solution");
            verdict.detail = msg.str();
            return verdict;
        }
    }

    if (direction == ComparisonDirection::Forward) {
        if (!(u_plus.x[i0] > u_minus.x[i0])) {
            verdict.outcome = ComparisonOutcome::Inconclusive;
            verdict.detail = "premise u+(t0) > u-(t0) does not hold";
            return verdict;
        }
        for (std::size_t i = i0; i < t.size(); ++i) {
            if (!(u_plus.x[i] > u_minus.x[i])) {
                verdict.outcome = ComparisonOutcome::Violation;
                verdict.witness_time = t[i];
                verdict.detail = "ordering lost after t0";
                return verdict;
            }
        }
    } else {
        if (!(u_plus.x[i0] <= u_minus.x[i0])) {
            verdict.outcome = ComparisonOutcome::Inconclusive;
            verdict.detail = "premise u+(t0) <= u-(t0) does not hold";
            return verdict;
        }
        for (std::size_t i = 0; i <= i0; ++i) {
            if (!(u_plus.x[i] <= u_minus.x[i])) {
                verdict.outcome = ComparisonOutcome::Violation;
                verdict.witness_time = t[i];
                verdict.detail = "ordering violated before t0";
                return verdict;
            }
        }
    }
    return verdict;
}

std::pair<SampledFunction, SampledFunction> certified_pair(const ScalarRhs& f, double margin, double offset, double x0,
                                                           double t0, const std::vector<double>& times,
                                                           ComparisonDirection direction) {
    if (!(margin > 0.0 && offset > 0.0)) throw Error("certified_pair: margin and offset must be positive");
    std::vector<double> before, after;
    for (double s : times) (s <= t0 ? before : after).push_back(s);
    auto solve = [&](const ScalarRhs& g, double x) {
        std::vector<double> rev(before.rbegin(), before.rend());
        const auto back = integrate_scalar(g, t0, x, rev);
        std::vector<double> out(back.rbegin(), back.rend());
        const auto fwd = integrate_scalar(g, t0, x, after);
        out.insert(out.end(), fwd.begin(), fwd.end());
        return out;
    };
    const ScalarRhs up = [&](double s, double x) { return f(s, x) + margin; };
    const ScalarRhs down = [&](double s, double x) { return f(s, x) - margin; };
    const double plus0 = direction == ComparisonDirection::Forward ? x0 + offset : x0 - offset;
    return {SampledFunction{times, solve(up, plus0)}, SampledFunction{times, solve(down, x0)}};
}

}  // namespace rdlab
