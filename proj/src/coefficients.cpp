#include "rdlab/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace rdlab {

namespace {

// Symmetric lattice -R, -R + step, ..., R.
struct Lattice {
    int half;
    double step;

    static Lattice make(double radius, double step) {
        if (!(radius > 0.0 && step > 0.0)) throw Error("grid search: radius and step must be positive");
        const double ratio = radius / step;
        const long long half = std::llround(ratio);
        if (std::abs(static_cast<double>(half) - ratio) > 1e-6 * ratio) {
            throw Error("grid search: step must divide the radius");
        }
        return {static_cast<int>(half), step};
    }
    int count() const { return 2 * half + 1; }
    double at(int i) const { return static_cast<double>(i - half) * step; }
};

// f on the doubled lattice -2R .. 2R; index i + j addresses eta_i + zeta_j.
std::vector<double> tabulate_sum_lattice(const ReactionSpec& spec, double t, double x, const Lattice& lat) {
    std::vector<double> fs(2 * lat.count() - 1);
    for (int k = 0; k < static_cast<int>(fs.size()); ++k) {
        fs[k] = spec.eval(t, x, static_cast<double>(k - 2 * lat.half) * lat.step);
    }
    return fs;
}

double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

std::string describe(const Witness& w) {
    std::ostringstream out;
    out << "eta=" << w.eta << " zeta=" << w.zeta << " x=" << w.x << " lhs=" << w.lhs << " rhs=" << w.rhs;
    return out.str();
}

void record_violation(InequalityAudit& audit, const Witness& w) {
    ++audit.violations;
    if (!audit.witness || w.lhs - w.rhs > audit.witness->lhs - audit.witness->rhs) audit.witness = w;
}

constexpr double kRoundoff = 1e-12;

}  // namespace

ReactionSpec ReactionSpec::polynomial(int k, double leading, std::vector<double> lower, std::string name) {
    if (k < 1) throw Error("ReactionSpec: degree parameter k must be positive");
    if (static_cast<int>(lower.size()) > 2 * k + 1) throw Error("ReactionSpec: too many lower-order coefficients");
    lower.resize(2 * k + 1, 0.0);
    ReactionSpec spec;
    spec.k = k;
    spec.leading = [leading](double, double) { return leading; };
    for (double c : lower) spec.lower.push_back([c](double, double) { return c; });
    spec.name = std::move(name);
    return spec;
}

double ReactionSpec::eval(double t, double x, double eta) const {
    const auto c = coefficients(t, x);
    double acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * eta + *it;
    return acc;
}

std::vector<double> ReactionSpec::coefficients(double t, double x) const {
    std::vector<double> c(degree() + 1, 0.0);
    for (std::size_t j = 0; j < lower.size(); ++j) c[j] = lower[j](t, x);
    c[degree()] = -leading(t, x);
    return c;
}

std::vector<std::pair<double, double>> ReactionSpec::sample_points() const {
    std::vector<double> ts{0.0};
    std::vector<double> xs{0.5};
    if (time_dependent) ts = {0.0, 0.25, 0.5, 0.75, 1.0};
    if (space_dependent) {
        xs.clear();
        for (int i = 0; i <= 8; ++i) xs.push_back(i / 8.0);
    }
    std::vector<std::pair<double, double>> points;
    for (double t : ts) {
        for (double x : xs) points.emplace_back(t, x);
    }
    return points;
}

ReactionSpec::Bounds ReactionSpec::bounds() const {
    Bounds b{std::numeric_limits<double>::infinity(), 0.0};
    for (auto [t, x] : sample_points()) {
        const double a = leading(t, x);
        b.floor = std::min(b.floor, a);
        b.ceiling = std::max(b.ceiling, std::abs(a));
        for (const auto& aj : lower) b.ceiling = std::max(b.ceiling, std::abs(aj(t, x)));
    }
    return b;
}

std::optional<std::string> ReactionSpec::violation() const {
    const Bounds b = bounds();
    if (!(b.floor > 0.0)) {
        return "leading coefficient must satisfy a >= c > 0 (sampled minimum " + std::to_string(b.floor) + ")";
    }
    if (!std::isfinite(b.ceiling)) return "coefficients must be bounded";
    return std::nullopt;
}

GridFunction eval_reaction(const ReactionSpec& spec, double t, const GridFunction& u) {
    Vector out(u.size());
    for (int i = 0; i < u.size(); ++i) out[i] = spec.eval(t, u.grid().node(i), u[i]);
    if (!all_finite(out)) throw Error("eval_reaction: overflow to a non-finite value");
    return {u.grid(), std::move(out)};
}

FieldMap reaction_field(const ReactionSpec& spec, GridSpec grid) {
    const int m = grid.cells();
    const int deg = spec.degree();
    if (!spec.time_dependent) {
        Matrix table(deg + 1, m);
        for (int i = 0; i < m; ++i) {
            const auto c = spec.coefficients(0.0, grid.node(i));
            for (int j = 0; j <= deg; ++j) table(j, i) = c[j];
        }
        return [table, deg](double, const Vector& u, Vector& out) {
            out.resize(u.size());
            for (Eigen::Index i = 0; i < u.size(); ++i) {
                double acc = table(deg, i);
                for (int j = deg - 1; j >= 0; --j) acc = acc * u[i] + table(j, i);
                out[i] = acc;
            }
        };
    }
    return [spec, grid](double t, const Vector& u, Vector& out) {
        out.resize(u.size());
        for (Eigen::Index i = 0; i < u.size(); ++i) out[i] = spec.eval(t, grid.node(static_cast<int>(i)), u[i]);
    };
}

// Diffusion coefficients

double DiffusionSpec::growth_bound(double eta) const {
    switch (law) {
        case GrowthLaw::Bounded: return c_prime;
        case GrowthLaw::FractionalGrowth: return c_prime * std::pow(1.0 + std::abs(eta), exponent);
        case GrowthLaw::Linear: return c_prime * (1.0 + std::abs(eta));
    }
    return c_prime;
}

DiffusionSpec DiffusionSpec::custom(std::function<double(double, double, double)> g, GrowthLaw law, double c_prime,
                                    double exponent, std::string name) {
    DiffusionSpec spec;
    spec.g = std::move(g);
    spec.law = law;
    spec.c_prime = c_prime;
    spec.exponent = exponent;
    spec.name = std::move(name);
    if (!(c_prime >= 0.0)) throw Error("DiffusionSpec: growth constant must be nonnegative");

    constexpr int kSamples = 20001;
    for (int i = 0; i < kSamples; ++i) {
        const double eta = -1e4 + 2e4 * static_cast<double>(i) / (kSamples - 1);
        const double value = std::abs(spec.g(0.0, 0.5, eta));
        if (!(value <= spec.growth_bound(eta) * (1.0 + kRoundoff))) {
            throw Error("DiffusionSpec '" + spec.name + "': |g| exceeds the declared growth law at eta = " +
                        std::to_string(eta));
        }
    }
    // difference quotients over a uniform grid refined geometrically near 0
    std::vector<double> near_zero{0.0};
    for (int k = -6 * 64; k <= 3 * 64 + 1; ++k) {
        const double e = std::pow(10.0, k / 64.0);
        near_zero.push_back(e);
        near_zero.push_back(-e);
    }
    for (double r = 1.0; r <= 1024.0; r *= 2.0) {
        std::vector<double> pts;
        for (int i = 0; i <= 1024; ++i) pts.push_back(-r + i * (r / 512.0));
        for (double e : near_zero) {
            if (std::abs(e) < r) pts.push_back(e);
        }
        std::sort(pts.begin(), pts.end());
        pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
        double lip = 0.0;
        for (std::size_t i = 1; i < pts.size(); ++i) {
            const double dq = std::abs(spec.g(0.0, 0.5, pts[i]) - spec.g(0.0, 0.5, pts[i - 1])) / (pts[i] - pts[i - 1]);
            lip = std::max(lip, dq);
        }
        spec.lipschitz.emplace_back(r, lip);
    }
    return spec;
}

DiffusionSpec DiffusionSpec::zero() {
    return custom([](double, double, double) { return 0.0; }, GrowthLaw::Bounded, 0.0, 0.0, "zero");
}

DiffusionSpec DiffusionSpec::constant(double c) {
    return custom([c](double, double, double) { return c; }, GrowthLaw::Bounded, std::abs(c), 0.0, "constant");
}

DiffusionSpec DiffusionSpec::fractional(double c, int n, double eps) {
    if (n < 1 || !(eps > 0.0)) throw Error("fractional growth: need N >= 1 and eps > 0");
    const double e = 1.0 / n + eps;
    return custom([c, e](double, double, double eta) { return c * std::pow(1.0 + std::abs(eta), e); },
                  GrowthLaw::FractionalGrowth, std::abs(c), e, "fractional");
}

DiffusionSpec DiffusionSpec::bounded_sigmoid(double c) {
    return custom([c](double, double, double eta) { return c * std::tanh(eta); }, GrowthLaw::Bounded, std::abs(c),
                  0.0, "bounded_sigmoid");
}

DiffusionSpec DiffusionSpec::linear(double c) {
    return custom([c](double, double, double eta) { return c * eta; }, GrowthLaw::Linear, std::abs(c), 1.0,
                  "linear");
}

FieldMap diffusion_field(const DiffusionSpec& spec, GridSpec grid) {
    Vector nodes(grid.cells());
    for (int i = 0; i < grid.cells(); ++i) nodes[i] = grid.node(i);
    return [g = spec.g, nodes](double t, const Vector& u, Vector& out) {
        out.resize(u.size());
        for (Eigen::Index i = 0; i < u.size(); ++i) out[i] = g(t, nodes[i], u[i]);
    };
}

GrowthVerdict audit_growth(const DiffusionSpec& spec, int n, double eps) {
    if (n < 1) throw Error("audit_growth: N must be positive");
    const double e = 1.0 / n + eps;
    GrowthVerdict verdict;
    double worst_excess = 0.0;
    auto check = [&](double eta) {
        const double value = std::abs(spec.g(0.0, 0.5, eta));
        const double envelope = std::pow(1.0 + std::abs(eta), e);
        verdict.tightest_c = std::max(verdict.tightest_c, value / envelope);
        const double excess = value / (spec.c_prime * envelope);
        if (!(value <= spec.c_prime * envelope * (1.0 + kRoundoff))) {
            verdict.ok = false;
            if (excess > worst_excess) {
                worst_excess = excess;
                verdict.witness = eta;
            }
        }
    };
    check(0.0);
    for (int k = -300; k <= 200; ++k) {
        const double eta = std::pow(10.0, k / 50.0);
        check(eta);
        check(-eta);
    }
    return verdict;
}

const Vector& retract(const Vector& u, const TruncationPolicy& policy, Vector& scratch) {
    const double norm = sup_norm(u);
    if (norm <= policy.radius) return u;
    const double r = policy.radius;
    scratch = u * (r / norm);
    // rounding can leave an entry one ulp outside the ball
    scratch = scratch.cwiseMax(-r).cwiseMin(r);
    return scratch;
}

Vector truncate_field(const FieldMap& field, const TruncationPolicy& policy, double t, const Vector& u) {
    if (!(policy.radius > 0.0)) throw Error("truncation radius must be positive");
    Vector scratch;
    Vector out;
    field(t, retract(u, policy, scratch), out);
    return out;
}

// Brute-force constants

double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

namespace {

double sign_bound_sup(const ReactionSpec& spec, int n, double radius, double step) {
    const Lattice lat = Lattice::make(radius, step);
    const int count = lat.count();
    std::vector<double> weight(count);
    for (int j = 0; j < count; ++j) weight[j] = 1.0 / (1.0 + std::pow(std::abs(lat.at(j)), n));
    double best = 0.0;
    for (auto [t, x] : spec.sample_points()) {
        const auto fs = tabulate_sum_lattice(spec, t, x, lat);
        for (int i = 0; i < count; ++i) {
            const double s = sgn(lat.at(i));
            if (s == 0.0) continue;
            const double* row = fs.data() + i;
            for (int j = 0; j < count; ++j) best = std::max(best, s * row[j] * weight[j]);
        }
    }
    return best;
}

}  // namespace

InequalityAudit verify_sign_bound(const ReactionSpec& spec, double a_prime, int n, double radius, double step) {
    const Lattice lat = Lattice::make(radius, step);
    const int count = lat.count();
    std::vector<double> rhs(count);
    for (int j = 0; j < count; ++j) rhs[j] = a_prime * (1.0 + std::pow(std::abs(lat.at(j)), n));
    InequalityAudit audit;
    for (auto [t, x] : spec.sample_points()) {
        const auto fs = tabulate_sum_lattice(spec, t, x, lat);
        for (int i = 0; i < count; ++i) {
            const double s = sgn(lat.at(i));
            const double* row = fs.data() + i;
            for (int j = 0; j < count; ++j) {
                const double lhs = s * row[j];
                if (lhs > rhs[j] + kRoundoff * (std::abs(rhs[j]) + std::abs(lhs))) {
                    record_violation(audit, {lat.at(i), lat.at(j), x, lhs, rhs[j]});
                }
            }
        }
        audit.points += static_cast<long long>(count) * count;
    }
    return audit;
}

SignBound derive_sign_bound(const ReactionSpec& spec, const GridSearch& search) {
    constexpr double kCap = 1e6;
    const int n = spec.degree();
    const double at_r = sign_bound_sup(spec, n, search.radius, search.step);
    const double at_2r = sign_bound_sup(spec, n, 2.0 * search.radius, search.step);
    // a valid constant is independent of the search box; growth with the box
    // means f(eta) sgn(eta) is unbounded at zeta = 0
    if (!(at_r <= kCap) || at_2r > 1.5 * at_r + 1e-9) {
        throw Error("derive_sign_bound: no finite a' exists for '" + spec.name + "' (sup grows from " +
                    std::to_string(at_r) + " to " + std::to_string(at_2r) + " when the search box doubles)");
    }
    SignBound result{1.1 * at_r, n, at_r, {}};
    result.verification = verify_sign_bound(spec, result.a_prime, n, search.radius, search.verify_step);
    if (result.verification.violations > 0) {
        throw Error("derive_sign_bound: inflated constant fails fine-grid verification at " +
                    describe(*result.verification.witness));
    }
    return result;
}

Envelope derive_envelope(const ReactionSpec& spec, double radius) {
    const double b = spec.bounds().floor;
    const int m = spec.degree();
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    constexpr int kSamples = 40001;
    for (auto [t, x] : spec.sample_points()) {
        // f + b s^m with the leading coefficients combined before evaluation
        auto c = spec.coefficients(t, x);
        c[m] += b;
        for (int i = 0; i < kSamples; ++i) {
            const double s = -2.0 * radius + 4.0 * radius * i / (kSamples - 1);
            double shifted = 0.0;
            for (int j = m; j >= 0; --j) shifted = shifted * s + c[j];
            lo = std::min(lo, shifted);
            hi = std::max(hi, shifted);
        }
    }
    return {lo, hi, b, b};
}

DissipativityTriplet closed_form_triplet(const Envelope& env, int k) {
    double sum = 0.0;
    for (int j = 1; j <= 2 * k; ++j) sum += binomial(2 * k + 1, j);
    return {env.a2 - env.a1, std::min(env.b1, env.b2), std::max(env.b1, env.b2) * (1.0 + sum)};
}

InequalityAudit verify_triplet(const ReactionSpec& spec, const DissipativityTriplet& tr, double radius, double step) {
    const Lattice lat = Lattice::make(radius, step);
    const int count = lat.count();
    const int m = spec.degree();
    std::vector<double> pw(count);
    for (int j = 0; j < count; ++j) pw[j] = std::pow(std::abs(lat.at(j)), m);
    InequalityAudit audit;
    for (auto [t, x] : spec.sample_points()) {
        const auto fs = tabulate_sum_lattice(spec, t, x, lat);
        for (int i = 0; i < count; ++i) {
            const double s = sgn(lat.at(i));
            const double* row = fs.data() + i;
            const double* fz = fs.data() + lat.half;
            const double eta_term = tr.b * pw[i];
            for (int j = 0; j < count; ++j) {
                const double lhs = s * (row[j] - fz[j]);
                const double rhs = tr.a - eta_term + tr.c * pw[j];
                const double scale = std::abs(tr.a) + eta_term + tr.c * pw[j] + std::abs(row[j]) + std::abs(fz[j]);
                if (lhs > rhs + kRoundoff * scale) record_violation(audit, {lat.at(i), lat.at(j), x, lhs, rhs});
            }
        }
        audit.points += static_cast<long long>(count) * count;
    }
    return audit;
}

DissipativityTriplet derive_dissipativity_triplet(const ReactionSpec& spec, const GridSearch& search) {
    if (auto why = spec.violation()) throw Error("derive_dissipativity_triplet: " + *why);
    const Envelope env = derive_envelope(spec, search.radius);
    const DissipativityTriplet triplet = closed_form_triplet(env, spec.k);
    const InequalityAudit audit = verify_triplet(spec, triplet, search.radius, search.step);
    if (audit.violations > 0) {
        std::ostringstream msg;
        msg << "derive_dissipativity_triplet: closed-form triplet (a, b, c) = (" << triplet.a << ", " << triplet.b
            << ", " << triplet.c << ") violated at " << audit.violations << " of " << audit.points
            << " grid points; worst at " << describe(*audit.witness);
        throw Error(msg.str());
    }
    return triplet;
}

namespace {

// sup over zeta != 0 of (W - a + b|eta|^m) / |zeta|^m
double fit_c(const ReactionSpec& spec, double a, double b, double radius, double step) {
    const Lattice lat = Lattice::make(radius, step);
    const int count = lat.count();
    const int m = spec.degree();
    std::vector<double> pw(count);
    std::vector<double> inv(count);
    for (int j = 0; j < count; ++j) {
        pw[j] = std::pow(std::abs(lat.at(j)), m);
        inv[j] = j == lat.half ? 0.0 : 1.0 / pw[j];
    }
    double best = 0.0;
    for (auto [t, x] : spec.sample_points()) {
        const auto fs = tabulate_sum_lattice(spec, t, x, lat);
        for (int i = 0; i < count; ++i) {
            const double s = sgn(lat.at(i));
            const double* row = fs.data() + i;
            const double* fz = fs.data() + lat.half;
            const double base = -a + b * pw[i];
            for (int j = 0; j < count; ++j) best = std::max(best, (s * (row[j] - fz[j]) + base) * inv[j]);
        }
    }
    return best;
}

// sup over the box of (W + b|eta|^m) / (1 + |zeta|)^m together with
// sup |f(y)| / (1 + |y|)^m
double fit_a2(const ReactionSpec& spec, double b2, double radius, double step) {
    const Lattice lat = Lattice::make(radius, step);
    const int count = lat.count();
    const double m = spec.degree();
    std::vector<double> pw(count);
    std::vector<double> inv(count);
    for (int j = 0; j < count; ++j) {
        pw[j] = std::pow(std::abs(lat.at(j)), m);
        inv[j] = 1.0 / std::pow(1.0 + std::abs(lat.at(j)), m);
    }
    double best = 0.0;
    for (auto [t, x] : spec.sample_points()) {
        const auto fs = tabulate_sum_lattice(spec, t, x, lat);
        for (std::size_t k = 0; k < fs.size(); ++k) {
            const double y = static_cast<double>(static_cast<int>(k) - 2 * lat.half) * step;
            best = std::max(best, std::abs(fs[k]) / std::pow(1.0 + std::abs(y), m));
        }
        for (int i = 0; i < count; ++i) {
            const double s = sgn(lat.at(i));
            const double* row = fs.data() + i;
            const double* fz = fs.data() + lat.half;
            const double base = b2 * pw[i];
            for (int j = 0; j < count; ++j) best = std::max(best, (s * (row[j] - fz[j]) + base) * inv[j]);
        }
    }
    return best;
}

}  // namespace

DissipativityTriplet fit_dissipativity_triplet(const ReactionSpec& spec, double b_fraction,
                                               const GridSearch& search) {
    if (auto why = spec.violation()) throw Error("fit_dissipativity_triplet: " + *why);
    if (!(b_fraction > 0.0 && b_fraction <= 1.0)) throw Error("fit_dissipativity_triplet: fraction outside (0, 1]");
    const Envelope env = derive_envelope(spec, search.radius);
    DissipativityTriplet tr{env.a2 - env.a1, b_fraction * std::min(env.b1, env.b2), 0.0};
    tr.c = 1.1 * fit_c(spec, tr.a, tr.b, search.radius, search.step);
    if (verify_triplet(spec, tr, search.radius, search.verify_step).violations > 0) {
        tr.c = 1.1 * fit_c(spec, tr.a, tr.b, search.radius, search.verify_step);
        const auto audit = verify_triplet(spec, tr, search.radius, search.verify_step);
        if (audit.violations > 0) {
            throw Error("fit_dissipativity_triplet: fitted triplet fails verification at " + describe(*audit.witness));
        }
    }
    return tr;
}

InequalityAudit verify_fpp(const ReactionSpec& spec, double a2, double b2, double m, double radius, double step) {
    const Lattice lat = Lattice::make(radius, step);
    const int count = lat.count();
    std::vector<double> pw(count);
    std::vector<double> env(count);
    for (int j = 0; j < count; ++j) {
        pw[j] = std::pow(std::abs(lat.at(j)), m);
        env[j] = a2 * std::pow(1.0 + std::abs(lat.at(j)), m);
    }
    InequalityAudit audit;
    for (auto [t, x] : spec.sample_points()) {
        const auto fs = tabulate_sum_lattice(spec, t, x, lat);
        for (std::size_t k = 0; k < fs.size(); ++k) {
            const double y = static_cast<double>(static_cast<int>(k) - 2 * lat.half) * step;
            const double bound = a2 * std::pow(1.0 + std::abs(y), m);
            if (std::abs(fs[k]) > bound * (1.0 + kRoundoff)) record_violation(audit, {0.0, y, x, std::abs(fs[k]), bound});
        }
        for (int i = 0; i < count; ++i) {
            const double s = sgn(lat.at(i));
            const double* row = fs.data() + i;
            const double* fz = fs.data() + lat.half;
            for (int j = 0; j < count; ++j) {
                const double lhs = s * (row[j] - fz[j]);
                const double rhs = env[j] - b2 * pw[i];
                const double scale = env[j] + b2 * pw[i] + std::abs(row[j]) + std::abs(fz[j]);
                if (lhs > rhs + kRoundoff * scale) record_violation(audit, {lat.at(i), lat.at(j), x, lhs, rhs});
            }
        }
        audit.points += static_cast<long long>(count) * count + static_cast<long long>(fs.size());
    }
    return audit;
}

FppConstants derive_fpp_constants(const ReactionSpec& spec, const GridSearch& search) {
    if (auto why = spec.violation()) throw Error("derive_fpp_constants: " + *why);
    const double m = spec.degree();
    const GridSearch coarse{search.radius, search.step, search.step};
    std::optional<FppConstants> best;
    double best_fraction = 0.0;
    double best_factor = std::numeric_limits<double>::infinity();
    for (int j = 1; j <= 7; ++j) {
        const DissipativityTriplet tr = fit_dissipativity_triplet(spec, j / 8.0, coarse);
        const double a2 = 1.1 * fit_a2(spec, tr.b, search.radius, search.step);
        const double factor = std::pow(4.0 * a2 / tr.b, 1.0 / m);
        if (factor < best_factor) {
            best_factor = factor;
            best_fraction = j / 8.0;
            best = FppConstants{a2, tr.b, m, tr, {}};
        }
    }
    FppConstants result = *best;
    result.triplet = fit_dissipativity_triplet(spec, best_fraction, search);
    result.verification = verify_fpp(spec, result.a2, result.b2, m, search.radius, search.verify_step);
    if (result.verification.violations > 0) {
        result.a2 = 1.1 * fit_a2(spec, result.b2, search.radius, search.verify_step);
        result.verification = verify_fpp(spec, result.a2, result.b2, m, search.radius, search.verify_step);
        if (result.verification.violations > 0) {
            throw Error("derive_fpp_constants: fails verification at " + describe(*result.verification.witness));
        }
    }
    return result;
}

}  // namespace rdlab
