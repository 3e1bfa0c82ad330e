#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "rdlab/coefficients.hpp"
#include "rdlab/lemma_lab.hpp"

using namespace rdlab;

namespace {

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

std::vector<double> uniform_times(double end, int n) {
    std::vector<double> t(n + 1);
    for (int i = 0; i <= n; ++i) t[i] = end * i / n;
    return t;
}

}  // namespace

TEST(Subdifferential, Examples) {
    const auto a = norm_subdifferential(vec({1, -3, 2}));
    EXPECT_EQ(a.indices, std::vector<int>{1});
    EXPECT_EQ(a.signs, std::vector<int>{-1});
    EXPECT_FALSE(a.degenerate);
    EXPECT_EQ(a.apply(0, vec({4, 5, 6})), -5.0);

    const auto b = norm_subdifferential(vec({2, -2}));
    EXPECT_TRUE(b.degenerate);
    EXPECT_EQ(b.indices, (std::vector<int>{0, 1}));

    const auto c = norm_subdifferential(vec({5}));
    EXPECT_EQ(c.indices, std::vector<int>{0});
    EXPECT_EQ(c.signs, std::vector<int>{1});

    const auto z = norm_subdifferential(Vector::Zero(3));
    EXPECT_TRUE(z.degenerate);
    EXPECT_EQ(z.indices.size(), 3u);
}

TEST(Subdifferential, DualityIsExact) {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n;
    for (int trial = 0; trial < 200; ++trial) {
        Vector u(9);
        for (int i = 0; i < 9; ++i) u[i] = n(rng);
        if (trial % 3 == 0) u[2] = -u.cwiseAbs().maxCoeff();
        const auto d = norm_subdifferential(u);
        for (std::size_t k = 0; k < d.indices.size(); ++k) {
            EXPECT_EQ(d.apply(k, u), std::abs(u[d.indices[k]]));
            EXPECT_NEAR(d.apply(k, u), sup_norm(u), 1e-12 * sup_norm(u));
            // norm one in the dual of the sup-norm: |<v, x*>| <= ||v|| with equality at a unit vector
            Vector e = Vector::Zero(9);
            e[d.indices[k]] = d.signs[k];
            EXPECT_EQ(d.apply(k, e), 1.0);
        }
    }
}

TEST(OneSidedDerivative, Examples) {
    EXPECT_EQ(one_sided_norm_derivative(vec({1, -3, 2}), vec({7, 2, 1}), Side::Plus), -2.0);
    EXPECT_EQ(one_sided_norm_derivative(vec({1, -3, 2}), vec({7, 2, 1}), Side::Minus), -2.0);
    EXPECT_EQ(one_sided_norm_derivative(vec({1, 1}), vec({2, -2}), Side::Plus), 2.0);
    EXPECT_EQ(one_sided_norm_derivative(vec({1, 1}), vec({2, -2}), Side::Minus), -2.0);
}

TEST(OneSidedDerivative, PlusDominatesMinus) {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> n;
    for (int trial = 0; trial < 300; ++trial) {
        Vector u(5), du(5);
        for (int i = 0; i < 5; ++i) {
            u[i] = std::round(2.0 * n(rng));
            du[i] = n(rng);
        }
        if (sup_norm(u) == 0.0) continue;
        const double plus = one_sided_norm_derivative(u, du, Side::Plus);
        const double minus = one_sided_norm_derivative(u, du, Side::Minus);
        EXPECT_GE(plus, minus);
        if (!norm_subdifferential(u).degenerate) EXPECT_EQ(plus, minus);
    }
}

TEST(OneSidedDerivative, FiniteDifferenceOracle) {
    // u(t) = (cos t, 1 + 0.5 sin 3t, -0.2 - t); at t = 0 the first two entries tie
    auto u = [](double t) { return vec({std::cos(t), 1.0 + 0.5 * std::sin(3 * t), -0.2 - t}); };
    auto du = [](double t) { return vec({-std::sin(t), 1.5 * std::cos(3 * t), -1.0}); };
    for (double t : {0.0, 0.4, 1.3}) {
        const double plus = one_sided_norm_derivative(u(t), du(t), Side::Plus);
        double previous = std::numeric_limits<double>::infinity();
        for (double delta : {1e-3, 1e-4, 1e-5}) {
            const double fd = (sup_norm(u(t + delta)) - sup_norm(u(t))) / delta;
            const double err = std::abs(fd - plus);
            EXPECT_LE(err, 10.0 * delta) << "t = " << t << " delta = " << delta;
            EXPECT_LE(err, previous + 1e-9);
            previous = err;
        }
    }
    // the backward difference sees the minimum at the tie
    const double minus = one_sided_norm_derivative(u(0.0), du(0.0), Side::Minus);
    const double bd = (sup_norm(u(0.0)) - sup_norm(u(-1e-6))) / 1e-6;
    EXPECT_NEAR(bd, minus, 1e-5);
}

TEST(Gronwall, Examples) {
    const auto t = uniform_times(1.0, 100);
    const std::vector<double> zero(t.size(), 0.0), one(t.size(), 1.0);
    const auto linear = gronwall_bound({1.0, 0.0, 1.0}, 0.0, t, zero);
    for (std::size_t i = 0; i < t.size(); ++i) EXPECT_NEAR(linear[i], t[i], 1e-14);
    const auto decay = gronwall_bound({0.0, 0.7, 2.0}, 3.0, t, one);
    for (std::size_t i = 0; i < t.size(); ++i) EXPECT_NEAR(decay[i], std::exp(0.7 * t[i]) * 3.0, 1e-12);
    const auto nine_e = gronwall_bound({1.0, 1.0, 3.0}, 1.0, t, one);
    EXPECT_NEAR(nine_e.back(), 9.0 * std::numbers::e, 1e-6);
    EXPECT_THROW(gronwall_bound({1.0, 0.0, 1.0}, 0.0, {0.5, 1.0}, {0.0, 0.0}), Error);
}

TEST(Gronwall, MonotoneInEveryArgument) {
    const auto t = uniform_times(1.0, 50);
    std::vector<double> v(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) v[i] = 0.5 + std::sin(3 * t[i]) * std::sin(3 * t[i]);
    const GronwallConstants base{0.8, 0.3, 2.0};
    const auto ref = gronwall_bound(base, 1.0, t, v);
    auto larger = [&](const std::vector<double>& b) {
        for (std::size_t i = 0; i < t.size(); ++i) EXPECT_GE(b[i], ref[i]);
    };
    larger(gronwall_bound({0.9, 0.3, 2.0}, 1.0, t, v));
    larger(gronwall_bound({0.8, 0.4, 2.0}, 1.0, t, v));
    larger(gronwall_bound({0.8, 0.3, 3.0}, 1.0, t, v));
    larger(gronwall_bound(base, 1.5, t, v));
    auto v2 = v;
    for (double& x : v2) x += 0.1;
    larger(gronwall_bound(base, 1.0, t, v2));
}

TEST(Gronwall, PathChecks) {
    const GridSpec grid(32);
    const auto op = build_neumann_operator(EllipticSpec::constant(grid, 1.0, 0.0, 0.0));
    const double dt = 1e-3;
    const Stepper stepper(op, dt, Scheme::ExponentialEuler);
    SolverConfig c;
    c.horizon = 1.0;
    c.dt = dt;
    c.stride = 10;
    const Vector xi = GridFunction::from_profile(grid, [](double x) { return 2.0 * std::cos(std::numbers::pi * x); })
                          .values();
    const auto free = run_path(c, stepper, {[](double, const Vector& u, Vector& out) { out = Vector::Zero(u.size()); },
                                            {}, nullptr},
                               xi, {});
    const std::vector<double> zero(free.times.size(), 0.0);
    EXPECT_TRUE(check_gronwall_on_path(free, zero, {0.0, 0.0, 1.0}, 0.0).pass);

    const auto cubic = ReactionSpec::polynomial(1, 1.0, {});
    const auto sign = derive_sign_bound(cubic, {10.0, 0.01, 0.005});
    const auto rec = run_path(c, stepper, {reaction_field(cubic, grid), {}, nullptr}, xi, {});
    const auto verdict = check_gronwall_on_path(rec, zero, {sign.a_prime, 0.0, 3.0}, 0.0);
    EXPECT_TRUE(verdict.pass) << verdict.detail;

    // growth that the constants do not cover is caught with a witness
    const auto grow = run_path(c, stepper, {[](double, const Vector& u, Vector& out) { out = u; }, {}, nullptr},
                               Vector::Constant(32, 2.0), {});
    const auto caught = check_gronwall_on_path(grow, zero, {0.0, 0.0, 1.0}, 0.0);
    EXPECT_FALSE(caught.pass);
    EXPECT_TRUE(caught.witness_time.has_value());
}

TEST(Dissbound, Examples) {
    EXPECT_DOUBLE_EQ(dissbound_value(1, 1, 1, 0), 4.0);
    EXPECT_DOUBLE_EQ(dissbound_value(1, 4, 2, 0), 1.0);
    EXPECT_NEAR(dissbound_value(2, 1, 3, 1), 4.0, 1e-14);
    EXPECT_THROW(dissbound_value(0, 1, 1, 0), Error);
}

TEST(Dissbound, PathChecks) {
    const GridSpec grid(32);
    const auto op = build_neumann_operator(EllipticSpec::constant(grid, 1.0, 0.0, 0.0));
    const double dt = 1e-3;
    const Stepper stepper(op, dt, Scheme::ExponentialEuler);
    SolverConfig c;
    c.horizon = 1.0;
    c.dt = dt;
    const auto zero_run =
        run_path(c, stepper, {[](double, const Vector& u, Vector& out) { out = Vector::Zero(u.size()); }, {}, nullptr},
                 Vector::Zero(32), {});
    EXPECT_TRUE(check_dissbound_on_path(zero_run, 0.0, 1.0, 1.0, 3.0, 0.0).pass);

    const auto spec = ReactionSpec::polynomial(1, 1.0, {0.0, 1.0});
    const auto fpp = derive_fpp_constants(spec, {10.0, 0.01, 0.005});
    const auto field = reaction_field(spec, grid);
    for (double v : {0.0, 10.0}) {
        const Vector shift = Vector::Constant(32, v);
        const Dynamics dyn{[&](double t, const Vector& u, Vector& out) { field(t, u + shift, out); }, {}, nullptr};
        const auto rec = run_path(c, stepper, dyn, Vector::Zero(32), {});
        const auto verdict = check_dissbound_on_path(rec, v, fpp.a2, fpp.b2, fpp.m, 0.0);
        EXPECT_TRUE(verdict.pass) << verdict.detail;
        if (v == 10.0) EXPECT_LT(rec.running_max, dissbound_value(fpp.a2, fpp.b2, fpp.m, v) / 2.0);
    }
    EXPECT_THROW(check_dissbound_on_path(run_path(c, stepper, {field, {}, nullptr}, Vector::Ones(32), {}), 0.0, 1, 1,
                                         3, 0),
                 Error);
}

TEST(ScalarODE, Examples) {
    const std::vector<double> t = uniform_times(2.0, 20);
    ScalarODEProblem eq{2.0, 1.5, 3.0, 0.0, 0.0};
    eq.psi0 = eq.equilibrium();
    for (double psi : scalar_ode_solve(eq, t)) EXPECT_NEAR(psi, eq.psi0, 1e-9);

    const auto decay = scalar_ode_solve({1.0, 0.0, 1.0, 0.0, 1.0}, {0.0, 0.5, 1.0});
    EXPECT_EQ(decay[0], 1.0);
    EXPECT_NEAR(decay[2], std::exp(-1.0), 1e-8);

    const auto down = scalar_ode_solve({1.0, 1.0, 3.0, 0.0, 10.0}, t);
    for (std::size_t i = 1; i < down.size(); ++i) {
        EXPECT_LT(down[i], down[i - 1]);
        EXPECT_GT(down[i], 1.0);
    }
    const auto up = scalar_ode_solve({1.0, 1.0, 3.0, 0.0, 0.2}, t);
    for (std::size_t i = 1; i < up.size(); ++i) {
        EXPECT_GT(up[i], up[i - 1]);
        EXPECT_LT(up[i], 1.0);
    }
    EXPECT_THROW(scalar_ode_solve({0.0, 1.0, 3.0, 0.0, 1.0}, t), Error);
}

TEST(ScalarODE, BackwardIntegration) {
    const auto x = integrate_scalar([](double, double x) { return -x; }, 1.0, 1.0, {1.0, 0.5, 0.0});
    EXPECT_NEAR(x[2], std::exp(1.0), 1e-8);
}

TEST(Comparison, Examples) {
    const auto t = uniform_times(1.0, 50);
    SampledFunction one{t, std::vector<double>(t.size(), 1.0)}, zero{t, std::vector<double>(t.size(), 0.0)};
    const ScalarRhs none = [](double, double) { return 0.0; };
    EXPECT_EQ(comparison_check(none, one, zero, 0.0, ComparisonDirection::Forward).outcome, ComparisonOutcome::Pass);

    SampledFunction e{t, {}}, z{t, {}};
    for (double s : t) {
        e.x.push_back(std::exp(-s));
        z.x.push_back(0.0);
    }
    const ScalarRhs decay = [](double, double x) { return -x; };
    EXPECT_EQ(comparison_check(decay, e, z, 0.0, ComparisonDirection::Forward).outcome, ComparisonOutcome::Pass);

    // premise not met
    EXPECT_EQ(comparison_check(none, zero, one, 0.0, ComparisonDirection::Forward).outcome,
              ComparisonOutcome::Inconclusive);
    EXPECT_EQ(comparison_check(none, zero, one, 1.0, ComparisonDirection::Backward).outcome, ComparisonOutcome::Pass);

    // a falling u+ is not a super-solution of x' = 0
    SampledFunction falling{t, {}};
    for (double s : t) falling.x.push_back(1.0 - 10.0 * s);
    EXPECT_EQ(comparison_check(none, falling, zero, 0.0, ComparisonDirection::Forward).outcome,
              ComparisonOutcome::Inconclusive);
    // with the audit disabled the ordering failure surfaces as a violation
    const auto lax = comparison_check(none, falling, zero, 0.0, ComparisonDirection::Forward, 100.0);
    EXPECT_EQ(lax.outcome, ComparisonOutcome::Violation);
    ASSERT_TRUE(lax.witness_time.has_value());
    EXPECT_GT(*lax.witness_time, 0.09);
}

TEST(Comparison, RandomizedCertifiedPairs) {
    std::mt19937_64 rng(2718);
    std::uniform_real_distribution<double> coef(-2.0, 2.0), start(-1.0, 1.0), pick(0.2, 1.8);
    const auto t = uniform_times(2.0, 200);
    for (int trial = 0; trial < 20; ++trial) {
        const double alpha = coef(rng), beta = coef(rng), x0 = start(rng);
        const ScalarRhs f = [=](double s, double x) { return alpha * std::sin(x) + beta * s; };
        const auto [plus, minus] = certified_pair(f, 0.05, 0.01, x0, 0.0, t, ComparisonDirection::Forward);
        EXPECT_EQ(comparison_check(f, plus, minus, 0.0, ComparisonDirection::Forward).outcome,
                  ComparisonOutcome::Pass);

        const double t0 = t[static_cast<std::size_t>(std::lround(pick(rng) / 2.0 * 200))];
        const auto [bplus, bminus] = certified_pair(f, 0.05, 0.01, x0, t0, t, ComparisonDirection::Backward);
        EXPECT_EQ(comparison_check(f, bplus, bminus, t0, ComparisonDirection::Backward).outcome,
                  ComparisonOutcome::Pass);
        EXPECT_LE(bplus.x.front(), bminus.x.front());
    }
}
