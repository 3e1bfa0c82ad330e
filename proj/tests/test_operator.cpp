#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "rdlab/operator.hpp"

using namespace rdlab;

namespace {

DiscreteOperator laplacian(int m, double c = 0.0) {
    return build_neumann_operator(EllipticSpec::constant(GridSpec(m), 1.0, 0.0, c));
}

// Discrete Neumann cosine mode j on the cell-centered grid.
Vector cosine_mode(int m, int j) {
    GridSpec grid(m);
    Vector v(m);
    for (int i = 0; i < m; ++i) v[i] = std::cos(std::numbers::pi * j * grid.node(i));
    return v;
}

double relative(const Vector& a, const Vector& b) { return (a - b).norm() / std::max(1e-300, b.norm()); }

Vector random_vector(int m, std::mt19937_64& rng) {
    std::normal_distribution<double> n;
    Vector v(m);
    for (int i = 0; i < m; ++i) v[i] = n(rng);
    return v;
}

}  // namespace

TEST(NeumannOperator, TwoCellStencil) {
    const auto op = laplacian(2);
    Matrix expected(2, 2);
    expected << -4, 4, 4, -4;
    EXPECT_EQ(op.matrix(), expected);
    ASSERT_NE(op.spectral(), nullptr);
    EXPECT_NEAR(op.spectral()->eigenvalues[0], -8.0, 1e-12);
    EXPECT_NEAR(op.spectral()->eigenvalues[1], 0.0, 1e-12);
}

TEST(NeumannOperator, ConstantsInKernel) {
    for (int m : {2, 7, 64}) {
        const auto op = laplacian(m);
        EXPECT_LE(sup_norm(op.apply(Vector::Ones(m))), 1e-9);
        const auto shifted = laplacian(m, -1.0);
        EXPECT_LE(sup_norm(shifted.apply(Vector::Ones(m)) + Vector::Ones(m)), 1e-9);
    }
}

TEST(NeumannOperator, RejectsBadInput) {
    EXPECT_THROW(GridSpec(1), Error);
    GridSpec grid(8);
    EllipticSpec spec = EllipticSpec::constant(grid, 0.5, 0.0, 0.0, 1.0);
    EXPECT_THROW(build_neumann_operator(spec), Error);
}

TEST(NeumannOperator, SchemeSelection) {
    GridSpec grid(16);
    EXPECT_EQ(choose_first_order_scheme(EllipticSpec::constant(grid, 1.0, 10.0, 0.0)), FirstOrderScheme::Central);
    EXPECT_EQ(choose_first_order_scheme(EllipticSpec::constant(grid, 0.01, 10.0, 0.0)), FirstOrderScheme::Upwind);
}

TEST(NeumannOperator, MaximumPrincipleOnRandomCoefficients) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ua(0.05, 2.0), ub(-30.0, 30.0), uc(-3.0, 0.0);
    for (int trial = 0; trial < 40; ++trial) {
        GridSpec grid(24);
        Vector a(24), b(24), c(24);
        for (int i = 0; i < 24; ++i) {
            a[i] = ua(rng);
            b[i] = ub(rng);
            c[i] = uc(rng);
        }
        EllipticSpec spec{GridFunction(grid, a), GridFunction(grid, b), GridFunction(grid, c), 0.05};
        const auto op = build_neumann_operator(spec);
        for (int k = 0; k < 200; ++k) {
            Vector u = random_vector(24, rng);
            Eigen::Index arg = 0;
            u.cwiseAbs().maxCoeff(&arg);
            const double value = (u[arg] > 0 ? 1.0 : -1.0) * op.matrix().row(arg).dot(u);
            EXPECT_LE(value, 1e-12 * op.matrix().cwiseAbs().maxCoeff() * sup_norm(u));
        }
    }
}

TEST(Resolvent, Examples) {
    GridSpec grid(4);
    DiscreteOperator zero(grid, Matrix::Zero(4, 4));
    const GridFunction x(grid, Vector::LinSpaced(4, -1.0, 2.0));
    EXPECT_LE(sup_norm(resolvent_apply(zero, 2.0, x).values() - x.values() / 2.0), 1e-15);

    const auto lap = laplacian(16);
    const auto one = resolvent_apply(lap, 1.0, GridFunction::constant(GridSpec(16), 1.0));
    EXPECT_LE(sup_norm(one.values() - Vector::Ones(16)), 1e-12);

    // (I - A) y = (1, 0) with A = [[-4, 4], [4, -4]]: y = (5, 4) / 9
    const auto two = laplacian(2);
    const auto y = resolvent_apply(two, 1.0, GridFunction(GridSpec(2), Vector::Unit(2, 0)));
    EXPECT_NEAR(y[0], 5.0 / 9.0, 1e-15);
    EXPECT_NEAR(y[1], 4.0 / 9.0, 1e-15);
}

TEST(Resolvent, SingularIsRejected) {
    const auto lap = laplacian(8);
    EXPECT_THROW(resolvent_apply(lap, 0.0, GridFunction::constant(GridSpec(8), 1.0)), Error);
}

TEST(Resolvent, ResolventIdentity) {
    const auto op = build_neumann_operator(EllipticSpec::constant(GridSpec(32), 0.7, 3.0, -0.5));
    std::mt19937_64 rng(5);
    const double lambda = 2.0, mu = 7.5;
    for (int k = 0; k < 10; ++k) {
        const GridFunction x(GridSpec(32), random_vector(32, rng));
        const Vector lhs = resolvent_apply(op, lambda, x).values() - resolvent_apply(op, mu, x).values();
        const Vector rhs = (mu - lambda) * resolvent_apply(op, lambda, resolvent_apply(op, mu, x)).values();
        EXPECT_LE(relative(lhs, rhs), 1e-9);
    }
}

TEST(Semigroup, ZeroTimeIsExactIdentity) {
    const auto op = laplacian(16);
    std::mt19937_64 rng(1);
    const GridFunction x(GridSpec(16), random_vector(16, rng));
    const auto y = semigroup_apply(op, 0.0, x);
    EXPECT_TRUE(y.values() == x.values());
    EXPECT_THROW(semigroup_apply(op, -1.0, x), Error);
}

TEST(Semigroup, ConstantsInvariant) {
    const auto op = laplacian(32);
    const auto x = GridFunction::constant(GridSpec(32), 3.5);
    for (double t : {0.01, 0.5, 2.0}) {
        EXPECT_LE(sup_norm(semigroup_apply(op, t, x).values() - x.values()), 1e-12);
        EXPECT_LE(sup_norm(semigroup_apply(op, t, x, SemigroupMethod::MatrixExponential).values() - x.values()),
                  1e-10);
    }
}

TEST(Semigroup, CosineModeDecaysAtAnalyticRate) {
    const int m = 64;
    const double h = 1.0 / m;
    const double lambda1 = -(4.0 / (h * h)) * std::pow(std::sin(std::numbers::pi / (2.0 * m)), 2);
    const auto op = laplacian(m);
    // the eigensolver's second eigenvalue (first nonzero) matches
    EXPECT_NEAR(op.spectral()->eigenvalues[m - 2], lambda1, 1e-9 * std::abs(lambda1));
    const Vector mode = cosine_mode(m, 1);
    EXPECT_LE(relative(op.apply(mode), lambda1 * mode), 1e-12);
    for (double t : {0.05, 0.2, 1.0}) {
        const Vector y = semigroup_apply(op, t, GridFunction(GridSpec(m), mode)).values();
        EXPECT_LE((y - std::exp(lambda1 * t) * mode).norm(), 1e-10 * mode.norm());
    }
}

TEST(Semigroup, SpectralMatchesMatrixExponential) {
    std::mt19937_64 rng(2);
    GridSpec grid(48);
    Vector a(48);
    for (int i = 0; i < 48; ++i) a[i] = 1.0;
    const auto op = laplacian(48, -0.3);
    ASSERT_TRUE(op.symmetric());
    for (double t : {1e-3, 0.1, 1.0}) {
        const GridFunction x(grid, random_vector(48, rng));
        const Vector s = semigroup_apply(op, t, x, SemigroupMethod::Spectral).values();
        const Vector e = semigroup_apply(op, t, x, SemigroupMethod::MatrixExponential).values();
        EXPECT_LE(relative(e, s), 1e-9) << "t = " << t;
    }
}

TEST(Semigroup, SemigroupProperty) {
    std::mt19937_64 rng(3);
    const auto sym = laplacian(32);
    const auto adv = build_neumann_operator(EllipticSpec::constant(GridSpec(32), 0.5, 4.0, -0.1));
    ASSERT_FALSE(adv.symmetric());
    for (const auto* op : {&sym, &adv}) {
        const GridFunction x(GridSpec(32), random_vector(32, rng));
        const double s = 0.013, t = 0.071;
        const Vector lhs = semigroup_apply(*op, s + t, x).values();
        const Vector rhs = semigroup_apply(*op, s, semigroup_apply(*op, t, x)).values();
        EXPECT_LE(relative(lhs, rhs), 1e-9);
    }
}

TEST(Expm, SmallKnownCases) {
    Matrix rot(2, 2);
    rot << 0, -1, 1, 0;
    const Matrix e = expm(rot);
    EXPECT_NEAR(e(0, 0), std::cos(1.0), 1e-14);
    EXPECT_NEAR(e(1, 0), std::sin(1.0), 1e-14);
    Matrix nil(2, 2);
    nil << 0, 1, 0, 0;
    const Matrix en = expm(nil);
    EXPECT_DOUBLE_EQ(en(0, 1), 1.0);
    EXPECT_DOUBLE_EQ(en(0, 0), 1.0);
}

TEST(SpectralCache, ReproducesAction) {
    std::mt19937_64 rng(4);
    const auto sym = laplacian(40);
    const auto adv = build_neumann_operator(EllipticSpec::constant(GridSpec(40), 1.0, 5.0, 0.0));
    for (const auto* op : {&sym, &adv}) {
        const SpectralData* s = op->spectral();
        ASSERT_NE(s, nullptr);
        const Vector x = random_vector(40, rng);
        Vector y;
        if (s->real) {
            y = s->vectors * s->eigenvalues.asDiagonal() * (s->vectors.transpose() * x);
        } else {
            y = (s->right * s->complex_eigenvalues.asDiagonal() * (s->left_inverse * x.cast<std::complex<double>>()))
                    .real();
        }
        EXPECT_LE(relative(y, op->apply(x)), 1e-10);
    }
}

TEST(FractionalPower, ZeroExponentIsIdentity) {
    const auto op = laplacian(16);
    std::mt19937_64 rng(6);
    const GridFunction x(GridSpec(16), random_vector(16, rng));
    const auto y = fractional_power_apply(op, {0.0, 1.0}, PowerSign::Positive, x);
    EXPECT_TRUE(y.values() == x.values());
}

TEST(FractionalPower, EigenmodeScaling) {
    const int m = 32;
    const auto op = laplacian(m);
    for (int j : {0, 1, 5, 31}) {
        const double h = 1.0 / m;
        const double lambda = -(4.0 / (h * h)) * std::pow(std::sin(std::numbers::pi * j / (2.0 * m)), 2);
        const Vector mode = cosine_mode(m, j);
        const Vector y = fractional_power_apply(op, {0.25, 1.0}, PowerSign::Positive, mode);
        EXPECT_LE(relative(y, std::pow(1.0 - lambda, 0.25) * mode), 1e-10) << "mode " << j;
    }
}

TEST(FractionalPower, InversePair) {
    std::mt19937_64 rng(7);
    const auto sym = laplacian(32);
    const auto adv = build_neumann_operator(EllipticSpec::constant(GridSpec(32), 1.0, 2.0, -0.2));
    for (const auto* op : {&sym, &adv}) {
        const auto frac = FractionalNormSpec::with_default_shift(*op, 0.4);
        const Vector x = random_vector(32, rng);
        const Vector up = fractional_power_apply(*op, frac, PowerSign::Positive, x);
        const Vector back = fractional_power_apply(*op, frac, PowerSign::Negative, up);
        EXPECT_LE(relative(back, x), 1e-10);
    }
}

TEST(FractionalPower, Errors) {
    const auto op = laplacian(8);
    const Vector x = Vector::Ones(8);
    EXPECT_THROW(fractional_power_apply(op, {0.5, 1.0}, PowerSign::Positive, x), Error);
    EXPECT_THROW(fractional_power_apply(op, {0.25, -1.0}, PowerSign::Positive, x), Error);
    Matrix jordan = Matrix::Zero(2, 2);
    jordan(0, 1) = 1.0;
    DiscreteOperator defective(GridSpec(2), jordan);
    EXPECT_EQ(defective.spectral(), nullptr);
    EXPECT_THROW(fractional_power_apply(defective, {0.25, 2.0}, PowerSign::Positive, Vector::Ones(2)), Error);
}

TEST(Yosida, ScalarExamples) {
    GridSpec grid(4);
    const DiscreteOperator zero(grid, Matrix::Zero(4, 4));
    EXPECT_LE(yosida_approximand(zero, 10.0).matrix().cwiseAbs().maxCoeff(), 1e-12);
    const DiscreteOperator minus(grid, -Matrix::Identity(4, 4));
    for (double n : {1.0, 10.0, 1000.0}) {
        const Matrix expected = -n / (n + 1.0) * Matrix::Identity(4, 4);
        EXPECT_LE((yosida_approximand(minus, n).matrix() - expected).cwiseAbs().maxCoeff(), 1e-10 * n);
    }
}

TEST(Yosida, ConvergesMonotonicallyOnSmoothData) {
    const int m = 32;
    const auto op = laplacian(m);
    const GridFunction x = GridFunction::from_profile(
        GridSpec(m), [](double s) { return std::cos(std::numbers::pi * s) + 0.3 * std::cos(3 * std::numbers::pi * s); });
    const Vector ax = op.apply(x.values());
    double previous = std::numeric_limits<double>::infinity();
    for (double n : {10.0, 100.0, 1000.0}) {
        const double err = sup_norm(yosida_approximand(op, n).apply(x.values()) - ax);
        EXPECT_LT(err, previous);
        previous = err;
    }
    previous = std::numeric_limits<double>::infinity();
    for (double n = 16; n <= 4096; n *= 2) {
        const double err = sup_norm(yosida_approximand(op, n).apply(x.values()) - ax);
        EXPECT_LE(err, previous + 1e-12);
        previous = err;
    }
}

TEST(Yosida, PreservesDissipativity) {
    const auto op = build_neumann_operator(EllipticSpec::constant(GridSpec(32), 1.0, 3.0, -0.5));
    for (double n : {4.0, 64.0, 1024.0}) {
        EXPECT_TRUE(dissipativity_check(yosida_approximand(op, n), 2000, 9).dissipative);
    }
}

TEST(SemigroupDistance, Examples) {
    const int m = 32;
    const auto op = laplacian(m);
    GridSpec grid(m);
    std::mt19937_64 rng(8);
    const GridFunction x(grid, random_vector(m, rng));
    const auto frac = FractionalNormSpec::with_default_shift(op, 0.25);
    EXPECT_EQ(semigroup_distance(op, op, 1.0, x, SupNorm{}), 0.0);
    EXPECT_EQ(semigroup_distance(op, yosida_approximand(op, 16), 1.0, GridFunction::zeros(grid), FractionalNorm{frac}),
              0.0);
    double previous = std::numeric_limits<double>::infinity();
    for (double n = 16; n <= 4096; n *= 2) {
        const double d = semigroup_distance(op, yosida_approximand(op, n), 1.0, x, FractionalNorm{frac});
        EXPECT_LT(d, previous) << "n = " << n;
        previous = d;
    }
}

TEST(Dissipativity, Examples) {
    GridSpec grid(16);
    const DiscreteOperator minus(grid, -Matrix::Identity(16, 16));
    const auto r1 = dissipativity_check(minus, 200, 1);
    EXPECT_TRUE(r1.dissipative);
    EXPECT_DOUBLE_EQ(r1.max_value, -1.0);

    const auto r2 = dissipativity_check(laplacian(64), 10000, 2);
    EXPECT_TRUE(r2.dissipative);
    EXPECT_FALSE(r2.witness.has_value());

    const DiscreteOperator plus(grid, Matrix::Identity(16, 16));
    const auto r3 = dissipativity_check(plus, 50, 3);
    EXPECT_FALSE(r3.dissipative);
    ASSERT_TRUE(r3.witness.has_value());
    EXPECT_GT(r3.max_value, 0.0);
}

TEST(PerturbationFamily, Members) {
    const auto base = EllipticSpec::constant(GridSpec(16), 1.0, 0.0, 0.0);
    const auto a = build_neumann_operator(base);
    PerturbationFamily identity{FamilyKind::Identity, 1.0};
    EXPECT_EQ(identity.member(base, 4.0).matrix(), a.matrix());
    PerturbationFamily coef{FamilyKind::Coefficient, 1.0};
    const auto pc = coef.perturbed_coefficients(base, 4.0);
    EXPECT_DOUBLE_EQ(pc.a[0], 1.25);
    EXPECT_DOUBLE_EQ(pc.b[0], 0.25);
    EXPECT_DOUBLE_EQ(pc.c[0], -0.25);
    EXPECT_EQ(coef.member(base, std::numeric_limits<double>::infinity()).matrix(), a.matrix());
    PerturbationFamily joint{FamilyKind::Joint, 1.0};
    EXPECT_TRUE(dissipativity_check(joint.member(base, 8.0), 1000, 4).dissipative);
    EXPECT_EQ(parse_family("yosida"), FamilyKind::Yosida);
    EXPECT_THROW(parse_family("nope"), Error);
}
