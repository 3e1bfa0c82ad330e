#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <cstring>
#include <thread>

#include "rdlab/noise.hpp"

using namespace rdlab;

namespace {

struct Moments {
    double mean = 0.0;
    double variance = 0.0;
    long n = 0;
};

// Welford accumulation, one accumulator per cell.
class CellMoments {
public:
    explicit CellMoments(int cells) : mean_(Vector::Zero(cells)), m2_(Vector::Zero(cells)) {}
    void add(const Vector& x) {
        ++n_;
        const Vector delta = x - mean_;
        mean_ += delta / static_cast<double>(n_);
        m2_ += delta.cwiseProduct(x - mean_);
    }
    Moments cell(int i) const { return {mean_[i], m2_[i] / static_cast<double>(n_ - 1), n_}; }

private:
    Vector mean_, m2_;
    long n_ = 0;
};

// Standard error of the sample variance of a Gaussian sample.
double variance_se(double variance, long n) { return variance * std::sqrt(2.0 / static_cast<double>(n - 1)); }

}  // namespace

TEST(Philox, KnownAnswers) {
    using W = std::array<std::uint32_t, 4>;
    EXPECT_EQ(philox4x32({0, 0, 0, 0}, {0, 0}), (W{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
    EXPECT_EQ(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
              (W{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
    EXPECT_EQ(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
              (W{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(CounterNormal, PureFunctionOfTuple) {
    EXPECT_EQ(counter_normal(1, 2, 3, 4), counter_normal(1, 2, 3, 4));
    EXPECT_NE(counter_normal(1, 2, 3, 4), counter_normal(1, 2, 3, 5));
    EXPECT_NE(counter_normal(1, 2, 3, 4), counter_normal(1, 3, 3, 4));
    EXPECT_NE(counter_normal(1, 2, 3, 4), counter_normal(2, 2, 3, 4));
    EXPECT_NE(counter_normal(1, 2, 3, 4, Channel::Noise), counter_normal(1, 2, 3, 4, Channel::InitialDatum));
    // high bits of the 64-bit indices participate
    EXPECT_NE(counter_normal(1, 2, 3, 4), counter_normal(1, 2, 3 + (1ULL << 32), 4));
    EXPECT_NE(counter_normal(1, 2, 3, 4), counter_normal(1, 2 + (1ULL << 32), 3, 4));
    EXPECT_NE(counter_normal(1, 2, 3, 4), counter_normal(1 + (1ULL << 32), 2, 3, 4));
}

TEST(WhiteNoise, MeanAndVariance) {
    const GridSpec grid(64);
    const auto model = NoiseModel::white(grid);
    const double dt = 0.01;
    CellMoments acc(64);
    Vector out;
    for (std::uint64_t path = 0; path < 100000; ++path) {
        model.draw({2024, path, 0}, dt, out);
        acc.add(out);
    }
    const double expected = dt * 64;
    ASSERT_DOUBLE_EQ(expected, 0.64);
    for (int i = 0; i < 64; ++i) {
        const auto m = acc.cell(i);
        EXPECT_LE(std::abs(m.mean), 4.0 * std::sqrt(expected / m.n)) << "cell " << i;
        EXPECT_LE(std::abs(m.variance - expected), 4.0 * variance_se(expected, m.n)) << "cell " << i;
    }
}

TEST(ColoredNoise, SingleConstantMode) {
    const GridSpec grid(16);
    const auto model = NoiseModel::colored(grid, Vector::Ones(1), Matrix::Ones(16, 1));
    const double dt = 0.04;
    double sum = 0.0, sum2 = 0.0;
    const int n = 50000;
    for (int path = 0; path < n; ++path) {
        const auto inc = replay(model, {7, static_cast<std::uint64_t>(path), 0}, dt);
        for (int i = 1; i < 16; ++i) ASSERT_EQ(inc[i], inc[0]);
        sum += inc[0];
        sum2 += inc[0] * inc[0];
    }
    const double mean = sum / n;
    const double var = (sum2 - n * mean * mean) / (n - 1);
    EXPECT_LE(std::abs(var - dt), 4.0 * variance_se(dt, n));
}

TEST(ColoredNoise, RejectsInvalidModes) {
    const GridSpec grid(8);
    EXPECT_THROW(NoiseModel::colored(grid, Vector::Ones(1), 2.0 * Matrix::Ones(8, 1)), Error);
    Vector s(2);
    s << 0.5, 1.0;
    EXPECT_THROW(NoiseModel::colored(grid, s, make_spectral_colored(grid, 2, 1.0).modes()), Error);
    s << 1.0, 0.0;
    EXPECT_THROW(NoiseModel::colored(grid, s, make_spectral_colored(grid, 2, 1.0).modes()), Error);
}

TEST(Replay, BitwiseIdentical) {
    const GridSpec grid(32);
    const auto model = NoiseModel::white(grid);
    NoiseStream stream{99, 5, 17};
    const NoiseStream start = stream;
    const auto first = sample_increment(model, stream, 1e-3);
    EXPECT_EQ(stream.step, 18u);
    const auto again = replay(model, start, 1e-3);
    EXPECT_EQ(std::memcmp(first.values().data(), again.values().data(), sizeof(double) * 32), 0);
    EXPECT_FALSE(replay(model, {99, 6, 17}, 1e-3).values() == first.values());
    EXPECT_FALSE(replay(model, {99, 5, 18}, 1e-3).values() == first.values());
}

TEST(Replay, IndependentOfThreadAndOrder) {
    const GridSpec grid(32);
    const auto model = make_spectral_colored(grid, 8, 1.0);
    std::vector<Vector> serial(64), threaded(64);
    Vector out;
    for (int k = 63; k >= 0; --k) {
        model.draw({3, static_cast<std::uint64_t>(k), 0}, 1e-2, out);
        serial[k] = out;
    }
    std::vector<std::thread> workers;
    for (int w = 0; w < 4; ++w) {
        workers.emplace_back([&, w] {
            Vector local;
            for (int k = w; k < 64; k += 4) {
                model.draw({3, static_cast<std::uint64_t>(k), 0}, 1e-2, local);
                threaded[k] = local;
            }
        });
    }
    for (auto& t : workers) t.join();
    for (int k = 0; k < 64; ++k) EXPECT_TRUE(serial[k] == threaded[k]);
}

TEST(SpectralColored, Examples) {
    const GridSpec grid(32);
    const auto one = make_spectral_colored(grid, 1, 2.0);
    EXPECT_EQ(one.rank(), 1);
    EXPECT_DOUBLE_EQ(one.singular_values()[0], 1.0);
    EXPECT_LE((one.modes().col(0) - Vector::Ones(32)).cwiseAbs().maxCoeff(), 1e-12);

    for (int k : {1, 5, 32}) {
        const auto model = make_spectral_colored(grid, k, 1.0);
        const Matrix gram = grid.h() * model.modes().transpose() * model.modes();
        EXPECT_LE((gram - Matrix::Identity(k, k)).cwiseAbs().maxCoeff(), 1e-10);
    }

    const auto eight = make_spectral_colored(grid, 8, 1.0);
    double partial = 0.0;
    for (int k = 1; k <= 8; ++k) partial += 1.0 / (k * k);
    EXPECT_NEAR(eight.singular_values().squaredNorm(), partial, 1e-14);
    EXPECT_NEAR(partial, 1.5274, 5e-5);

    // modes are the discrete cosine eigenvectors up to sign
    const Vector second = eight.modes().col(1);
    Vector cosine(32);
    for (int i = 0; i < 32; ++i) cosine[i] = std::sqrt(2.0) * std::cos(std::numbers::pi * grid.node(i));
    EXPECT_LE(std::min((second - cosine).norm(), (second + cosine).norm()), 1e-10);

    EXPECT_THROW(make_spectral_colored(grid, 33, 1.0), Error);
    EXPECT_THROW(make_spectral_colored(grid, 0, 1.0), Error);
}

TEST(Independence, LagOneAutocorrelation) {
    const GridSpec grid(16);
    const auto model = NoiseModel::white(grid);
    const int n = 40000;
    Vector out;
    std::vector<double> steps(n), paths(n);
    for (int k = 0; k < n; ++k) {
        model.draw({11, 0, static_cast<std::uint64_t>(k)}, 1.0, out);
        steps[k] = out[3];
        model.draw({11, static_cast<std::uint64_t>(k), 0}, 1.0, out);
        paths[k] = out[3];
    }
    auto lag1 = [](const std::vector<double>& x) {
        double mean = 0.0;
        for (double v : x) mean += v;
        mean /= static_cast<double>(x.size());
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            den += (x[i] - mean) * (x[i] - mean);
            if (i + 1 < x.size()) num += (x[i] - mean) * (x[i + 1] - mean);
        }
        return num / den;
    };
    EXPECT_LT(std::abs(lag1(steps)), 4.0 / std::sqrt(n));
    EXPECT_LT(std::abs(lag1(paths)), 4.0 / std::sqrt(n));
}

TEST(Scaling, HalfStepPairsMatchFullStep) {
    const GridSpec grid(8);
    for (const auto& model : {NoiseModel::white(grid), make_spectral_colored(grid, 4, 0.5)}) {
        const double dt = 0.02;
        const int n = 60000;
        CellMoments full(8), paired(8), half(8);
        Vector a, b;
        for (int path = 0; path < n; ++path) {
            const auto p = static_cast<std::uint64_t>(path);
            model.draw({5, p, 0}, dt, a);
            full.add(a);
            model.draw({5, p, 1}, dt / 2, a);
            model.draw({5, p, 2}, dt / 2, b);
            paired.add(a + b);
            half.add(std::sqrt(2.0) * a);
        }
        for (int i = 0; i < 8; ++i) {
            const double v = full.cell(i).variance;
            const double se = std::sqrt(2.0) * variance_se(v, n);
            EXPECT_LE(std::abs(paired.cell(i).variance - v), 4.0 * se);
            EXPECT_LE(std::abs(half.cell(i).variance - v), 4.0 * se);
        }
    }
}
