#include "rdlab/noise.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace rdlab {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

// 53-bit uniform on the open interval (0, 1).
inline double to_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

std::array<double, 2> normal_pair(std::uint64_t seed, std::uint64_t path, std::uint64_t step, std::uint32_t pair,
                                  Channel channel) {
    const std::array<std::uint32_t, 4> counter{pair, static_cast<std::uint32_t>(step),
                                               static_cast<std::uint32_t>(step >> 32),
                                               static_cast<std::uint32_t>(path)};
    const std::array<std::uint32_t, 2> key{
        static_cast<std::uint32_t>(seed),
        static_cast<std::uint32_t>(seed >> 32) ^ (static_cast<std::uint32_t>(channel) * 0x85EBCA6Bu) ^
            static_cast<std::uint32_t>(path >> 32)};
    const auto w = philox4x32(counter, key);
    const double u1 = to_unit(w[0], w[1]);
    const double u2 = to_unit(w[2], w[3]);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
}

void fill_normals(std::uint64_t seed, std::uint64_t path, std::uint64_t step, int count, Vector& out) {
    out.resize(count);
    for (int i = 0; i < count; i += 2) {
        const auto z = normal_pair(seed, path, step, static_cast<std::uint32_t>(i / 2), Channel::Noise);
        out[i] = z[0];
        if (i + 1 < count) out[i + 1] = z[1];
    }
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
        mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

double counter_normal(std::uint64_t seed, std::uint64_t path, std::uint64_t step, std::uint32_t index,
                      Channel channel) {
    return normal_pair(seed, path, step, index / 2, channel)[index % 2];
}

NoiseModel NoiseModel::white(GridSpec grid) { return NoiseModel(NoiseKind::White1D, grid, Vector(), Matrix()); }

NoiseModel NoiseModel::colored(GridSpec grid, Vector s, Matrix modes) {
    const int k = static_cast<int>(s.size());
    if (k < 1) throw Error("colored noise: rank must be at least 1");
    if (modes.rows() != grid.cells() || modes.cols() != k) throw Error("colored noise: mode matrix shape mismatch");
    for (int j = 0; j < k; ++j) {
        if (!(s[j] > 0.0)) throw Error("colored noise: singular values must be positive");
        if (j > 0 && s[j] > s[j - 1]) throw Error("colored noise: singular values must be nonincreasing");
    }
    const Matrix gram = grid.h() * modes.transpose() * modes;
    if ((gram - Matrix::Identity(k, k)).cwiseAbs().maxCoeff() > 1e-10) {
        throw Error("colored noise: modes are not orthonormal in the weighted L2 inner product");
    }
    return NoiseModel(NoiseKind::Colored, grid, std::move(s), std::move(modes));
}

void NoiseModel::draw(const NoiseStream& stream, double dt, Vector& out) const {
    if (!(dt > 0.0)) throw Error("noise: step must be positive");
    if (kind_ == NoiseKind::White1D) {
        fill_normals(stream.seed, stream.path, stream.step, grid_.cells(), out);
        out *= std::sqrt(dt / grid_.h());
        return;
    }
    Vector xi;
    fill_normals(stream.seed, stream.path, stream.step, rank(), xi);
    out = modes_ * (singular_values_.cwiseProduct(xi) * std::sqrt(dt));
}

GridFunction sample_increment(const NoiseModel& model, NoiseStream& stream, double dt) {
    Vector out;
    model.draw(stream, dt, out);
    ++stream.step;
    return {model.grid(), std::move(out)};
}

GridFunction replay(const NoiseModel& model, const NoiseStream& stream, double dt) {
    Vector out;
    model.draw(stream, dt, out);
    return {model.grid(), std::move(out)};
}

NoiseModel make_spectral_colored(GridSpec grid, int rank, double decay) {
    const int m = grid.cells();
    if (rank < 1 || rank > m) {
        throw Error("make_spectral_colored: rank " + std::to_string(rank) + " outside [1, " + std::to_string(m) + "]");
    }
    if (!(decay > 0.0)) throw Error("make_spectral_colored: decay must be positive");
    Matrix modes(m, rank);
    Vector s(rank);
    for (int k = 0; k < rank; ++k) {
        for (int i = 0; i < m; ++i) modes(i, k) = std::cos(std::numbers::pi * k * grid.node(i));
        // Gram-Schmidt in the weighted inner product
        for (int j = 0; j < k; ++j) modes.col(k) -= grid.h() * modes.col(j).dot(modes.col(k)) * modes.col(j);
        modes.col(k) /= std::sqrt(grid.h() * modes.col(k).squaredNorm());
        s[k] = std::pow(static_cast<double>(k + 1), -decay);
    }
    return NoiseModel::colored(grid, std::move(s), std::move(modes));
}

}  // namespace rdlab
