#pragma once

#include <array>
#include <cstdint>

#include "rdlab/grid.hpp"

namespace rdlab {

/// Philox4x32-10 block cipher: maps (counter, key) to four 32-bit words.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

/// Independent random channels sharing a seed.
enum class Channel : std::uint32_t { Noise = 0, InitialDatum = 1, Sampling = 2 };

/// Standard normal draw that is a pure function of the index tuple.
double counter_normal(std::uint64_t seed, std::uint64_t path, std::uint64_t step, std::uint32_t index,
                      Channel channel = Channel::Noise);

/// Position in a reproducible noise sequence. Cheap to copy; forking a path
/// is just constructing a stream with another path index.
struct NoiseStream {
    std::uint64_t seed = 0;
    std::uint64_t path = 0;
    std::uint64_t step = 0;
};

enum class NoiseKind { White1D, Colored };

class NoiseModel {
public:
    static NoiseModel white(GridSpec grid);
    /// `modes` holds one grid function per column; columns must be orthonormal
    /// in the weighted inner product h * sum u_i v_i, singular values positive
    /// and nonincreasing.
    static NoiseModel colored(GridSpec grid, Vector singular_values, Matrix modes);

    NoiseKind kind() const { return kind_; }
    const GridSpec& grid() const { return grid_; }
    int rank() const { return static_cast<int>(singular_values_.size()); }
    const Vector& singular_values() const { return singular_values_; }
    const Matrix& modes() const { return modes_; }

    /// Fills `out` with the increment for the stream's current step without
    /// advancing it.
    void draw(const NoiseStream& stream, double dt, Vector& out) const;

private:
    NoiseModel(NoiseKind kind, GridSpec grid, Vector s, Matrix modes)
        : kind_(kind), grid_(grid), singular_values_(std::move(s)), modes_(std::move(modes)) {}

    NoiseKind kind_;
    GridSpec grid_;
    Vector singular_values_;
    Matrix modes_;
};

/// Draws the increment over a step of length dt and advances the stream.
GridFunction sample_increment(const NoiseModel& model, NoiseStream& stream, double dt);

/// Re-draws the increment at the stream's current position; bit-identical to
/// the draw sample_increment made from the same position.
GridFunction replay(const NoiseModel& model, const NoiseStream& stream, double dt);

/// First K discrete Neumann cosine modes with singular values k^-decay.
NoiseModel make_spectral_colored(GridSpec grid, int rank, double decay);

}  // namespace rdlab
