#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "rwre/environment.hpp"

namespace rwre {

// Horizons are capped so |X_n| <= n can never overflow 64-bit coordinates
// and axis projections stay exactly representable as doubles.
inline constexpr std::int64_t kMaxHorizon = std::int64_t{1} << 40;

// Replica-level randomness, independent of the environment seed.
// (env_seed, replica_seed) fully determines a trajectory.
struct WalkSeed {
    std::uint64_t replica_seed = 0;
};

// A walk path X_0..X_n. Positions are stored flat, row-major, (n+1) x d.
struct Trajectory {
    int dimension = 0;
    std::vector<std::int64_t> start;
    std::vector<std::uint16_t> steps;      // direction indices in the fixed enumeration
    std::vector<std::int64_t> positions;   // (num_steps()+1) * dimension

    std::int64_t num_steps() const { return static_cast<std::int64_t>(steps.size()); }

    std::span<const std::int64_t> position(std::int64_t k) const {
        return {positions.data() + k * dimension, static_cast<std::size_t>(dimension)};
    }
    std::span<const std::int64_t> final_position() const { return position(num_steps()); }

    // Builds a trajectory from explicit direction indices (synthetic inputs
    // for tests and file ingest).
    static Trajectory from_steps(std::vector<std::int64_t> start, std::vector<std::uint16_t> steps);
};

// Simulates exactly `horizon` steps of the quenched chain: step k is drawn by
// inverse CDF over the fixed direction enumeration, using the kernel at the
// current site and the uniform variate of (seed, step index). Deterministic
// in (env, start, seed).
Trajectory simulate(const EnvironmentView& env, std::span<const std::int64_t> start,
                    std::int64_t horizon, WalkSeed seed);

// Same chain, but only the final position is kept. Identical stepping and
// randomness as simulate(); used when trajectories would not fit in memory.
std::vector<std::int64_t> simulate_endpoint(const EnvironmentView& env,
                                            std::span<const std::int64_t> start,
                                            std::int64_t horizon, WalkSeed seed);

// Throws NotUnitVectorError unless | |ell| - 1 | <= 1e-12.
void require_unit(std::span<const double> ell);

// (X_k . ell)_{k=0..n}, built by accumulating per-step increments so that
// consecutive values differ by exactly +-ell[axis].
std::vector<double> projection(const Trajectory& t, std::span<const double> ell);

// Exact integer projection for ell = sign * e_axis.
std::vector<std::int64_t> axis_projection(const Trajectory& t, int axis, int sign);

// (axis, sign) if ell is sign * e_axis within 1e-12, otherwise nullopt.
std::optional<std::pair<int, int>> axis_of(std::span<const double> ell);

}  // namespace rwre
