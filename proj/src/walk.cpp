#include "rwre/walk.hpp"

#include <cmath>
#include <cstring>

#include "rwre/errors.hpp"
#include "rwre/rng.hpp"

namespace rwre {

Trajectory Trajectory::from_steps(std::vector<std::int64_t> start, std::vector<std::uint16_t> steps) {
    Trajectory t;
    t.dimension = static_cast<int>(start.size());
    t.start = std::move(start);
    t.steps = std::move(steps);
    const std::int64_t n = t.num_steps();
    t.positions.resize(static_cast<std::size_t>((n + 1) * t.dimension));
    std::memcpy(t.positions.data(), t.start.data(), sizeof(std::int64_t) * t.start.size());
    for (std::int64_t k = 0; k < n; ++k) {
        const int dir = t.steps[static_cast<std::size_t>(k)];
        std::int64_t* prev = t.positions.data() + k * t.dimension;
        std::int64_t* next = prev + t.dimension;
        std::memcpy(next, prev, sizeof(std::int64_t) * static_cast<std::size_t>(t.dimension));
        next[direction_axis(dir)] += direction_sign(dir);
    }
    return t;
}

namespace {

// Shared stepping core. Sink sees (step index, direction, new position) and
// runs once per step; position is the mutable current site.
template <typename Sink>
void run_walk(const EnvironmentView& env, std::span<const std::int64_t> start, std::int64_t horizon,
              WalkSeed seed, std::vector<std::int64_t>& position, Sink&& sink) {
    if (horizon < 0 || horizon > kMaxHorizon) {
        throw ConfigError("horizon must lie in [0, 2^40], got " + std::to_string(horizon));
    }
    const int d = env.dimension();
    if (static_cast<int>(start.size()) != d) {
        throw ConfigError("start point dimension mismatch");
    }
    position.assign(start.begin(), start.end());

    const std::uint64_t step_key = derive_key(stream_role::walk, seed.replica_seed);
    std::vector<double> kernel(static_cast<std::size_t>(2 * d));
    std::vector<double> cdf(static_cast<std::size_t>(2 * d));

    const bool fixed_kernel = env.homogeneous();
    if (fixed_kernel) {
        env.kernel_at(position, kernel);
        build_cdf(kernel, cdf);
    }
    for (std::int64_t k = 0; k < horizon; ++k) {
        if (!fixed_kernel) {
            env.kernel_at(position, kernel);
            build_cdf(kernel, cdf);
        }
        const double u = stream_unit(step_key, static_cast<std::uint64_t>(k));
        const int dir = sample_direction(cdf, u);
        position[static_cast<std::size_t>(direction_axis(dir))] += direction_sign(dir);
        sink(k, dir, position);
    }
}

}  // namespace

Trajectory simulate(const EnvironmentView& env, std::span<const std::int64_t> start,
                    std::int64_t horizon, WalkSeed seed) {
    Trajectory t;
    const int d = env.dimension();
    t.dimension = d;
    t.start.assign(start.begin(), start.end());
    t.steps.resize(static_cast<std::size_t>(horizon));
    t.positions.resize(static_cast<std::size_t>((horizon + 1) * d));
    std::memcpy(t.positions.data(), start.data(), sizeof(std::int64_t) * start.size());

    std::vector<std::int64_t> position;
    run_walk(env, start, horizon, seed, position,
             [&](std::int64_t k, int dir, const std::vector<std::int64_t>& pos) {
                 t.steps[static_cast<std::size_t>(k)] = static_cast<std::uint16_t>(dir);
                 std::memcpy(t.positions.data() + (k + 1) * d, pos.data(),
                             sizeof(std::int64_t) * static_cast<std::size_t>(d));
             });
    return t;
}

std::vector<std::int64_t> simulate_endpoint(const EnvironmentView& env,
                                            std::span<const std::int64_t> start,
                                            std::int64_t horizon, WalkSeed seed) {
    std::vector<std::int64_t> position;
    run_walk(env, start, horizon, seed, position,
             [](std::int64_t, int, const std::vector<std::int64_t>&) {});
    return position;
}

void require_unit(std::span<const double> ell) {
    double norm2 = 0.0;
    for (double x : ell) norm2 += x * x;
    if (std::abs(std::sqrt(norm2) - 1.0) > 1e-12) {
        throw NotUnitVectorError("direction vector must have unit norm, |ell| = " +
                                 std::to_string(std::sqrt(norm2)));
    }
}

std::vector<double> projection(const Trajectory& t, std::span<const double> ell) {
    require_unit(ell);
    if (static_cast<int>(ell.size()) != t.dimension) {
        throw NotUnitVectorError("direction vector dimension mismatch");
    }
    const std::int64_t n = t.num_steps();
    std::vector<double> proj(static_cast<std::size_t>(n + 1));
    double acc = 0.0;
    for (int i = 0; i < t.dimension; ++i) {
        acc += static_cast<double>(t.start[static_cast<std::size_t>(i)]) * ell[static_cast<std::size_t>(i)];
    }
    proj[0] = acc;
    for (std::int64_t k = 0; k < n; ++k) {
        const int dir = t.steps[static_cast<std::size_t>(k)];
        acc += direction_sign(dir) * ell[static_cast<std::size_t>(direction_axis(dir))];
        proj[static_cast<std::size_t>(k + 1)] = acc;
    }
    return proj;
}

std::vector<std::int64_t> axis_projection(const Trajectory& t, int axis, int sign) {
    if (axis < 0 || axis >= t.dimension) {
        throw IndexOutOfRangeError("axis out of range");
    }
    const std::int64_t n = t.num_steps();
    std::vector<std::int64_t> proj(static_cast<std::size_t>(n + 1));
    for (std::int64_t k = 0; k <= n; ++k) {
        proj[static_cast<std::size_t>(k)] = sign * t.positions[static_cast<std::size_t>(k * t.dimension + axis)];
    }
    return proj;
}

std::optional<std::pair<int, int>> axis_of(std::span<const double> ell) {
    int axis = -1;
    int sign = 0;
    for (int i = 0; i < static_cast<int>(ell.size()); ++i) {
        const double x = ell[static_cast<std::size_t>(i)];
        if (std::abs(x) <= 1e-12) continue;
        if (axis >= 0) return std::nullopt;  // more than one nonzero component
        if (std::abs(std::abs(x) - 1.0) > 1e-12) return std::nullopt;
        axis = i;
        sign = x > 0 ? +1 : -1;
    }
    if (axis < 0) return std::nullopt;
    return std::make_pair(axis, sign);
}

}  // namespace rwre
