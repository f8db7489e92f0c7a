#include <doctest.h>

#include <cmath>
#include <vector>

#include "rwre/errors.hpp"
#include "rwre/lil.hpp"
#include "rwre/rng.hpp"
#include "rwre/statistics.hpp"
#include "rwre/walk.hpp"

using namespace rwre;

namespace {

const std::vector<double> kE1{1.0, 0.0};
const std::vector<std::int64_t> kOrigin{0, 0};

EnvironmentView drifted_env(std::uint64_t seed) {
    return EnvironmentView(EnvironmentModel::point_mass(2, 0.1, {0.4, 0.1, 0.25, 0.25}), seed);
}

struct Prepared {
    Trajectory traj;
    RegenerationSequence regens;
    std::vector<double> v;
    double c_u = 0.0;
    double mean_tau = 0.0;
};

Prepared prepare(std::uint64_t seed, std::int64_t horizon, std::int64_t guard) {
    Prepared p;
    p.traj = simulate(drifted_env(seed), kOrigin, horizon, WalkSeed{seed + 1});
    const auto proj = axis_projection(p.traj, 0, +1);
    p.regens = detect_regenerations(std::span<const std::int64_t>(proj), CensorPolicy{guard});
    const auto samples = extract_samples(p.traj, p.regens, kE1);
    p.v = estimate_velocity(samples);
    p.mean_tau = estimate_mean_tau(samples).value;
    p.c_u = estimate_cu(samples, p.v, kE1).second_moment;
    return p;
}

}  // namespace

TEST_CASE("statistic vanishes when the walk sits on its mean path") {
    // X_10 = (4, 0) with v = (0.4, 0): centered numerator is exactly zero
    Trajectory t = Trajectory::from_steps({0, 0}, {0, 0, 0, 0, 2, 3, 2, 3, 2, 3});
    REQUIRE(t.final_position()[0] == 4);
    REQUIRE(t.final_position()[1] == 0);
    const std::vector<double> v{0.4, 0.0};
    CHECK(lil_statistic(t, 10, v, 0.5, 2.0, kE1) == 0.0);
}

TEST_CASE("statistic negates with the direction") {
    const Prepared p = prepare(21, 4000, 400);
    const std::vector<double> me1{-1.0, 0.0};
    const double plus = lil_statistic(p.traj, 2048, p.v, p.c_u, p.mean_tau, kE1);
    const double minus = lil_statistic(p.traj, 2048, p.v, p.c_u, p.mean_tau, me1);
    CHECK(plus == -minus);
}

TEST_CASE("statistic against an independent arithmetic evaluation") {
    // n = 100, v = (0.3, 0), c_u = 0.5, mean_tau = 2, X_n = (40, 0), u = e1
    std::vector<std::uint16_t> steps(100, 2);  // mostly +e2
    for (int i = 0; i < 40; ++i) steps[static_cast<std::size_t>(i)] = 0;
    for (int i = 40; i < 70; ++i) steps[static_cast<std::size_t>(i)] = 2;
    for (int i = 70; i < 100; ++i) steps[static_cast<std::size_t>(i)] = 3;
    Trajectory t = Trajectory::from_steps({0, 0}, std::move(steps));
    REQUIRE(t.final_position()[0] == 40);
    const std::vector<double> v{0.3, 0.0};
    const double got = lil_statistic(t, 100, v, 0.5, 2.0, kE1);
    const double expect =
        10.0 / (std::pow(2.0, -0.5) * std::sqrt(2.0 * 0.5 * 100.0 * std::log(std::log(10.0))));
    CHECK(got == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("statistic domain errors") {
    const Prepared p = prepare(23, 2000, 200);
    CHECK_THROWS_AS(lil_statistic(p.traj, 7, p.v, p.c_u, p.mean_tau, kE1), DomainError);
    CHECK_THROWS_AS(lil_statistic(p.traj, 512, p.v, -1.0, p.mean_tau, kE1),
                    NonpositiveVarianceError);
    CHECK_THROWS_AS(lil_statistic(p.traj, 512, p.v, p.c_u, 0.5, kE1), DomainError);
    CHECK_THROWS_AS(lil_statistic(p.traj, 99999, p.v, p.c_u, p.mean_tau, kE1),
                    IndexOutOfRangeError);
}

TEST_CASE("decomposition identity on simulated replicas") {
    double worst = 0.0;
    for (std::uint64_t rep = 0; rep < 50; ++rep) {
        const Prepared p = prepare(100 + rep, 1 << 13, 256);
        for (const std::int64_t n : {std::int64_t{1} << 10, std::int64_t{1} << 12}) {
            const double stat = lil_statistic(p.traj, n, p.v, p.c_u, p.mean_tau, kE1);
            const auto terms = decomposition_terms(p.traj, p.regens, n, p.v, p.c_u, p.mean_tau, kE1);
            const double sum = terms.main + terms.t2 + terms.t3;
            const double scale = std::max({std::abs(stat), std::abs(terms.main), 1.0e-300});
            worst = std::max(worst, std::abs(sum - stat) / scale);
        }
    }
    CHECK(worst <= 1e-9);
}

TEST_CASE("decomposition at a regeneration time has vanishing error terms") {
    const Prepared p = prepare(31, 1 << 13, 256);
    // pick a regeneration time comfortably inside the domain
    std::int64_t n = -1;
    for (const std::int64_t tau : p.regens.times) {
        if (static_cast<double>(tau) > 200.0 &&
            p.c_u * static_cast<double>(count_kn(p.regens, tau)) > std::exp(2.0) + 1.0) {
            n = tau;
            break;
        }
    }
    REQUIRE(n > 0);
    const auto terms = decomposition_terms(p.traj, p.regens, n, p.v, p.c_u, p.mean_tau, kE1);
    CHECK(terms.t2 == 0.0);
    CHECK(terms.t3 == 0.0);
    CHECK(terms.main ==
          doctest::Approx(lil_statistic(p.traj, n, p.v, p.c_u, p.mean_tau, kE1)).epsilon(1e-12));
}

TEST_CASE("decomposition raises Undetermined in the censored tail") {
    const Prepared p = prepare(33, 4000, 1000);
    CHECK_THROWS_AS(decomposition_terms(p.traj, p.regens, 3500, p.v, p.c_u, p.mean_tau, kE1),
                    UndeterminedError);
}

TEST_CASE("decomposition raises DomainError when c_u k_n is too small") {
    const Prepared p = prepare(35, 4000, 400);
    RegenerationSequence few;
    few.times = {10};
    few.horizon = p.regens.horizon;
    few.guard = p.regens.guard;
    CHECK_THROWS_AS(decomposition_terms(p.traj, few, 1024, p.v, p.c_u, p.mean_tau, kE1),
                    DomainError);
}

TEST_CASE("snapshot path matches the trajectory path bit for bit") {
    const Prepared p = prepare(37, 1 << 13, 256);
    const std::vector<std::int64_t> checkpoints{1 << 10, 1 << 11, 1 << 12};
    const LilCurve direct =
        build_curve(0, p.traj, p.regens, checkpoints, p.v, p.c_u, p.mean_tau, kE1);
    std::vector<CheckpointSnapshot> snaps;
    for (const std::int64_t n : checkpoints) snaps.push_back(snapshot_at(p.traj, p.regens, n));
    const LilCurve from_snaps = build_curve_from(0, snaps, p.v, p.c_u, p.mean_tau, kE1);
    REQUIRE(direct.points.size() == from_snaps.points.size());
    for (std::size_t i = 0; i < direct.points.size(); ++i) {
        CHECK(direct.points[i].statistic == from_snaps.points[i].statistic);
        CHECK(direct.points[i].term_main == from_snaps.points[i].term_main);
        CHECK(direct.points[i].term2 == from_snaps.points[i].term2);
        CHECK(direct.points[i].term3 == from_snaps.points[i].term3);
    }
}

TEST_CASE("running extremes") {
    const std::vector<double> values{1.0, -2.0, 3.0};
    const auto [maxs, mins] = running_extremes(values);
    CHECK(maxs == std::vector<double>{1.0, 1.0, 3.0});
    CHECK(mins == std::vector<double>{1.0, -2.0, -2.0});

    const std::vector<double> constant(5, 2.5);
    const auto [cmax, cmin] = running_extremes(constant);
    CHECK(cmax == constant);
    CHECK(cmin == constant);

    std::vector<double> negated(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) negated[i] = -values[i];
    const auto [nmax, nmin] = running_extremes(negated);
    for (std::size_t i = 0; i < values.size(); ++i) {
        CHECK(nmax[i] == -mins[i]);
        CHECK(nmin[i] == -maxs[i]);
    }
    CHECK_THROWS_AS(running_extremes(std::vector<double>{}), DomainError);
}

TEST_CASE("curve running extremes are monotone") {
    const Prepared p = prepare(39, 1 << 14, 512);
    const std::vector<std::int64_t> checkpoints{1 << 10, 1 << 11, 1 << 12, 1 << 13};
    const LilCurve curve =
        build_curve(7, p.traj, p.regens, checkpoints, p.v, p.c_u, p.mean_tau, kE1);
    CHECK(curve.replica == 7);
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
        CHECK(curve.points[i].running_max >= curve.points[i - 1].running_max);
        CHECK(curve.points[i].running_min <= curve.points[i - 1].running_min);
    }
}

TEST_CASE("error term report on trivial inputs") {
    LilCurve flat;
    flat.replica = 0;
    for (const std::int64_t n : {1024, 2048}) {
        LilPoint p;
        p.n = n;
        flat.points.push_back(p);
    }
    const auto table = error_term_report(std::vector<LilCurve>{flat});
    CHECK(table.rows.size() == 2);
    CHECK(table.rows[0].max_abs_t2 == 0.0);
    CHECK(table.rows[1].q99_abs_t3 == 0.0);

    LilCurve single;
    single.replica = 1;
    LilPoint p;
    p.n = 1024;
    p.term2 = -0.25;
    p.term3 = 0.5;
    p.statistic = 0.75;
    single.points.push_back(p);
    const auto one = error_term_report(std::vector<LilCurve>{single});
    CHECK(one.rows[0].max_abs_t2 == 0.25);
    CHECK(one.rows[0].q99_abs_t2 == 0.25);
    CHECK(one.rows[0].max_abs_t3 == 0.5);
    CHECK(one.rows[0].stat_max == 0.75);
    CHECK(one.rows[0].stat_min == 0.75);
}
