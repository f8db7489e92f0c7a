#include <doctest.h>

#include <cmath>
#include <vector>

#include "rwre/errors.hpp"
#include "rwre/regeneration.hpp"
#include "rwre/statistics.hpp"
#include "rwre/walk.hpp"

using namespace rwre;

namespace {

RegenSample make_block(std::int64_t dtau, std::vector<std::int64_t> dx, bool first = false,
                       double sup = 0.0) {
    RegenSample s;
    s.delta_tau = dtau;
    s.delta_x = std::move(dx);
    s.first_block = first;
    s.block_sup = sup;
    return s;
}

const std::vector<double> kE1{1.0, 0.0};
const std::vector<double> kE2{0.0, 1.0};

// pooled samples from the drifted homogeneous preset
std::vector<RegenSample> drifted_samples(std::int64_t replicas, std::int64_t horizon,
                                         std::uint64_t seed_base) {
    const EnvironmentModel model = EnvironmentModel::point_mass(2, 0.1, {0.4, 0.1, 0.25, 0.25});
    std::vector<RegenSample> all;
    for (std::int64_t i = 0; i < replicas; ++i) {
        const EnvironmentView env(model, seed_base + static_cast<std::uint64_t>(i));
        const Trajectory t = simulate(env, std::vector<std::int64_t>{0, 0}, horizon,
                                      WalkSeed{seed_base * 1000 + static_cast<std::uint64_t>(i)});
        const auto proj = axis_projection(t, 0, +1);
        const auto seq = detect_regenerations(std::span<const std::int64_t>(proj),
                                              CensorPolicy{500});
        if (seq.times.size() < 2) continue;
        for (auto& s : extract_samples(t, seq, kE1)) all.push_back(std::move(s));
    }
    return all;
}

}  // namespace

TEST_CASE("velocity: single block and degenerate sample") {
    std::vector<RegenSample> samples{make_block(1, {1, 0}, true), make_block(4, {3, 1})};
    CHECK(estimate_velocity(samples) == std::vector<double>{0.75, 0.25});
    samples.push_back(make_block(4, {3, 1}));
    samples.push_back(make_block(4, {3, 1}));
    CHECK(estimate_velocity(samples) == std::vector<double>{0.75, 0.25});

    const std::vector<RegenSample> only_first{make_block(1, {1, 0}, true)};
    CHECK_THROWS_AS(estimate_velocity(only_first), InsufficientRegenerationsError);
}

TEST_CASE("mean tau: direct mean and deterministic climb") {
    const std::vector<RegenSample> samples{make_block(2, {1, 0}, true), make_block(4, {2, 0}),
                                           make_block(6, {3, 1})};
    CHECK(estimate_mean_tau(samples).value == 5.0);

    // deterministic right-drift in one dimension: every step regenerates
    const std::int64_t n = 50;
    Trajectory t = Trajectory::from_steps({0}, std::vector<std::uint16_t>(n, 0));
    const auto proj = axis_projection(t, 0, +1);
    const auto seq = detect_regenerations(std::span<const std::int64_t>(proj), CensorPolicy{0});
    const auto blocks = extract_samples(t, seq, std::vector<double>{1.0});
    CHECK(estimate_mean_tau(blocks).value == 1.0);
}

TEST_CASE("mean tau: disjoint halves agree within 3 combined standard errors") {
    const auto samples = drifted_samples(4, 20000, 901);
    std::vector<RegenSample> a;
    std::vector<RegenSample> b;
    bool flip = false;
    for (const auto& s : samples) {
        if (s.first_block) continue;
        (flip ? a : b).push_back(s);
        flip = !flip;
    }
    const Estimate ea = estimate_mean_tau(a);
    const Estimate eb = estimate_mean_tau(b);
    const double se = std::sqrt(ea.std_error * ea.std_error + eb.std_error * eb.std_error);
    CHECK(std::abs(ea.value - eb.value) <= 3.0 * se);
}

TEST_CASE("c_u examples") {
    // Z values +1 and -1 against v = 0: mean of Z^2 is 1
    std::vector<RegenSample> pm{make_block(1, {0, 0}, true), make_block(2, {1, 0}),
                                make_block(2, {-1, 0})};
    const std::vector<double> v0{0.0, 0.0};
    CHECK(estimate_cu(pm, v0, kE1).second_moment == 1.0);

    std::vector<RegenSample> zero{make_block(1, {0, 0}, true), make_block(2, {1, 0}),
                                  make_block(2, {1, 0})};
    const std::vector<double> vhalf{0.5, 0.0};
    CHECK(estimate_cu(zero, vhalf, kE1).second_moment == 0.0);

    CHECK_THROWS_AS(estimate_cu(std::vector<RegenSample>{make_block(1, {1, 0}, true),
                                                         make_block(2, {1, 0})},
                                v0, kE1),
                    InsufficientRegenerationsError);
}

TEST_CASE("c_u sign symmetry is exact") {
    const auto samples = drifted_samples(2, 10000, 903);
    const std::vector<double> v = estimate_velocity(samples);
    const std::vector<double> me1{-1.0, 0.0};
    const std::vector<double> me2{0.0, -1.0};
    CHECK(estimate_cu(samples, v, kE1).second_moment == estimate_cu(samples, v, me1).second_moment);
    CHECK(estimate_cu(samples, v, kE2).second_moment == estimate_cu(samples, v, me2).second_moment);
}

TEST_CASE("third absolute moment") {
    const std::vector<RegenSample> samples{make_block(1, {0, 0}, true), make_block(2, {1, 0}),
                                           make_block(3, {-2, 0})};
    CHECK(estimate_third_moment(samples, kE1) == 4.5);  // (1 + 8) / 2
    const std::vector<RegenSample> zeros{make_block(1, {0, 0}, true), make_block(2, {0, 1}),
                                         make_block(2, {0, -1})};
    CHECK(estimate_third_moment(zeros, kE1) == 0.0);
}

TEST_CASE("phi closed forms and domain cut") {
    const double e4 = std::exp(4.0);
    CHECK(phi(e4) == doctest::Approx(std::sqrt(2.0 * e4 * std::log(2.0))).epsilon(1e-15));
    const double e2e = std::exp(2.0 * std::exp(1.0));
    CHECK(phi(e2e) == doctest::Approx(std::sqrt(2.0) * std::exp(std::exp(1.0))).epsilon(1e-15));
    CHECK_THROWS_AS(phi(std::exp(2.0)), DomainError);
    CHECK_THROWS_AS(phi(1.0), DomainError);
}

TEST_CASE("phi is strictly increasing beyond the domain cut") {
    double prev = phi(std::exp(2.0) + 0.001);
    for (int i = 1; i <= 2000; ++i) {
        const double x = std::exp(2.0) + 0.001 + 0.05 * i;
        const double value = phi(x);
        CHECK(value > prev);
        prev = value;
    }
}

TEST_CASE("lyapunov profile closed-form evaluation") {
    DirectionEstimates d;
    d.u = kE1;
    d.c_u_hat = 1.0;
    d.c_hat_u_hat = 1.0;
    d.first_sq = 1.0;
    d.first_abs3 = 1.0;
    const std::vector<std::int64_t> ks{1000000};
    const auto profile = lyapunov_profile(d, ks, 0.5);
    // all moments 1: s_k^2 = k, Gamma_k = k, so value = k^{-1/2} (log sqrt k)^{3/2}
    const double expect = 1e-3 * std::pow(0.5 * std::log(1e6), 1.5);
    CHECK(profile[0] == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("lyapunov profile scales like k^{-1/2}") {
    DirectionEstimates d;
    d.u = kE1;
    d.c_u_hat = 2.0;
    d.c_hat_u_hat = 5.0;
    d.first_sq = 1.5;
    d.first_abs3 = 4.0;
    const std::vector<std::int64_t> ks{1000000000000000000};
    const std::vector<std::int64_t> ks4{ks[0] * 4};
    const double ratio = lyapunov_profile(d, ks4, 0.5)[0] / lyapunov_profile(d, ks, 0.5)[0];
    // k^{-1/2} dominates; the residual log factor still contributes ~5% here
    CHECK(ratio == doctest::Approx(0.5).epsilon(0.06));
}

TEST_CASE("lyapunov profile rejects bad inputs") {
    DirectionEstimates d;
    d.first_sq = 0.5;
    d.c_u_hat = 0.0;
    CHECK_THROWS_AS(lyapunov_profile(d, std::vector<std::int64_t>{1}, 0.5), DomainError);
    d.c_u_hat = 1.0;
    CHECK_THROWS_AS(lyapunov_profile(d, std::vector<std::int64_t>{10}, 1.5), DomainError);
}

TEST_CASE("lyapunov profile decreases on estimated moments") {
    const auto samples = drifted_samples(4, 10000, 905);
    const auto summary = summarize(samples, std::vector<std::vector<double>>{kE1},
                                   BootstrapConfig{0, 0});
    const std::vector<std::int64_t> ks{100, 1000, 10000, 100000, 1000000};
    const auto profile = lyapunov_profile(summary.directions[0], ks, 0.5);
    for (std::size_t i = 1; i < profile.size(); ++i) {
        CHECK(profile[i] < profile[i - 1]);
    }
}

TEST_CASE("tail diagnostic closed forms") {
    std::vector<RegenSample> flat{make_block(1, {0, 0}, true), make_block(2, {1, 0}, false, 0.0),
                                  make_block(2, {1, 0}, false, 0.0)};
    const TailDiagnosticConfig cfg{0.5, 1.0};
    CHECK(tail_diagnostic(flat, cfg).value == 1.0);

    std::vector<RegenSample> one{make_block(1, {0, 0}, true), make_block(2, {1, 0}, false, 1.0)};
    CHECK(tail_diagnostic(one, cfg).value == doctest::Approx(std::exp(1.0)).epsilon(1e-15));

    CHECK_THROWS_AS(tail_diagnostic(flat, TailDiagnosticConfig{1.0, 1.0}), DomainError);
    CHECK_THROWS_AS(tail_diagnostic(flat, TailDiagnosticConfig{0.5, 0.0}), DomainError);
}

TEST_CASE("tail diagnostic is stable across half samples on the drifted preset") {
    const auto samples = drifted_samples(4, 20000, 907);
    std::vector<RegenSample> a;
    std::vector<RegenSample> b;
    bool flip = false;
    for (const auto& s : samples) {
        if (s.first_block) continue;
        (flip ? a : b).push_back(s);
        flip = !flip;
    }
    const TailDiagnosticConfig cfg{0.5, 0.1};
    const double va = tail_diagnostic(a, cfg).value;
    const double vb = tail_diagnostic(b, cfg).value;
    CHECK(std::abs(va - vb) <= 0.2 * std::max(va, vb));
}

TEST_CASE("independence diagnostic on crafted sequences") {
    std::vector<double> alternating(100);
    for (std::size_t i = 0; i < alternating.size(); ++i) {
        alternating[i] = (i % 2 == 0) ? 1.0 : -1.0;
    }
    CHECK(independence_diagnostic(alternating, 1) == doctest::Approx(-0.99).epsilon(1e-12));

    const std::vector<double> constant(50, 3.0);
    CHECK_THROWS_AS(independence_diagnostic(constant, 1), DegenerateSampleError);
    const std::vector<double> tiny{1.0, 2.0};
    CHECK_THROWS_AS(independence_diagnostic(tiny, 2), InsufficientRegenerationsError);
}

TEST_CASE("independence diagnostic stays in the i.i.d. band on the drifted preset") {
    const auto samples = drifted_samples(5, 10000, 909);
    const std::vector<double> v = estimate_velocity(samples);
    std::vector<double> z;
    for (const auto& s : samples) {
        if (!s.first_block) z.push_back(z_increment(s, v, kE1));
    }
    REQUIRE(z.size() >= 5000);
    const double band = 3.0 / std::sqrt(static_cast<double>(z.size()));
    CHECK(std::abs(independence_diagnostic(z, 1)) <= band);
}

TEST_CASE("summary: scale relation between velocity and mean block length") {
    const auto samples = drifted_samples(3, 10000, 911);
    const auto summary = summarize(samples, std::vector<std::vector<double>>{kE1, kE2},
                                   BootstrapConfig{50, 42});
    // ratio-estimator identity: v_hat = mean(dX) / mean(dtau) exactly
    double sum_dx = 0.0;
    std::int64_t n = 0;
    for (const auto& s : samples) {
        if (s.first_block) continue;
        sum_dx += static_cast<double>(s.delta_x[0]);
        ++n;
    }
    const double mean_dx = sum_dx / static_cast<double>(n);
    CHECK(summary.v_hat[0] == doctest::Approx(mean_dx / summary.mean_tau_hat).epsilon(1e-12));
    CHECK(summary.n_blocks == n);
    CHECK(summary.se_v_hat[0] > 0.0);
    CHECK(summary.directions[0].se_c_u_hat > 0.0);
}

TEST_CASE("c_u over mean_tau approaches the per-step variance (drifted preset)") {
    const auto samples = drifted_samples(8, 20000, 913);
    const auto summary = summarize(samples, std::vector<std::vector<double>>{kE1, kE2},
                                   BootstrapConfig{0, 0});
    REQUIRE(summary.n_blocks > 20000);
    CHECK(summary.directions[0].c_u_hat / summary.mean_tau_hat ==
          doctest::Approx(0.41).epsilon(0.1));
    CHECK(summary.directions[1].c_u_hat / summary.mean_tau_hat ==
          doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("external velocity pins the centering of Z") {
    const auto samples = drifted_samples(2, 5000, 915);
    const std::vector<double> v_true{0.3, 0.0};
    const auto summary = summarize(samples, std::vector<std::vector<double>>{kE1},
                                   BootstrapConfig{0, 0}, &v_true);
    // with an external v the sample mean of Z is no longer exactly zero
    CHECK(summary.directions[0].c_u_hat >= summary.directions[0].c_u_centered);
    CHECK(summary.v_hat[0] == doctest::Approx(0.3).epsilon(0.05));  // v_hat still reported
}
