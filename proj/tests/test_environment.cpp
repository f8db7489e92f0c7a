#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "rwre/environment.hpp"
#include "rwre/errors.hpp"
#include "rwre/rng.hpp"

using namespace rwre;

namespace {

// uniform-ish random site in [-10^6, 10^6]^d from a test-local stream
std::vector<std::int64_t> random_site(CounterRng& rng, int d) {
    std::vector<std::int64_t> site(static_cast<std::size_t>(d));
    for (auto& c : site) {
        c = static_cast<std::int64_t>(rng.next_index(2000001)) - 1000000;
    }
    return site;
}

}  // namespace

TEST_CASE("validate_kernel accepts the uniform kernel at maximal kappa") {
    CHECK_NOTHROW(validate_kernel(TransitionKernel{{0.25, 0.25, 0.25, 0.25}}, 0.25));
}

TEST_CASE("validate_kernel rejects an entry below kappa") {
    CHECK_THROWS_AS(validate_kernel(TransitionKernel{{0.7, 0.1, 0.1, 0.1}}, 0.2),
                    EllipticityError);
}

TEST_CASE("validate_kernel rejects a non-stochastic vector") {
    CHECK_THROWS_AS(validate_kernel(TransitionKernel{{0.4, 0.2, 0.2, 0.1}}, 0.05),
                    NotStochasticError);
}

TEST_CASE("mean_drift follows the fixed direction enumeration") {
    const auto drifted = mean_drift(TransitionKernel{{0.4, 0.1, 0.25, 0.25}});
    CHECK(drifted[0] == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(drifted[1] == 0.0);
    CHECK(mean_drift(TransitionKernel{{0.25, 0.25, 0.25, 0.25}}) == std::vector<double>{0.0, 0.0});
    CHECK(mean_drift(TransitionKernel{{0.8, 0.2}})[0] == doctest::Approx(0.6).epsilon(1e-15));
}

TEST_CASE("step moments of the drifted kernel") {
    const TransitionKernel k{{0.4, 0.1, 0.25, 0.25}};
    const std::vector<double> e1{1.0, 0.0};
    const std::vector<double> e2{0.0, 1.0};
    CHECK(step_second_moment(k, e1) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(step_variance(k, e1) == doctest::Approx(0.41).epsilon(1e-12));
    CHECK(step_variance(k, e2) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("point mass returns the base kernel at every site") {
    const auto model = EnvironmentModel::point_mass(2, 0.1, {0.4, 0.1, 0.25, 0.25});
    const EnvironmentView env(model, 7);
    CHECK(env.homogeneous());
    CounterRng rng(derive_key(0x7e57, 1));
    for (int i = 0; i < 100; ++i) {
        const auto site = random_site(rng, 2);
        CHECK(env.kernel_at(site).probs == std::vector<double>{0.4, 0.1, 0.25, 0.25});
    }
}

TEST_CASE("kernel_at is bit-identical on repeated queries") {
    const auto model = EnvironmentModel::elliptic_perturbation(2, 0.05, {0.4, 0.1, 0.25, 0.25}, 0.7);
    const EnvironmentView env(model, 99);
    CounterRng rng(derive_key(0x7e57, 2));
    for (int i = 0; i < 100; ++i) {
        const auto site = random_site(rng, 2);
        const auto a = env.kernel_at(site);
        const auto b = env.kernel_at(site);
        CHECK(std::memcmp(a.probs.data(), b.probs.data(), sizeof(double) * a.probs.size()) == 0);
    }
}

TEST_CASE("every emitted kernel is stochastic and elliptic over 10^4 sites") {
    const std::vector<EnvironmentModel> models{
        EnvironmentModel::elliptic_perturbation(2, 0.05, {0.4, 0.1, 0.25, 0.25}, 0.5),
        EnvironmentModel::elliptic_perturbation(2, 0.05, {0.4, 0.1, 0.25, 0.25}, 1.0),
        EnvironmentModel::two_kernel_mixture(2, 0.1, 0.3, {0.45, 0.1, 0.2, 0.25},
                                             {0.35, 0.1, 0.3, 0.25}),
        EnvironmentModel::point_mass(3, 0.1, {0.3, 0.1, 0.15, 0.15, 0.15, 0.15}),
    };
    for (const auto& model : models) {
        const EnvironmentView env(model, 1234);
        CounterRng rng(derive_key(0x7e57, 3));
        for (int i = 0; i < 10000; ++i) {
            const auto site = random_site(rng, model.dimension);
            CHECK_NOTHROW(validate_kernel(env.kernel_at(site), model.kappa));
        }
    }
}

TEST_CASE("kernels at adjacent sites are statistically independent") {
    const auto model = EnvironmentModel::elliptic_perturbation(2, 0.05, {0.4, 0.1, 0.25, 0.25}, 1.0);
    const EnvironmentView env(model, 31337);
    const int n = 10000;
    CounterRng rng(derive_key(0x7e57, 4));
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    std::vector<double> kernel(4);
    for (int i = 0; i < n; ++i) {
        auto site = random_site(rng, 2);
        env.kernel_at(site, kernel);
        const double x = kernel[0];
        site[0] += 1;
        env.kernel_at(site, kernel);
        const double y = kernel[0];
        sx += x;
        sy += y;
        sxx += x * x;
        syy += y * y;
        sxy += x * y;
    }
    const double nn = n;
    const double corr = (sxy - sx * sy / nn) /
                        std::sqrt((sxx - sx * sx / nn) * (syy - sy * sy / nn));
    CHECK(std::abs(corr) <= 3.0 / std::sqrt(nn));
}

TEST_CASE("spread 0 reproduces the base kernel up to rounding") {
    const auto model = EnvironmentModel::elliptic_perturbation(2, 0.05, {0.4, 0.1, 0.25, 0.25}, 0.0);
    const EnvironmentView env(model, 5);
    const std::vector<std::int64_t> site{12, -7};
    const auto k = env.kernel_at(site);
    const std::vector<double> base{0.4, 0.1, 0.25, 0.25};
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(k.probs[i] == doctest::Approx(base[i]).epsilon(1e-14));
    }
}

TEST_CASE("mixture emits exactly one of its two kernels") {
    const auto model = EnvironmentModel::two_kernel_mixture(2, 0.1, 0.5, {0.45, 0.1, 0.2, 0.25},
                                                            {0.35, 0.1, 0.3, 0.25});
    const EnvironmentView env(model, 5);
    CounterRng rng(derive_key(0x7e57, 5));
    int first = 0;
    for (int i = 0; i < 2000; ++i) {
        const auto k = env.kernel_at(random_site(rng, 2));
        const bool is_k1 = k.probs == std::vector<double>{0.45, 0.1, 0.2, 0.25};
        const bool is_k2 = k.probs == std::vector<double>{0.35, 0.1, 0.3, 0.25};
        CHECK((is_k1 || is_k2));
        first += is_k1 ? 1 : 0;
    }
    CHECK(first > 800);  // weight 0.5 within a loose band
    CHECK(first < 1200);
}

TEST_CASE("model validation rejects bad parameters") {
    CHECK_THROWS_AS(EnvironmentModel::point_mass(0, 0.1, {}), ConfigError);
    CHECK_THROWS_AS(EnvironmentModel::point_mass(2, 0.3, {0.25, 0.25, 0.25, 0.25}), ConfigError);
    CHECK_THROWS_AS(EnvironmentModel::point_mass(2, 0.2, {0.4, 0.1, 0.25, 0.25}),
                    EllipticityError);
    CHECK_THROWS_AS(EnvironmentModel::elliptic_perturbation(2, 0.05, {0.4, 0.1, 0.25, 0.25}, 1.5),
                    ConfigError);
    CHECK_THROWS_AS(EnvironmentModel::point_mass(1, 0.1, {0.6, 0.2}), NotStochasticError);
    CHECK_THROWS_AS(EnvironmentModel::point_mass(1, 0.1, {0.99, 0.0, 0.01}), ConfigError);
}

TEST_CASE("d = 1 models are allowed as a baseline") {
    const auto model = EnvironmentModel::point_mass(1, 0.2, {0.8, 0.2});
    const EnvironmentView env(model, 1);
    const std::vector<std::int64_t> site{-3};
    CHECK(env.kernel_at(site).probs == std::vector<double>{0.8, 0.2});
}

TEST_CASE("model JSON round trip") {
    const auto model = EnvironmentModel::elliptic_perturbation(2, 0.05, {0.4, 0.1, 0.25, 0.25}, 0.5);
    const auto back = parse_model_json(model_to_json_string(model));
    CHECK(back.dimension == 2);
    CHECK(back.kappa == 0.05);
    const auto* ep = std::get_if<EllipticPerturbation>(&back.variant);
    REQUIRE(ep != nullptr);
    CHECK(ep->spread == 0.5);
    CHECK(ep->base.probs == std::vector<double>{0.4, 0.1, 0.25, 0.25});

    CHECK_THROWS_AS(parse_model_json("{\"dimension\": 2}"), ConfigError);
    CHECK_THROWS_AS(parse_model_json("not json"), ConfigError);
}
