#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rwre/kernel.hpp"

namespace rwre {

// Model variants. Each one describes a site-kernel law whose every draw
// satisfies the ellipticity bound of the owning model.

// Classical homogeneous walk; the analytic baseline.
struct PointMass {
    TransitionKernel base;
};

// Random kernel p = kappa + (1 - 2d kappa) * ((1-spread)*beta + spread*w),
// where beta is the base kernel mapped onto the ellipticity simplex and w is
// uniform on the simplex. spread = 0 reproduces the base, spread = 1 is a
// fully random elliptic kernel. Entries stay >= kappa by construction.
struct EllipticPerturbation {
    TransitionKernel base;
    double spread = 0.5;
};

// Site kernel is k1 with probability `weight`, else k2.
struct TwoKernelMixture {
    double weight = 0.5;
    TransitionKernel k1;
    TransitionKernel k2;
};

using ModelVariant = std::variant<PointMass, EllipticPerturbation, TwoKernelMixture>;

struct EnvironmentModel {
    int dimension = 2;
    double kappa = 0.1;
    ModelVariant variant;

    // Throws ConfigError / NotStochasticError / EllipticityError when the
    // variant cannot honour the invariants at this kappa.
    void validate() const;

    static EnvironmentModel point_mass(int dimension, double kappa, std::vector<double> base);
    static EnvironmentModel elliptic_perturbation(int dimension, double kappa,
                                                  std::vector<double> base, double spread);
    static EnvironmentModel two_kernel_mixture(int dimension, double kappa, double weight,
                                               std::vector<double> k1, std::vector<double> k2);
};

// JSON round trip lives in rwre/json_io.hpp; string convenience here.
// Shape: { "dimension": int, "kappa": real, "variant": {...}, "env_seed": int }
EnvironmentModel parse_model_json(const std::string& text);
std::string model_to_json_string(const EnvironmentModel& model);

// A realized environment: a deterministic map from lattice sites to kernels.
// Immutable after construction; kernel_at is pure and thread-safe.
class EnvironmentView {
public:
    EnvironmentView(EnvironmentModel model, std::uint64_t env_seed);

    const EnvironmentModel& model() const { return model_; }
    std::uint64_t env_seed() const { return env_seed_; }
    int dimension() const { return model_.dimension; }
    double kappa() const { return model_.kappa; }

    // True when the kernel is the same at every site (PointMass).
    bool homogeneous() const;

    TransitionKernel kernel_at(std::span<const std::int64_t> site) const;

    // Allocation-free variant for hot loops; out.size() == 2d.
    void kernel_at(std::span<const std::int64_t> site, std::span<double> out) const;

private:
    EnvironmentModel model_;
    std::uint64_t env_seed_;
    std::vector<double> base_simplex_;  // beta for EllipticPerturbation
};

}  // namespace rwre
