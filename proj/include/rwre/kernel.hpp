#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace rwre {

// Absolute tolerance for "entries sum to 1"; double renormalization residue.
inline constexpr double kStochasticTol = 1e-12;

// Direction enumeration is fixed and part of the external contract:
// index 0 = +e1, 1 = -e1, 2 = +e2, 3 = -e2, ..., 2a = +e_{a+1}, 2a+1 = -e_{a+1}.
constexpr int direction_axis(int index) noexcept { return index >> 1; }
constexpr int direction_sign(int index) noexcept { return (index & 1) ? -1 : +1; }

// Nearest-neighbour transition probabilities at one site, in the fixed
// direction enumeration. Length 2d.
struct TransitionKernel {
    std::vector<double> probs;

    TransitionKernel() = default;
    explicit TransitionKernel(std::vector<double> p) : probs(std::move(p)) {}

    int dimension() const { return static_cast<int>(probs.size() / 2); }
};

// Throws NotStochasticError if the entries do not sum to 1 within
// kStochasticTol, EllipticityError if some entry is below kappa.
void validate_kernel(const TransitionKernel& k, double kappa);

// sum_e p(e) e
std::vector<double> mean_drift(const TransitionKernel& k);

// Moments of a single step xi with law k, projected on u:
// E[xi . u], E[(xi . u)^2], and Var(xi . u).
double step_mean(const TransitionKernel& k, std::span<const double> u);
double step_second_moment(const TransitionKernel& k, std::span<const double> u);
double step_variance(const TransitionKernel& k, std::span<const double> u);

// First index i with u < cdf[i]; cdf is the inclusive prefix sum of the
// kernel entries in enumeration order (inverse-CDF sampling).
int sample_direction(std::span<const double> cdf, double u) noexcept;

// Inclusive prefix sums of probs, last entry forced to 1.
void build_cdf(std::span<const double> probs, std::span<double> cdf) noexcept;

}  // namespace rwre
