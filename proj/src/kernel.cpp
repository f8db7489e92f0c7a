#include "rwre/kernel.hpp"

#include <cmath>
#include <sstream>

#include "rwre/errors.hpp"

namespace rwre {

void validate_kernel(const TransitionKernel& k, double kappa) {
    const std::size_t n = k.probs.size();
    if (n == 0 || n % 2 != 0) {
        throw NotStochasticError("kernel length must be 2d with d >= 1, got " + std::to_string(n));
    }
    double sum = 0.0;
    for (double p : k.probs) sum += p;
    if (std::abs(sum - 1.0) > kStochasticTol) {
        std::ostringstream os;
        os.precision(17);
        os << "kernel entries sum to " << sum << ", expected 1 within " << kStochasticTol;
        throw NotStochasticError(os.str());
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (k.probs[i] < kappa) {
            std::ostringstream os;
            os.precision(17);
            os << "kernel entry " << i << " = " << k.probs[i] << " below kappa = " << kappa;
            throw EllipticityError(os.str());
        }
    }
}

std::vector<double> mean_drift(const TransitionKernel& k) {
    const int d = k.dimension();
    std::vector<double> drift(static_cast<std::size_t>(d), 0.0);
    for (int i = 0; i < 2 * d; ++i) {
        drift[static_cast<std::size_t>(direction_axis(i))] +=
            k.probs[static_cast<std::size_t>(i)] * direction_sign(i);
    }
    return drift;
}

double step_mean(const TransitionKernel& k, std::span<const double> u) {
    double m = 0.0;
    for (int i = 0; i < static_cast<int>(k.probs.size()); ++i) {
        m += k.probs[static_cast<std::size_t>(i)] * direction_sign(i) *
             u[static_cast<std::size_t>(direction_axis(i))];
    }
    return m;
}

double step_second_moment(const TransitionKernel& k, std::span<const double> u) {
    double m2 = 0.0;
    for (int i = 0; i < static_cast<int>(k.probs.size()); ++i) {
        const double proj = direction_sign(i) * u[static_cast<std::size_t>(direction_axis(i))];
        m2 += k.probs[static_cast<std::size_t>(i)] * proj * proj;
    }
    return m2;
}

double step_variance(const TransitionKernel& k, std::span<const double> u) {
    const double m = step_mean(k, u);
    return step_second_moment(k, u) - m * m;
}

int sample_direction(std::span<const double> cdf, double u) noexcept {
    const int n = static_cast<int>(cdf.size());
    for (int i = 0; i < n - 1; ++i) {
        if (u < cdf[static_cast<std::size_t>(i)]) return i;
    }
    return n - 1;
}

void build_cdf(std::span<const double> probs, std::span<double> cdf) noexcept {
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        cdf[i] = acc;
    }
    if (!cdf.empty()) cdf[cdf.size() - 1] = 1.0;
}

}  // namespace rwre
