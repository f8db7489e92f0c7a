#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rwre/regeneration.hpp"

namespace rwre {

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
};

// c_u is reported uncentered (mean of Z^2) as the primary figure; the
// centered variance is carried alongside and converges to the same limit
// because E[Z] = 0 at the true velocity.
struct CuEstimate {
    double second_moment = 0.0;
    double centered = 0.0;
};

// Per-direction constants and the moments feeding the Lyapunov profile.
// first_sq / first_abs3 are the unconditioned first-block moments, estimated
// across replicas (one first block each).
struct DirectionEstimates {
    std::vector<double> u;
    double c_u_hat = 0.0;
    double c_u_centered = 0.0;
    double c_hat_u_hat = 0.0;  // mean |dX . u|^3 over non-first blocks
    double first_sq = 0.0;     // mean (dX . u)^2 over first blocks
    double first_abs3 = 0.0;   // mean |dX . u|^3 over first blocks
    double se_c_u_hat = 0.0;
    double se_c_hat_u_hat = 0.0;
};

struct EstimateSummary {
    std::vector<double> v_hat;
    double mean_tau_hat = 0.0;
    std::int64_t n_blocks = 0;        // non-first blocks
    std::int64_t n_first_blocks = 0;
    std::vector<double> se_v_hat;
    double se_mean_tau_hat = 0.0;
    std::vector<DirectionEstimates> directions;
};

struct TailDiagnosticConfig {
    double gamma = 0.5;  // strictly inside (0, 1)
    double c = 0.1;      // > 0
};

struct TailDiagnostic {
    double value = 0.0;       // mean exp(c * block_sup^gamma), non-first blocks
    double top_share = 0.0;   // fraction of the sum carried by the top 1% of summands
    bool unstable = false;    // top_share > 0.5: finite-sample evidence only
    std::int64_t n_blocks = 0;
};

// (sum dX) / (sum dtau) over non-first blocks: the ratio estimator of the
// conditional means. Throws InsufficientRegenerationsError without at least
// one non-first block.
std::vector<double> estimate_velocity(std::span<const RegenSample> samples);

// Sample mean of dtau over non-first blocks, plain standard error attached.
Estimate estimate_mean_tau(std::span<const RegenSample> samples);

// Mean of Z_k^2 (and centered variance) over non-first blocks, Z computed
// against the supplied v. Needs >= 2 non-first blocks.
CuEstimate estimate_cu(std::span<const RegenSample> samples, std::span<const double> v,
                       std::span<const double> u);

// Mean of |dX . u|^3 over non-first blocks.
double estimate_third_moment(std::span<const RegenSample> samples, std::span<const double> u);

// (2 x log log sqrt(x))^(1/2); DomainError for x <= e^2.
double phi(double x);

// Gamma_k / s_k^3 * (log s_k)^(1+eps) with s_k^2 = first_sq + (k-1) c_u and
// Gamma_k = first_abs3 + (k-1) c_hat_u, evaluated at each k in k_list.
// DomainError when eps is outside (0,1) or some s_k <= 1.
std::vector<double> lyapunov_profile(const DirectionEstimates& d,
                                     std::span<const std::int64_t> k_list, double epsilon);

// Empirical mean of exp(c * block_sup^gamma) over non-first blocks, with an
// instability flag when the top 1% of summands carries more than half the
// mass. Evidence about the exponential-tail assumption, never a verdict.
TailDiagnostic tail_diagnostic(std::span<const RegenSample> samples, TailDiagnosticConfig cfg);

// Empirical autocorrelation of z at the given lag. Throws
// InsufficientRegenerationsError (length <= lag) or DegenerateSampleError
// (zero variance).
double independence_diagnostic(std::span<const double> z, std::int64_t lag);

struct BootstrapConfig {
    int resamples = 200;
    std::uint64_t seed = 0;
};

// Full summary with block-bootstrap standard errors (resampling regeneration
// blocks, the i.i.d. unit). Velocity inside Z is the plug-in estimate from
// the same sample unless external_v is supplied.
EstimateSummary summarize(std::span<const RegenSample> samples,
                          std::span<const std::vector<double>> u_list, BootstrapConfig bootstrap,
                          const std::vector<double>* external_v = nullptr);

}  // namespace rwre
