#include "rwre/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rwre/errors.hpp"
#include "rwre/rng.hpp"

namespace rwre {

namespace {

std::int64_t count_non_first(std::span<const RegenSample> samples) {
    std::int64_t n = 0;
    for (const auto& s : samples) {
        if (!s.first_block) ++n;
    }
    return n;
}

void require_non_first(std::span<const RegenSample> samples, std::int64_t minimum) {
    if (count_non_first(samples) < minimum) {
        throw InsufficientRegenerationsError("need at least " + std::to_string(minimum) +
                                             " non-first regeneration blocks");
    }
}

double dot(std::span<const std::int64_t> x, std::span<const double> u) {
    double acc = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) acc += static_cast<double>(x[i]) * u[i];
    return acc;
}

}  // namespace

std::vector<double> estimate_velocity(std::span<const RegenSample> samples) {
    require_non_first(samples, 1);
    std::size_t d = 0;
    for (const auto& s : samples) {
        if (!s.first_block) {
            d = s.delta_x.size();
            break;
        }
    }
    std::vector<double> sum_dx(d, 0.0);
    double sum_dtau = 0.0;
    for (const auto& s : samples) {
        if (s.first_block) continue;
        for (std::size_t i = 0; i < d; ++i) sum_dx[i] += static_cast<double>(s.delta_x[i]);
        sum_dtau += static_cast<double>(s.delta_tau);
    }
    for (double& x : sum_dx) x /= sum_dtau;
    return sum_dx;
}

Estimate estimate_mean_tau(std::span<const RegenSample> samples) {
    require_non_first(samples, 1);
    double sum = 0.0;
    std::int64_t n = 0;
    for (const auto& s : samples) {
        if (s.first_block) continue;
        sum += static_cast<double>(s.delta_tau);
        ++n;
    }
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (const auto& s : samples) {
        if (s.first_block) continue;
        const double dev = static_cast<double>(s.delta_tau) - mean;
        ss += dev * dev;
    }
    const double se = n > 1 ? std::sqrt(ss / (static_cast<double>(n) * (static_cast<double>(n) - 1.0)))
                            : 0.0;
    return {mean, se};
}

CuEstimate estimate_cu(std::span<const RegenSample> samples, std::span<const double> v,
                       std::span<const double> u) {
    require_non_first(samples, 2);
    double sum_z = 0.0;
    double sum_z2 = 0.0;
    std::int64_t n = 0;
    for (const auto& s : samples) {
        if (s.first_block) continue;
        const double z = z_increment(s, v, u);
        sum_z += z;
        sum_z2 += z * z;
        ++n;
    }
    const double nn = static_cast<double>(n);
    const double second = sum_z2 / nn;
    const double mean = sum_z / nn;
    return {second, second - mean * mean};
}

double estimate_third_moment(std::span<const RegenSample> samples, std::span<const double> u) {
    require_non_first(samples, 1);
    require_unit(u);
    double sum = 0.0;
    std::int64_t n = 0;
    for (const auto& s : samples) {
        if (s.first_block) continue;
        const double p = dot(s.delta_x, u);
        sum += std::abs(p * p * p);
        ++n;
    }
    return sum / static_cast<double>(n);
}

double phi(double x) {
    static const double e2 = std::exp(2.0);
    if (!(x > e2)) {
        throw DomainError("phi requires x > e^2, got " + std::to_string(x));
    }
    return std::sqrt(2.0 * x * std::log(std::log(std::sqrt(x))));
}

std::vector<double> lyapunov_profile(const DirectionEstimates& d,
                                     std::span<const std::int64_t> k_list, double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) {
        throw DomainError("epsilon must lie in (0, 1), got " + std::to_string(epsilon));
    }
    std::vector<double> out;
    out.reserve(k_list.size());
    for (std::int64_t k : k_list) {
        if (k < 1) throw DomainError("profile index k must be >= 1");
        const double km1 = static_cast<double>(k - 1);
        const double s2 = d.first_sq + km1 * d.c_u_hat;
        const double gamma_k = d.first_abs3 + km1 * d.c_hat_u_hat;
        const double s = std::sqrt(s2);
        if (!(s > 1.0)) {
            throw DomainError("profile undefined for s_k <= 1 (k = " + std::to_string(k) + ")");
        }
        out.push_back(gamma_k / (s2 * s) * std::pow(std::log(s), 1.0 + epsilon));
    }
    return out;
}

TailDiagnostic tail_diagnostic(std::span<const RegenSample> samples, TailDiagnosticConfig cfg) {
    if (!(cfg.gamma > 0.0 && cfg.gamma < 1.0)) {
        throw DomainError("gamma must lie strictly in (0, 1)");
    }
    if (!(cfg.c > 0.0)) {
        throw DomainError("c must be > 0");
    }
    std::vector<double> summands;
    for (const auto& s : samples) {
        if (s.first_block) continue;
        summands.push_back(std::exp(cfg.c * std::pow(s.block_sup, cfg.gamma)));
    }
    TailDiagnostic out;
    out.n_blocks = static_cast<std::int64_t>(summands.size());
    if (summands.empty()) return out;
    const double total = std::accumulate(summands.begin(), summands.end(), 0.0);
    out.value = total / static_cast<double>(summands.size());
    const std::size_t top = std::max<std::size_t>(1, summands.size() / 100);
    std::nth_element(summands.begin(), summands.begin() + static_cast<std::ptrdiff_t>(top - 1),
                     summands.end(), std::greater<double>());
    double top_sum = 0.0;
    for (std::size_t i = 0; i < top; ++i) top_sum += summands[i];
    out.top_share = top_sum / total;
    out.unstable = out.top_share > 0.5;
    return out;
}

double independence_diagnostic(std::span<const double> z, std::int64_t lag) {
    if (lag < 1) throw DomainError("lag must be >= 1");
    const std::int64_t n = static_cast<std::int64_t>(z.size());
    if (n <= lag) {
        throw InsufficientRegenerationsError("sequence of length " + std::to_string(n) +
                                             " too short for lag " + std::to_string(lag));
    }
    double mean = 0.0;
    for (double x : z) mean += x;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double x : z) var += (x - mean) * (x - mean);
    if (var == 0.0) {
        throw DegenerateSampleError("autocorrelation undefined: sample variance is zero");
    }
    double cov = 0.0;
    for (std::int64_t i = 0; i + lag < n; ++i) {
        cov += (z[static_cast<std::size_t>(i)] - mean) * (z[static_cast<std::size_t>(i + lag)] - mean);
    }
    return cov / var;
}

namespace {

struct CoreEstimates {
    std::vector<double> v;
    double mean_tau = 0.0;
    std::vector<double> c_u;      // per direction
    std::vector<double> c_hat_u;  // per direction
};

// Shared path for the point estimate and every bootstrap resample: ratio
// velocity first, then Z against it (plug-in), unless an external v is
// pinned.
CoreEstimates core_estimates(std::span<const RegenSample> samples,
                             std::span<const std::size_t> indices,
                             std::span<const std::vector<double>> u_list,
                             const std::vector<double>* external_v) {
    const std::size_t d = samples[indices[0]].delta_x.size();
    CoreEstimates out;
    std::vector<double> sum_dx(d, 0.0);
    double sum_dtau = 0.0;
    for (std::size_t idx : indices) {
        const auto& s = samples[idx];
        for (std::size_t i = 0; i < d; ++i) sum_dx[i] += static_cast<double>(s.delta_x[i]);
        sum_dtau += static_cast<double>(s.delta_tau);
    }
    out.mean_tau = sum_dtau / static_cast<double>(indices.size());
    out.v.resize(d);
    for (std::size_t i = 0; i < d; ++i) out.v[i] = sum_dx[i] / sum_dtau;
    const std::vector<double>& v = external_v ? *external_v : out.v;

    out.c_u.assign(u_list.size(), 0.0);
    out.c_hat_u.assign(u_list.size(), 0.0);
    for (std::size_t ui = 0; ui < u_list.size(); ++ui) {
        const auto& u = u_list[ui];
        double sum_z2 = 0.0;
        double sum_abs3 = 0.0;
        for (std::size_t idx : indices) {
            const auto& s = samples[idx];
            double zx = 0.0;
            double px = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                px += static_cast<double>(s.delta_x[i]) * u[i];
                zx += (static_cast<double>(s.delta_x[i]) - static_cast<double>(s.delta_tau) * v[i]) * u[i];
            }
            sum_z2 += zx * zx;
            sum_abs3 += std::abs(px * px * px);
        }
        out.c_u[ui] = sum_z2 / static_cast<double>(indices.size());
        out.c_hat_u[ui] = sum_abs3 / static_cast<double>(indices.size());
    }
    return out;
}

}  // namespace

EstimateSummary summarize(std::span<const RegenSample> samples,
                          std::span<const std::vector<double>> u_list, BootstrapConfig bootstrap,
                          const std::vector<double>* external_v) {
    require_non_first(samples, 2);
    for (const auto& u : u_list) require_unit(u);

    std::vector<std::size_t> non_first;
    std::vector<std::size_t> first;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        (samples[i].first_block ? first : non_first).push_back(i);
    }

    EstimateSummary out;
    const CoreEstimates point = core_estimates(samples, non_first, u_list, external_v);
    out.v_hat = point.v;
    out.mean_tau_hat = point.mean_tau;
    out.n_blocks = static_cast<std::int64_t>(non_first.size());
    out.n_first_blocks = static_cast<std::int64_t>(first.size());

    const std::size_t d = point.v.size();
    out.directions.resize(u_list.size());
    for (std::size_t ui = 0; ui < u_list.size(); ++ui) {
        auto& dir = out.directions[ui];
        dir.u = u_list[ui];
        dir.c_u_hat = point.c_u[ui];
        dir.c_hat_u_hat = point.c_hat_u[ui];
        const std::vector<double>& v = external_v ? *external_v : point.v;
        dir.c_u_centered = estimate_cu(samples, v, u_list[ui]).centered;
        // unconditioned first-block moments, one per replica
        double sq = 0.0;
        double abs3 = 0.0;
        for (std::size_t idx : first) {
            const double p = dot(samples[idx].delta_x, u_list[ui]);
            sq += p * p;
            abs3 += std::abs(p * p * p);
        }
        if (!first.empty()) {
            dir.first_sq = sq / static_cast<double>(first.size());
            dir.first_abs3 = abs3 / static_cast<double>(first.size());
        }
    }

    // Block bootstrap: resample the non-first blocks with replacement and
    // rerun the whole estimator pipeline per resample.
    const int B = bootstrap.resamples;
    if (B > 1 && non_first.size() >= 2) {
        CounterRng rng(derive_key(stream_role::bootstrap, bootstrap.seed));
        std::vector<std::vector<double>> v_b(d);
        std::vector<double> tau_b;
        std::vector<std::vector<double>> cu_b(u_list.size());
        std::vector<std::vector<double>> c3_b(u_list.size());
        std::vector<std::size_t> resample(non_first.size());
        for (int b = 0; b < B; ++b) {
            for (std::size_t i = 0; i < resample.size(); ++i) {
                resample[i] = non_first[rng.next_index(non_first.size())];
            }
            const CoreEstimates est = core_estimates(samples, resample, u_list, external_v);
            for (std::size_t i = 0; i < d; ++i) v_b[i].push_back(est.v[i]);
            tau_b.push_back(est.mean_tau);
            for (std::size_t ui = 0; ui < u_list.size(); ++ui) {
                cu_b[ui].push_back(est.c_u[ui]);
                c3_b[ui].push_back(est.c_hat_u[ui]);
            }
        }
        auto sd = [](const std::vector<double>& xs) {
            double m = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
            double ss = 0.0;
            for (double x : xs) ss += (x - m) * (x - m);
            return std::sqrt(ss / (static_cast<double>(xs.size()) - 1.0));
        };
        out.se_v_hat.resize(d);
        for (std::size_t i = 0; i < d; ++i) out.se_v_hat[i] = sd(v_b[i]);
        out.se_mean_tau_hat = sd(tau_b);
        for (std::size_t ui = 0; ui < u_list.size(); ++ui) {
            out.directions[ui].se_c_u_hat = sd(cu_b[ui]);
            out.directions[ui].se_c_hat_u_hat = sd(c3_b[ui]);
        }
    } else {
        out.se_v_hat.assign(d, 0.0);
    }
    return out;
}

}  // namespace rwre
