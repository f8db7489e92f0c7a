#include "rwre/regeneration.hpp"

#include <algorithm>
#include <cmath>

#include "rwre/errors.hpp"

namespace rwre {

std::optional<std::int64_t> stopping_time_D(std::span<const double> proj, std::int64_t from) {
    const std::int64_t n = static_cast<std::int64_t>(proj.size());
    if (from < 0 || from >= n) {
        throw IndexOutOfRangeError("stopping_time_D: from = " + std::to_string(from) +
                                   " outside sequence of length " + std::to_string(n));
    }
    const double level = proj[static_cast<std::size_t>(from)];
    for (std::int64_t m = 0; from + m < n; ++m) {
        if (proj[static_cast<std::size_t>(from + m)] < level) return m;
    }
    return std::nullopt;
}

std::optional<std::int64_t> stopping_time_T(std::span<const double> proj, double level) {
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(proj.size()); ++i) {
        if (proj[static_cast<std::size_t>(i)] >= level) return i;
    }
    return std::nullopt;
}

std::optional<FirstRegen> first_regeneration_oracle(std::span<const double> proj, CensorPolicy policy) {
    if (proj.empty()) {
        throw IndexOutOfRangeError("first_regeneration_oracle: empty projection");
    }
    const std::int64_t horizon = static_cast<std::int64_t>(proj.size()) - 1;
    double level = proj[0];    // M_{k-1}
    double running = proj[0];  // sup of proj over everything scanned so far
    std::int64_t scan = 0;     // everything before here is below level + 1
    std::vector<LadderState> ladder;
    for (std::int64_t k = 1;; ++k) {
        // S_k: first time the projection reaches level + 1. No time up to
        // the last drop can qualify (the sup there is `level`), so the scan
        // resumes where it stopped. Values passed on the way may exceed
        // `level` without reaching level + 1; they count toward the sup.
        std::int64_t s = -1;
        for (std::int64_t t = scan; t <= horizon; ++t) {
            const double x = proj[static_cast<std::size_t>(t)];
            if (x >= level + 1.0) {
                s = t;
                break;
            }
            running = std::max(running, x);
        }
        if (s < 0) return std::nullopt;  // S_k = infinity: censored

        // D after S_k: first strict drop below the value at s.
        const double s_value = proj[static_cast<std::size_t>(s)];
        running = std::max(running, s_value);
        std::int64_t r = -1;
        for (std::int64_t t = s + 1; t <= horizon; ++t) {
            const double x = proj[static_cast<std::size_t>(t)];
            if (x < s_value) {
                r = t;
                break;
            }
            running = std::max(running, x);
        }
        if (r < 0) {
            // No drop within the horizon: accept only with `guard` steps of
            // confirmation, otherwise the candidate is unconfirmed.
            if (s + policy.guard <= horizon) {
                ladder.push_back({k, running, s, std::nullopt});
                return FirstRegen{s, std::move(ladder)};
            }
            return std::nullopt;
        }
        level = running;  // M_k = sup up to R_k (the drop itself lies below)
        ladder.push_back({k, level, s, r});
        scan = r;
    }
}

namespace {

// Single pass over the projection. Candidates are speculative regeneration
// times kept on a stack: a strict drop below a candidate's level is exactly
// the event "R finite" for that rung, which both discards the candidate and
// resumes the enclosing recursion with target = running sup + 1. Each index
// is pushed and popped at most once.
template <typename T>
RegenerationSequence detect_impl(std::span<const T> proj, CensorPolicy policy) {
    if (proj.empty()) {
        throw IndexOutOfRangeError("detect_regenerations: empty projection");
    }
    if (policy.guard < 0) {
        throw ConfigError("censor guard must be >= 0");
    }
    const std::int64_t horizon = static_cast<std::int64_t>(proj.size()) - 1;

    std::vector<std::int64_t> cand_times;
    std::vector<T> cand_levels;
    T running_max = proj[0];
    T target = proj[0] + 1;

    for (std::int64_t t = 1; t <= horizon; ++t) {
        const T x = proj[static_cast<std::size_t>(t)];
        if (!cand_levels.empty() && x < cand_levels.back()) {
            do {
                cand_times.pop_back();
                cand_levels.pop_back();
            } while (!cand_levels.empty() && x < cand_levels.back());
            target = running_max + 1;  // M_k = sup up to this drop
        } else if (x >= target) {
            cand_times.push_back(t);
            cand_levels.push_back(x);
            target = x + 1;  // next block starts at this level
        }
        running_max = std::max(running_max, x);
    }

    RegenerationSequence out;
    out.horizon = horizon;
    out.guard = policy.guard;
    for (std::size_t i = 0; i < cand_times.size(); ++i) {
        if (cand_times[i] + policy.guard <= horizon) {
            out.times.push_back(cand_times[i]);
        } else {
            out.censored_tail_from = cand_times[i];
            break;  // later candidates are even closer to the horizon
        }
    }
    return out;
}

}  // namespace

RegenerationSequence detect_regenerations(std::span<const double> proj, CensorPolicy policy) {
    return detect_impl(proj, policy);
}

RegenerationSequence detect_regenerations(std::span<const std::int64_t> proj, CensorPolicy policy) {
    return detect_impl(proj, policy);
}

std::vector<RegenSample> extract_samples(const Trajectory& t, const RegenerationSequence& r,
                                         std::span<const double> ell) {
    if (r.times.size() < 2) {
        throw InsufficientRegenerationsError("need at least 2 accepted regeneration times, got " +
                                             std::to_string(r.times.size()));
    }
    return block_increments(t, r, ell);
}

std::vector<RegenSample> block_increments(const Trajectory& t, const RegenerationSequence& r,
                                          std::span<const double> ell) {
    require_unit(ell);
    const int d = t.dimension;
    std::vector<RegenSample> samples;
    samples.reserve(r.times.size());
    std::int64_t prev = 0;
    for (std::size_t k = 0; k < r.times.size(); ++k) {
        const std::int64_t cur = r.times[k];
        RegenSample s;
        s.first_block = (k == 0);
        s.delta_tau = cur - prev;
        s.delta_x.resize(static_cast<std::size_t>(d));
        const std::int64_t* base = t.positions.data() + prev * d;
        for (int i = 0; i < d; ++i) {
            s.delta_x[static_cast<std::size_t>(i)] = t.positions[static_cast<std::size_t>(cur * d + i)] - base[i];
        }
        double sup2 = 0.0;
        for (std::int64_t m = prev; m <= cur; ++m) {
            const std::int64_t* pm = t.positions.data() + m * d;
            double n2 = 0.0;
            for (int i = 0; i < d; ++i) {
                const double dx = static_cast<double>(pm[i] - base[i]);
                n2 += dx * dx;
            }
            sup2 = std::max(sup2, n2);
        }
        s.block_sup = std::sqrt(sup2);
        samples.push_back(std::move(s));
        prev = cur;
    }
    return samples;
}

double z_increment(const RegenSample& s, std::span<const double> v, std::span<const double> u) {
    require_unit(u);
    double z = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        z += (static_cast<double>(s.delta_x[i]) - static_cast<double>(s.delta_tau) * v[i]) * u[i];
    }
    return z;
}

std::int64_t count_kn(const RegenerationSequence& r, std::int64_t n) {
    if (n < 0) {
        throw IndexOutOfRangeError("count_kn: n must be >= 0");
    }
    if (n > r.horizon - r.guard) {
        throw UndeterminedError("count_kn: n = " + std::to_string(n) +
                                " falls in the censored tail (horizon " + std::to_string(r.horizon) +
                                ", guard " + std::to_string(r.guard) + ")");
    }
    const auto it = std::upper_bound(r.times.begin(), r.times.end(), n);
    return static_cast<std::int64_t>(it - r.times.begin());
}

}  // namespace rwre
