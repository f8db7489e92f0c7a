#include "rwre/lil.hpp"

#include <algorithm>
#include <cmath>

#include "rwre/errors.hpp"
#include "rwre/statistics.hpp"

namespace rwre {

namespace {

double loglog_sqrt(double x) { return std::log(std::log(std::sqrt(x))); }

// mean_tau^{-1/2} (2 c_u n log log sqrt(n))^{1/2}
double lil_denominator(std::int64_t n, double c_u, double mean_tau) {
    static const double e2 = std::exp(2.0);
    if (!(static_cast<double>(n) > e2)) {
        throw DomainError("lil statistic requires n > e^2, got n = " + std::to_string(n));
    }
    if (!(c_u > 0.0)) {
        throw NonpositiveVarianceError("c_u must be > 0, got " + std::to_string(c_u));
    }
    if (!(mean_tau >= 1.0)) {
        throw DomainError("mean_tau must be >= 1, got " + std::to_string(mean_tau));
    }
    const double nn = static_cast<double>(n);
    return std::pow(mean_tau, -0.5) * std::sqrt(2.0 * c_u * nn * loglog_sqrt(nn));
}

double statistic_core(std::int64_t n, std::span<const std::int64_t> x_n, std::span<const double> v,
                      double c_u, double mean_tau, std::span<const double> u) {
    require_unit(u);
    const double denom = lil_denominator(n, c_u, mean_tau);
    double numer = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        numer += (static_cast<double>(x_n[i]) - static_cast<double>(n) * v[i]) * u[i];
    }
    return numer / denom;
}

}  // namespace

CheckpointSnapshot snapshot_at(const Trajectory& t, const RegenerationSequence& r, std::int64_t n) {
    if (n < 0 || n > t.num_steps()) {
        throw IndexOutOfRangeError("snapshot_at: n outside trajectory");
    }
    CheckpointSnapshot s;
    s.n = n;
    s.k_n = count_kn(r, n);
    s.tau_kn = s.k_n >= 1 ? r.times[static_cast<std::size_t>(s.k_n - 1)] : 0;
    const auto xn = t.position(n);
    const auto xt = t.position(s.tau_kn);
    s.x_n.assign(xn.begin(), xn.end());
    s.x_tau.assign(xt.begin(), xt.end());
    return s;
}

double lil_statistic(const Trajectory& t, std::int64_t n, std::span<const double> v, double c_u,
                     double mean_tau, std::span<const double> u) {
    if (n < 0 || n > t.num_steps()) {
        throw IndexOutOfRangeError("lil_statistic: n outside trajectory");
    }
    return statistic_core(n, t.position(n), v, c_u, mean_tau, u);
}

double lil_statistic_from(const CheckpointSnapshot& s, std::span<const double> v, double c_u,
                          double mean_tau, std::span<const double> u) {
    return statistic_core(s.n, s.x_n, v, c_u, mean_tau, u);
}

DecompositionTerms decomposition_terms_from(const CheckpointSnapshot& s, std::span<const double> v,
                                            double c_u, double mean_tau, std::span<const double> u) {
    require_unit(u);
    const double denom = lil_denominator(s.n, c_u, mean_tau);

    static const double e2 = std::exp(2.0);
    const double ck = c_u * static_cast<double>(s.k_n);
    if (!(ck > e2)) {
        throw DomainError("decomposition main term requires c_u * k_n > e^2, got " +
                          std::to_string(ck));
    }

    // sum_{j<=k_n} Z_j^u telescopes to (X_{tau_{k_n}} - tau_{k_n} v) . u
    double sum_z = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        sum_z += (static_cast<double>(s.x_tau[i]) - static_cast<double>(s.tau_kn) * v[i]) * u[i];
    }
    const double nn = static_cast<double>(s.n);
    const double ratio = (static_cast<double>(s.k_n) * loglog_sqrt(ck)) / (nn * loglog_sqrt(nn));

    DecompositionTerms out;
    out.main = sum_z / (std::pow(mean_tau, -0.5) * phi(ck)) * std::sqrt(ratio);
    double overshoot = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        overshoot += static_cast<double>(s.x_n[i] - s.x_tau[i]) * u[i];
    }
    out.t2 = overshoot / denom;
    double vu = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) vu += v[i] * u[i];
    out.t3 = static_cast<double>(s.tau_kn - s.n) * vu / denom;
    return out;
}

DecompositionTerms decomposition_terms(const Trajectory& t, const RegenerationSequence& r,
                                       std::int64_t n, std::span<const double> v, double c_u,
                                       double mean_tau, std::span<const double> u) {
    return decomposition_terms_from(snapshot_at(t, r, n), v, c_u, mean_tau, u);
}

LilCurve build_curve_from(std::int64_t replica, std::span<const CheckpointSnapshot> snapshots,
                          std::span<const double> v, double c_u, double mean_tau,
                          std::span<const double> u) {
    LilCurve curve;
    curve.replica = replica;
    curve.points.reserve(snapshots.size());
    double run_max = 0.0;
    double run_min = 0.0;
    bool started = false;
    for (const CheckpointSnapshot& s : snapshots) {
        LilPoint p;
        p.n = s.n;
        p.statistic = lil_statistic_from(s, v, c_u, mean_tau, u);
        const DecompositionTerms terms = decomposition_terms_from(s, v, c_u, mean_tau, u);
        p.term_main = terms.main;
        p.term2 = terms.t2;
        p.term3 = terms.t3;
        if (!started) {
            run_max = run_min = p.statistic;
            started = true;
        } else {
            run_max = std::max(run_max, p.statistic);
            run_min = std::min(run_min, p.statistic);
        }
        p.running_max = run_max;
        p.running_min = run_min;
        curve.points.push_back(p);
    }
    return curve;
}

LilCurve build_curve(std::int64_t replica, const Trajectory& t, const RegenerationSequence& r,
                     std::span<const std::int64_t> checkpoints, std::span<const double> v,
                     double c_u, double mean_tau, std::span<const double> u) {
    std::vector<CheckpointSnapshot> snapshots;
    snapshots.reserve(checkpoints.size());
    for (std::int64_t n : checkpoints) snapshots.push_back(snapshot_at(t, r, n));
    return build_curve_from(replica, snapshots, v, c_u, mean_tau, u);
}

std::pair<std::vector<double>, std::vector<double>> running_extremes(std::span<const double> values) {
    if (values.empty()) {
        throw DomainError("running_extremes: empty input");
    }
    std::vector<double> maxs(values.size());
    std::vector<double> mins(values.size());
    maxs[0] = mins[0] = values[0];
    for (std::size_t i = 1; i < values.size(); ++i) {
        maxs[i] = std::max(maxs[i - 1], values[i]);
        mins[i] = std::min(mins[i - 1], values[i]);
    }
    return {std::move(maxs), std::move(mins)};
}

namespace {

// nearest-rank upper quantile
double quantile(std::vector<double>& scratch, double q) {
    std::sort(scratch.begin(), scratch.end());
    const std::size_t n = scratch.size();
    const std::size_t rank =
        std::min(n - 1, static_cast<std::size_t>(std::ceil(q * static_cast<double>(n))) - 1);
    return scratch[rank];
}

}  // namespace

DecayTable error_term_report(std::span<const LilCurve> curves) {
    if (curves.empty()) {
        throw DomainError("error_term_report: need at least one curve");
    }
    const std::size_t n_points = curves[0].points.size();
    for (const auto& c : curves) {
        if (c.points.size() != n_points) {
            throw DomainError("error_term_report: curves disagree on checkpoint grid");
        }
    }
    DecayTable table;
    table.rows.resize(n_points);
    std::vector<double> abs_t2(curves.size());
    std::vector<double> abs_t3(curves.size());
    for (std::size_t j = 0; j < n_points; ++j) {
        DecayRow& row = table.rows[j];
        row.n = curves[0].points[j].n;
        row.stat_max = curves[0].points[j].statistic;
        row.stat_min = curves[0].points[j].statistic;
        for (std::size_t c = 0; c < curves.size(); ++c) {
            const LilPoint& p = curves[c].points[j];
            abs_t2[c] = std::abs(p.term2);
            abs_t3[c] = std::abs(p.term3);
            row.max_abs_t2 = std::max(row.max_abs_t2, abs_t2[c]);
            row.max_abs_t3 = std::max(row.max_abs_t3, abs_t3[c]);
            row.stat_max = std::max(row.stat_max, p.statistic);
            row.stat_min = std::min(row.stat_min, p.statistic);
        }
        row.q99_abs_t2 = quantile(abs_t2, 0.99);
        row.q99_abs_t3 = quantile(abs_t3, 0.99);
    }
    if (n_points >= 2) {
        table.q99_t2_decreased = table.rows.back().q99_abs_t2 < table.rows.front().q99_abs_t2;
        table.q99_t3_decreased = table.rows.back().q99_abs_t3 < table.rows.front().q99_abs_t3;
    }
    return table;
}

}  // namespace rwre
