#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "rwre/regeneration.hpp"

namespace rwre {

// One checkpoint of a LIL curve. statistic is the normalized deviation
// (X_n - n v).u over the iterated-logarithm denominator; term_main, term2,
// term3 are its exact three-part split through the regeneration count k_n
// (statistic = term_main + term2 + term3 up to rounding).
struct LilPoint {
    std::int64_t n = 0;
    double statistic = 0.0;
    double term_main = 0.0;
    double term2 = 0.0;
    double term3 = 0.0;
    double running_max = 0.0;
    double running_min = 0.0;
};

struct LilCurve {
    std::int64_t replica = 0;
    std::vector<LilPoint> points;
};

struct DecompositionTerms {
    double main = 0.0;
    double t2 = 0.0;
    double t3 = 0.0;
};

// Everything the curve formulas need at one checkpoint; lets long runs drop
// their trajectories once the snapshots are taken.
struct CheckpointSnapshot {
    std::int64_t n = 0;
    std::int64_t k_n = 0;
    std::int64_t tau_kn = 0;               // tau_{k_n}, 0 when k_n = 0
    std::vector<std::int64_t> x_n;         // X_n
    std::vector<std::int64_t> x_tau;       // X_{tau_{k_n}}
};

// Throws UndeterminedError when k_n is censored at n.
CheckpointSnapshot snapshot_at(const Trajectory& t, const RegenerationSequence& r, std::int64_t n);

// ((X_n - n v) . u) / (mean_tau^{-1/2} (2 c_u n log log sqrt(n))^{1/2}).
// DomainError when n <= e^2 or mean_tau < 1; NonpositiveVarianceError when
// c_u <= 0; IndexOutOfRangeError when n exceeds the trajectory.
double lil_statistic(const Trajectory& t, std::int64_t n, std::span<const double> v, double c_u,
                     double mean_tau, std::span<const double> u);
double lil_statistic_from(const CheckpointSnapshot& s, std::span<const double> v, double c_u,
                          double mean_tau, std::span<const double> u);

// The three-part split of the statistic at n through k_n:
//   main = (sum_{j<=k_n} Z_j^u) / (mean_tau^{-1/2} phi(c_u k_n))
//          * ( k_n log log sqrt(c_u k_n) / (n log log sqrt(n)) )^{1/2}
//   t2   = (X_n - X_{tau_{k_n}}) . u / denom
//   t3   = (tau_{k_n} - n) (v . u) / denom
// with denom the statistic's denominator; main + t2 + t3 equals the
// statistic identically. Throws UndeterminedError when k_n is censored,
// DomainError when n <= e^2 or c_u k_n <= e^2.
DecompositionTerms decomposition_terms(const Trajectory& t, const RegenerationSequence& r,
                                       std::int64_t n, std::span<const double> v, double c_u,
                                       double mean_tau, std::span<const double> u);
DecompositionTerms decomposition_terms_from(const CheckpointSnapshot& s, std::span<const double> v,
                                            double c_u, double mean_tau, std::span<const double> u);

// Statistic + split + prefix extremes at each checkpoint.
LilCurve build_curve(std::int64_t replica, const Trajectory& t, const RegenerationSequence& r,
                     std::span<const std::int64_t> checkpoints, std::span<const double> v,
                     double c_u, double mean_tau, std::span<const double> u);
LilCurve build_curve_from(std::int64_t replica, std::span<const CheckpointSnapshot> snapshots,
                          std::span<const double> v, double c_u, double mean_tau,
                          std::span<const double> u);

// Prefix maxima and minima.
std::pair<std::vector<double>, std::vector<double>> running_extremes(std::span<const double> values);

struct DecayRow {
    std::int64_t n = 0;
    double max_abs_t2 = 0.0;
    double max_abs_t3 = 0.0;
    double q99_abs_t2 = 0.0;
    double q99_abs_t3 = 0.0;
    double stat_max = 0.0;
    double stat_min = 0.0;
};

struct DecayTable {
    std::vector<DecayRow> rows;
    bool q99_t2_decreased = false;  // last checkpoint vs first
    bool q99_t3_decreased = false;
};

// Cross-replica error-term envelope per checkpoint: extremes, 99th-percentile
// bands of |t2| and |t3|, and whether the bands shrank from the first to the
// last checkpoint. Curves must share the same checkpoint grid.
DecayTable error_term_report(std::span<const LilCurve> curves);

}  // namespace rwre
