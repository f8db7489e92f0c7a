#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rwre/walk.hpp"

namespace rwre {

// Finite-horizon surrogate for an unconfirmable "never drops again": a
// candidate at time t is accepted only when t + guard <= horizon and the
// projection stays weakly above its level for the whole remaining horizon.
struct CensorPolicy {
    std::int64_t guard = 1000;
};

// One rung of the ladder recursion: at index k, the walk first reached
// level_prev + 1 at time s; r is the first later drop strictly below the
// value at s (nullopt when no drop occurs within the horizon), and level is
// the running sup of the projection up to r (up to the horizon for the
// accepted final rung).
struct LadderState {
    std::int64_t index = 0;
    double level = 0.0;
    std::int64_t s = 0;
    std::optional<std::int64_t> r;
};

struct FirstRegen {
    std::int64_t tau = 0;
    std::vector<LadderState> ladder;  // rungs 1..K in order
};

// Detected times tau_1 < tau_2 < ... (tau_0 = 0 implicit). Candidates that
// could not be confirmed within the horizon are discarded;
// censored_tail_from records the earliest discarded candidate time.
struct RegenerationSequence {
    std::vector<std::int64_t> times;
    std::optional<std::int64_t> censored_tail_from;
    std::int64_t horizon = 0;
    std::int64_t guard = 0;
};

// Per-block increments between consecutive regeneration times. The first
// block (from time 0 to tau_1) has a different law than the rest and is
// flagged so estimators can exclude it.
struct RegenSample {
    std::int64_t delta_tau = 0;
    std::vector<std::int64_t> delta_x;
    double block_sup = 0.0;  // sup_m |X_m - X_{tau_{k-1}}| over the block, euclidean
    bool first_block = false;
};

// Smallest m >= 0 with proj[from+m] < proj[from]; nullopt when the
// projection never drops strictly below its starting value in range.
// Throws IndexOutOfRangeError when `from` is outside the sequence.
std::optional<std::int64_t> stopping_time_D(std::span<const double> proj, std::int64_t from);

// Smallest n with proj[n] >= level (weak inequality); nullopt if never.
std::optional<std::int64_t> stopping_time_T(std::span<const double> proj, double level);

// The literal ladder recursion, run until the first rung whose drop time
// cannot be found within the horizon. Returns nullopt (censored) when no
// candidate is confirmed under the policy. proj must be nonempty.
std::optional<FirstRegen> first_regeneration_oracle(std::span<const double> proj, CensorPolicy policy);

// All regeneration times in one left-to-right O(n) pass; equals repeating
// first_regeneration_oracle on the trajectory re-based at each accepted
// time. The int64 overload is the exact fast path for axis directions and
// agrees with the real-valued path on integer projections.
RegenerationSequence detect_regenerations(std::span<const double> proj, CensorPolicy policy);
RegenerationSequence detect_regenerations(std::span<const std::int64_t> proj, CensorPolicy policy);

// One RegenSample per consecutive pair (tau_{k-1}, tau_k), k >= 1 with
// tau_0 = 0; the first block is flagged. Throws
// InsufficientRegenerationsError with fewer than 2 accepted times.
std::vector<RegenSample> extract_samples(const Trajectory& t, const RegenerationSequence& r,
                                         std::span<const double> ell);

// Same rows without the minimum-count requirement (report path: 0 or 1
// accepted times still produce their blocks).
std::vector<RegenSample> block_increments(const Trajectory& t, const RegenerationSequence& r,
                                          std::span<const double> ell);

// ((X_{tau_k} - X_{tau_{k-1}}) - (tau_k - tau_{k-1}) v) . u
double z_increment(const RegenSample& s, std::span<const double> v, std::span<const double> u);

// Largest k with tau_k <= n (tau_0 = 0 counts as 0). Throws
// UndeterminedError when n falls in the censored tail (n > horizon - guard).
std::int64_t count_kn(const RegenerationSequence& r, std::int64_t n);

}  // namespace rwre
