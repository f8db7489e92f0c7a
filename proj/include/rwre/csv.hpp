#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rwre/lil.hpp"
#include "rwre/regeneration.hpp"
#include "rwre/walk.hpp"

namespace rwre {

// Columnar trajectory export: header `step,x1,...,xd,proj`, one row per
// walk position, proj taken against the supplied direction.
void write_trajectory_csv(std::ostream& os, const Trajectory& t, std::span<const double> ell);

// Inverse of write_trajectory_csv. Throws ParseError (with the 1-based line)
// on malformed headers, non-numeric fields, gaps in the step column, or
// consecutive positions that are not unit lattice moves.
Trajectory read_trajectory_csv(std::istream& is);

// Regeneration report: header `k,tau_k,delta_tau,dx1,...,dxd,block_sup`.
void write_regen_report_csv(std::ostream& os, const RegenerationSequence& r,
                            std::span<const RegenSample> samples);

// `replica,n,statistic,term_main,term2,term3`
void write_lil_curves_csv(std::ostream& os, std::span<const LilCurve> curves);

// `n,stat_max,stat_min,q99_abs_t2,q99_abs_t3`
void write_lil_envelope_csv(std::ostream& os, const DecayTable& table);

// Shortest round-trip double formatting used across all emitted files.
std::string format_double(double x);

}  // namespace rwre
