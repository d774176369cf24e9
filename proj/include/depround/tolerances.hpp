#pragma once

// All numerical tolerances live here so every module agrees on what
// "feasible", "integral" and "fixed" mean.

namespace depround {

// Constraint feasibility for LP/ILP solutions (absolute, on scaled rows).
inline constexpr double kFeasTol = 1e-7;

// A variable value within this distance of an integer counts as integral.
inline constexpr double kIntTol = 1e-6;

// Simplex reduced-cost threshold: smaller improvements are treated as zero.
inline constexpr double kOptTol = 1e-9;

// Minimum pivot magnitude accepted by the simplex ratio test.
inline constexpr double kPivotTol = 1e-9;

// Values within this distance of 0 or 1 are fixed before any rounding runs.
inline constexpr double kFixTol = 1e-9;

// Group sums of a rounding problem must be integral within this tolerance.
inline constexpr double kGroupIntTol = 1e-9;

// Accumulated floating error allowed when the last fractional member of a
// group is snapped to an integer at the end of a rounding walk.
inline constexpr double kSnapTol = 1e-6;

// Scaled slack allowed by the per-step monotonicity checks of the
// derandomized walks (a chosen corner may be "worse" by at most this much).
inline constexpr double kMonotoneTol = 1e-9;

}  // namespace depround
