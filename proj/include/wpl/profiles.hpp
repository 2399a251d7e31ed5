#pragma once

// One C-infinity template and the profiles derived from it.

namespace wpl::profile {

// b(r) = exp(1 - 1/(1 - r^2)) for |r| < 1, 0 otherwise; b(0) = 1
double bump(double r);

// 0 for u <= 0, 1 for u >= 1, smooth monotone in between
double smooth_step(double u);

// radial flat-top: 1 on [0, kFlatEdge], 0 on [1, inf)
inline constexpr double kFlatEdge = 0.5;
double flat_top(double r);

// annular window of |xi|, supported in [1/2, 2], Calderon-normalized
double calderon_window(double r);
double calderon_constant();  // C_b = ln2 * int_{-1}^{1} b(u)^2 du

// low-frequency cutoff: 1 on [0,2], 0 on [4, inf)
double low_cut(double r);

}  // namespace wpl::profile
