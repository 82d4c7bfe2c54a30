#ifndef FOVOPT_METRICS_HPP
#define FOVOPT_METRICS_HPP

#include <string>

#include "fovopt/optimizer.hpp"

namespace fovopt {

struct CurveComparison {
  double bd_rate_percent = 0.0;  // negative: tested curve cheaper
  double overlap_low = 0.0;      // q_norm range the comparison covers
  double overlap_high = 0.0;
  std::string method_note;
};

// Drops points dominated by a cheaper-or-equal point of at least equal
// quality; order preserved. Infeasible points never survive.
SweepCurve pareto_front(const SweepCurve& curve);

// Bjontegaard-style delta rate between two swept curves: cubic
// least-squares fit of log10(bandwidth) as a function of q_norm on each
// curve, integrated over the common quality range. Curves are reduced to
// their Pareto fronts first; throws std::invalid_argument when the overlap
// is empty or either curve has fewer than four usable points.
CurveComparison bd_rate(const SweepCurve& test, const SweepCurve& anchor);

}  // namespace fovopt

#endif  // FOVOPT_METRICS_HPP
