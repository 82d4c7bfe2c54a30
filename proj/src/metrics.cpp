#include "fovopt/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fovopt {

namespace {

// Least-squares cubic fit y = sum c_k u^k via normal equations.
std::array<double, 4> fit_cubic(const std::vector<double>& u,
                                const std::vector<double>& y) {
  std::array<std::array<double, 5>, 4> m{};  // augmented [A | b]
  for (size_t i = 0; i < u.size(); ++i) {
    std::array<double, 4> pw{1.0, u[i], u[i] * u[i], u[i] * u[i] * u[i]};
    for (int r = 0; r < 4; ++r) {
      for (int cidx = 0; cidx < 4; ++cidx) m[r][cidx] += pw[r] * pw[cidx];
      m[r][4] += pw[r] * y[i];
    }
  }
  for (int col = 0; col < 4; ++col) {
    int piv = col;
    for (int r = col + 1; r < 4; ++r) {
      if (std::fabs(m[r][col]) > std::fabs(m[piv][col])) piv = r;
    }
    if (std::fabs(m[piv][col]) < 1e-13) {
      throw std::invalid_argument("bd_rate: cubic fit is singular");
    }
    std::swap(m[col], m[piv]);
    for (int r = 0; r < 4; ++r) {
      if (r == col) continue;
      double f = m[r][col] / m[col][col];
      for (int cidx = col; cidx < 5; ++cidx) m[r][cidx] -= f * m[col][cidx];
    }
  }
  std::array<double, 4> c{};
  for (int r = 0; r < 4; ++r) c[r] = m[r][4] / m[r][r];
  return c;
}

// Mean of the fitted cubic over u in [0,1].
double mean_cubic(const std::array<double, 4>& c) {
  return c[0] + c[1] / 2.0 + c[2] / 3.0 + c[3] / 4.0;
}

struct FrontData {
  std::vector<double> q;
  std::vector<double> log_rate;
};

FrontData front_data(const SweepCurve& curve) {
  SweepCurve front = pareto_front(curve);
  FrontData d;
  for (const SweepPoint& pt : front.points) {
    d.q.push_back(pt.result.q_norm);
    d.log_rate.push_back(std::log10(pt.bandwidth));
  }
  return d;
}

}  // namespace

SweepCurve pareto_front(const SweepCurve& curve) {
  if (curve.points.empty()) {
    throw std::invalid_argument("pareto_front: empty curve");
  }
  SweepCurve out;
  double best_q = -1.0;
  for (const SweepPoint& pt : curve.points) {
    if (!pt.result.feasible) continue;
    // strictly-better quality only: plateaus keep their cheapest point
    if (pt.result.q_norm > best_q) {
      out.points.push_back(pt);
      best_q = pt.result.q_norm;
    }
  }
  return out;
}

CurveComparison bd_rate(const SweepCurve& test, const SweepCurve& anchor) {
  FrontData t = front_data(test);
  FrontData a = front_data(anchor);
  if (t.q.size() < 4 || a.q.size() < 4) {
    throw std::invalid_argument(
        "bd_rate: need at least 4 Pareto points per curve");
  }
  double lo = std::max(t.q.front(), a.q.front());
  double hi = std::min(t.q.back(), a.q.back());
  if (!(hi > lo)) {
    throw std::invalid_argument("bd_rate: quality overlap is degenerate");
  }

  auto in_overlap = [&](const FrontData& d) {
    size_t n = d.q.size();
    size_t first = n;
    size_t last = 0;
    for (size_t i = 0; i < n; ++i) {
      if (d.q[i] >= lo - 1e-12 && d.q[i] <= hi + 1e-12) {
        if (first == n) first = i;
        last = i;
      }
    }
    FrontData sel;
    if (first == n) return sel;
    // one bracketing point per side keeps the cubic interpolating across
    // the integration limits instead of extrapolating past its data
    size_t begin = first > 0 ? first - 1 : 0;
    size_t end = std::min(last + 1, n - 1);
    for (size_t i = begin; i <= end; ++i) {
      // normalized abscissa keeps the normal equations well conditioned
      sel.q.push_back((d.q[i] - lo) / (hi - lo));
      sel.log_rate.push_back(d.log_rate[i]);
    }
    return sel;
  };
  FrontData ts = in_overlap(t);
  FrontData as = in_overlap(a);
  if (ts.q.size() < 4 || as.q.size() < 4) {
    throw std::invalid_argument(
        "bd_rate: fewer than 4 points inside the quality overlap");
  }

  double mean_t = mean_cubic(fit_cubic(ts.q, ts.log_rate));
  double mean_a = mean_cubic(fit_cubic(as.q, as.log_rate));
  double delta = mean_t - mean_a;

  CurveComparison cmp;
  cmp.bd_rate_percent = 100.0 * (std::pow(10.0, delta) - 1.0);
  cmp.overlap_low = lo;
  cmp.overlap_high = hi;
  std::ostringstream note;
  note << "cubic log10-rate fit on " << ts.q.size() << "/" << as.q.size()
       << " Pareto points, exact integral over the quality overlap";
  cmp.method_note = note.str();
  return cmp;
}

}  // namespace fovopt
