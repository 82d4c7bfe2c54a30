#include "fovopt/optimizer.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fovopt {

namespace {

struct Candidate {
  OptimizationResult result;
  bool valid = false;
};

// Ranking used by the discrete searches: quality first, then larger s_hat,
// then lower total rate, then lower QP.
bool better(const OptimizationResult& lhs, const OptimizationResult& rhs) {
  if (lhs.q_norm != rhs.q_norm) return lhs.q_norm > rhs.q_norm;
  if (lhs.s_hat != rhs.s_hat) return lhs.s_hat > rhs.s_hat;
  if (lhs.total_rate != rhs.total_rate) return lhs.total_rate < rhs.total_rate;
  return lhs.qp.value_or(0) < rhs.qp.value_or(0);
}

void take_best(Candidate& best, const OptimizationResult& r) {
  if (!best.valid || better(r, best.result)) {
    best.result = r;
    best.valid = true;
  }
}

double objective(double q_hat, double s_hat, const ContentProfile& p,
                 const SegmentConfig& cfg, const ModelConstants& c) {
  double rl = rl_bitrate(q_hat, s_hat, p);
  double tau = (p.r_fov + rl) / cfg.bandwidth * cfg.init_duration;
  return quality_norm(tau, q_hat, s_hat, c);
}

void validate_levels(const std::vector<double>& levels) {
  if (levels.empty()) throw std::domain_error("s_levels must be nonempty");
  for (double s : levels) {
    if (!(s > 0.0) || s > 1.0) {
      throw std::domain_error("s levels must be in (0, 1]");
    }
  }
}

// Continuous-q search core; unset candidate means no feasible q_hat.
Candidate search_continuous_q(const ContentProfile& p, const SegmentConfig& cfg,
                              const ModelConstants& c, double s_hat,
                              int grid_points) {
  p.validate();
  cfg.validate();
  double budget = cfg.bandwidth - p.r_fov;
  Candidate best;
  if (budget <= 0.0) return best;
  double cap = budget / (p.r_max * std::pow(s_hat, p.beta));
  double hi = std::min(1.0, std::pow(cap, 1.0 / p.alpha));
  if (hi < kQhatFloor) return best;

  int n = std::max(grid_points, 2);
  double log_lo = std::log(kQhatFloor);
  double log_hi = std::log(hi);
  std::vector<double> grid(static_cast<size_t>(n));
  grid.front() = kQhatFloor;
  grid.back() = hi;
  for (int i = 1; i + 1 < n; ++i) {
    grid[static_cast<size_t>(i)] =
        std::exp(log_lo + (log_hi - log_lo) * i / (n - 1));
  }

  size_t best_i = 0;
  double best_f = -1.0;
  for (size_t i = 0; i < grid.size(); ++i) {
    double f = objective(grid[i], s_hat, p, cfg, c);
    // >= keeps the larger q_hat when the surface is flat to the ulp
    if (f >= best_f) {
      best_f = f;
      best_i = i;
    }
  }

  // Golden-section refinement on the bracket around the best grid point.
  double a = grid[best_i > 0 ? best_i - 1 : 0];
  double b = grid[std::min(best_i + 1, grid.size() - 1)];
  constexpr double kGolden = 0.6180339887498949;
  double x1 = b - kGolden * (b - a);
  double x2 = a + kGolden * (b - a);
  double f1 = objective(x1, s_hat, p, cfg, c);
  double f2 = objective(x2, s_hat, p, cfg, c);
  for (int it = 0; it < 80; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kGolden * (b - a);
      f2 = objective(x2, s_hat, p, cfg, c);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kGolden * (b - a);
      f1 = objective(x1, s_hat, p, cfg, c);
    }
  }

  double q_hat = grid[best_i];
  double f_best = best_f;
  double mid = 0.5 * (a + b);
  double f_mid = objective(mid, s_hat, p, cfg, c);
  if (f_mid > f_best) {
    q_hat = mid;
    f_best = f_mid;
  }
  best.result = evaluate_point(q_hat, s_hat, p, cfg, c);
  best.valid = true;
  return best;
}

Candidate search_discrete_s(const ContentProfile& p, const SegmentConfig& cfg,
                            const ModelConstants& c, const SearchSettings& s) {
  validate_levels(s.s_levels);
  Candidate best;
  for (double level : s.s_levels) {
    Candidate cand = search_continuous_q(p, cfg, c, level, s.grid_points);
    if (cand.valid) take_best(best, cand.result);
  }
  return best;
}

Candidate search_fully_discrete(const ContentProfile& p,
                                const SegmentConfig& cfg,
                                const ModelConstants& c,
                                const SearchSettings& s) {
  p.validate();
  cfg.validate();
  validate_levels(s.s_levels);
  const auto& qps = s.effective_qp_set();
  Candidate best;
  for (double level : s.s_levels) {
    for (int qp : qps) {
      double q_hat = qp_to_qhat(qp, c);
      OptimizationResult r = evaluate_point(q_hat, level, p, cfg, c);
      r.qp = qp;
      r.q = std::clamp(qp_to_stepsize(qp), c.q_min, kMaxAdaptStepsize);
      if (!r.feasible) continue;
      take_best(best, r);
    }
  }
  return best;
}

Candidate search_heuristic(const ContentProfile& p, const SegmentConfig& cfg,
                           const ModelConstants& c, const SearchSettings& s) {
  p.validate();
  cfg.validate();
  double level = heuristic_policy(cfg.bandwidth);
  const auto& qps = s.effective_qp_set();
  Candidate best;
  for (int qp : qps) {
    double q_hat = qp_to_qhat(qp, c);
    OptimizationResult r = evaluate_point(q_hat, level, p, cfg, c);
    r.qp = qp;
    r.q = std::clamp(qp_to_stepsize(qp), c.q_min, kMaxAdaptStepsize);
    if (!r.feasible) continue;
    take_best(best, r);
  }
  return best;
}

Candidate search(Policy policy, const ContentProfile& p,
                 const SegmentConfig& cfg, const ModelConstants& c,
                 const SearchSettings& s) {
  switch (policy) {
    case Policy::kModelContinuous:
      return search_continuous_q(p, cfg, c, 1.0, s.grid_points);
    case Policy::kModelDiscreteS:
      return search_discrete_s(p, cfg, c, s);
    case Policy::kModelFullyDiscrete:
      return search_fully_discrete(p, cfg, c, s);
    case Policy::kHeuristic:
      return search_heuristic(p, cfg, c, s);
  }
  throw std::logic_error("unhandled policy");
}

double min_required_bandwidth(Policy policy, const ContentProfile& p,
                              const SearchSettings& s) {
  double level = 1.0;
  if (policy == Policy::kModelDiscreteS ||
      policy == Policy::kModelFullyDiscrete) {
    level = *std::min_element(s.s_levels.begin(), s.s_levels.end());
  }
  // The heuristic cannot change its level, so its requirement depends on
  // the bandwidth itself; callers pass the rule's level via p evaluation.
  return p.r_fov + rl_bitrate(kQhatFloor, level, p);
}

[[noreturn]] void throw_infeasible(double min_required) {
  throw InfeasibleError(min_required,
                        "no feasible representation: need at least " +
                            std::to_string(min_required) + " Mbps");
}

SweepCurve sweep_impl(const ContentProfile& p, const ModelConstants& c,
                      Policy policy, const std::vector<double>& b_grid,
                      double T, const SearchSettings& s, bool parallel) {
  if (b_grid.empty()) throw std::domain_error("bandwidth grid is empty");
  for (size_t i = 0; i < b_grid.size(); ++i) {
    if (!(b_grid[i] > 0.0)) {
      throw std::domain_error("bandwidth grid values must be positive");
    }
    if (i > 0 && b_grid[i] <= b_grid[i - 1]) {
      throw std::domain_error("bandwidth grid must be strictly increasing");
    }
  }
  // Everything that can throw is rejected up front; per-point work inside
  // the parallel loop is then exception-free.
  p.validate();
  SegmentConfig{b_grid.front(), T}.validate();
  validate_levels(s.s_levels);
  for (int qp : s.effective_qp_set()) qp_to_stepsize(qp);
  SweepCurve curve;
  curve.points.resize(b_grid.size());
  auto run_point = [&](size_t i) {
    SegmentConfig cfg{b_grid[i], T};
    SweepPoint& pt = curve.points[i];
    pt.bandwidth = b_grid[i];
    Candidate cand = search(policy, p, cfg, c, s);
    if (cand.valid) {
      pt.result = cand.result;
    } else {
      pt.result = OptimizationResult{};  // flagged infeasible, kept in place
    }
  };
  if (parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 4)
    for (long i = 0; i < static_cast<long>(b_grid.size()); ++i) {
      run_point(static_cast<size_t>(i));
    }
#else
    for (size_t i = 0; i < b_grid.size(); ++i) run_point(i);
#endif
  } else {
    for (size_t i = 0; i < b_grid.size(); ++i) run_point(i);
  }
  return curve;
}

}  // namespace

InfeasibleError::InfeasibleError(double min_required_bandwidth,
                                 const std::string& what)
    : std::runtime_error(what), min_required_(min_required_bandwidth) {}

Policy policy_from_name(const std::string& name) {
  if (name == "model-continuous") return Policy::kModelContinuous;
  if (name == "model-discrete-s") return Policy::kModelDiscreteS;
  if (name == "model-fully-discrete") return Policy::kModelFullyDiscrete;
  if (name == "heuristic") return Policy::kHeuristic;
  throw std::invalid_argument("unknown policy: " + name);
}

std::string policy_name(Policy policy) {
  switch (policy) {
    case Policy::kModelContinuous:
      return "model-continuous";
    case Policy::kModelDiscreteS:
      return "model-discrete-s";
    case Policy::kModelFullyDiscrete:
      return "model-fully-discrete";
    case Policy::kHeuristic:
      return "heuristic";
  }
  throw std::logic_error("unhandled policy");
}

const std::vector<int>& SearchSettings::effective_qp_set() const {
  static const std::vector<int> kDefault = [] {
    std::vector<int> v;
    for (int qp = 22; qp <= 51; ++qp) v.push_back(qp);
    return v;
  }();
  return qp_set.empty() ? kDefault : qp_set;
}

double qp_to_qhat(int qp, const ModelConstants& c) {
  double q = qp_to_stepsize(qp);
  q = std::clamp(q, c.q_min, kMaxAdaptStepsize);
  return c.q_min / q;
}

OptimizationResult evaluate_point(double q_hat, double s_hat,
                                  const ContentProfile& p,
                                  const SegmentConfig& cfg,
                                  const ModelConstants& c) {
  OptimizationResult r;
  r.q = c.q_min / q_hat;
  r.s_hat = s_hat;
  r.rl_rate = rl_bitrate(q_hat, s_hat, p);
  r.total_rate = p.r_fov + r.rl_rate;
  r.tau = r.total_rate / cfg.bandwidth * cfg.init_duration;
  r.q_norm = quality_norm(r.tau, q_hat, s_hat, c);
  r.feasible = r.total_rate <= cfg.bandwidth + kRateEps;
  return r;
}

OptimizationResult optimize_continuous_q(const ContentProfile& p,
                                         const SegmentConfig& cfg,
                                         const ModelConstants& c, double s_hat,
                                         int grid_points) {
  Candidate cand = search_continuous_q(p, cfg, c, s_hat, grid_points);
  if (!cand.valid) {
    throw_infeasible(p.r_fov + rl_bitrate(kQhatFloor, s_hat, p));
  }
  return cand.result;
}

OptimizationResult optimize_discrete_s(const ContentProfile& p,
                                       const SegmentConfig& cfg,
                                       const ModelConstants& c,
                                       const SearchSettings& s) {
  Candidate cand = search_discrete_s(p, cfg, c, s);
  if (!cand.valid) {
    throw_infeasible(min_required_bandwidth(Policy::kModelDiscreteS, p, s));
  }
  return cand.result;
}

OptimizationResult optimize_fully_discrete(const ContentProfile& p,
                                           const SegmentConfig& cfg,
                                           const ModelConstants& c,
                                           const SearchSettings& s) {
  Candidate cand = search_fully_discrete(p, cfg, c, s);
  if (!cand.valid) {
    throw_infeasible(min_required_bandwidth(Policy::kModelFullyDiscrete, p, s));
  }
  return cand.result;
}

double heuristic_policy(double bandwidth_mbps) {
  if (!(bandwidth_mbps > 0.0)) {
    throw std::domain_error("bandwidth must be positive");
  }
  if (bandwidth_mbps < 1.0) return 1.0 / 16.0;
  if (bandwidth_mbps < 4.0) return 0.25;
  return 1.0;
}

OptimizationResult optimize_heuristic(const ContentProfile& p,
                                      const SegmentConfig& cfg,
                                      const ModelConstants& c,
                                      const SearchSettings& s) {
  Candidate cand = search_heuristic(p, cfg, c, s);
  if (!cand.valid) {
    double level = heuristic_policy(cfg.bandwidth);
    throw_infeasible(p.r_fov + rl_bitrate(kQhatFloor, level, p));
  }
  return cand.result;
}

OptimizationResult optimize(Policy policy, const ContentProfile& p,
                            const SegmentConfig& cfg, const ModelConstants& c,
                            const SearchSettings& s) {
  switch (policy) {
    case Policy::kModelContinuous:
      return optimize_continuous_q(p, cfg, c, 1.0, s.grid_points);
    case Policy::kModelDiscreteS:
      return optimize_discrete_s(p, cfg, c, s);
    case Policy::kModelFullyDiscrete:
      return optimize_fully_discrete(p, cfg, c, s);
    case Policy::kHeuristic:
      return optimize_heuristic(p, cfg, c, s);
  }
  throw std::logic_error("unhandled policy");
}

std::vector<double> default_b_grid(const ContentProfile& p, int n) {
  if (n < 2) throw std::domain_error("grid needs at least 2 points");
  double lo = std::max(1e-6, p.r_fov);
  double hi = 4.0 * (p.r_fov + p.r_max);
  double log_lo = std::log10(lo);
  double log_hi = std::log10(hi);
  std::vector<double> grid(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    grid[static_cast<size_t>(i)] =
        std::pow(10.0, log_lo + (log_hi - log_lo) * i / (n - 1));
  }
  return grid;
}

double full_ladder_bandwidth(const ContentProfile& p, const SearchSettings& s) {
  validate_levels(s.s_levels);
  double top = *std::max_element(s.s_levels.begin(), s.s_levels.end());
  return p.r_fov + rl_bitrate(kQhatFloor, top, p);
}

SweepCurve sweep(const ContentProfile& p, const ModelConstants& c,
                 Policy policy, const std::vector<double>& b_grid, double T,
                 const SearchSettings& s) {
  return sweep_impl(p, c, policy, b_grid, T, s,
                    s.execution == Execution::kParallel);
}

SweepCurve sweep_serial(const ContentProfile& p, const ModelConstants& c,
                        Policy policy, const std::vector<double>& b_grid,
                        double T, const SearchSettings& s) {
  return sweep_impl(p, c, policy, b_grid, T, s, false);
}

}  // namespace fovopt
