#ifndef FOVOPT_OPTIMIZER_HPP
#define FOVOPT_OPTIMIZER_HPP

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fovopt/model.hpp"
#include "fovopt/rate.hpp"

namespace fovopt {

enum class Policy {
  kModelContinuous,     // continuous q, s fixed at native
  kModelDiscreteS,      // continuous q over discrete s levels
  kModelFullyDiscrete,  // exhaustive (QP, s) enumeration
  kHeuristic,           // s from the bandwidth rule, best QP at that s
};

Policy policy_from_name(const std::string& name);
std::string policy_name(Policy policy);

enum class Execution { kSerial, kParallel };

// Upper end of the quantization range used for adaptation: q in
// [q_min, 160] maps to QP in [22, 51]. The QP formula gives ~228 at
// QP 51; the adaptation range caps at 160 instead, so stepsizes are
// clamped here before normalizing (raw conversions stay unclamped).
inline constexpr double kMaxAdaptStepsize = 160.0;

// q_hat for a discrete QP within the adaptation range.
double qp_to_qhat(int qp, const ModelConstants& c);

inline constexpr double kQhatFloor = 0.05;
inline constexpr double kRateEps = 1e-9;

class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(double min_required_bandwidth, const std::string& what);
  double min_required_bandwidth() const { return min_required_; }

 private:
  double min_required_;
};

struct OptimizationResult {
  double q = 0.0;              // quantization stepsize
  std::optional<int> qp;       // set by the QP-enumerating searches
  double s_hat = 0.0;
  double tau = 0.0;            // seconds
  double rl_rate = 0.0;        // Mbps
  double total_rate = 0.0;     // Mbps
  double q_norm = 0.0;         // normalized quality in [0, 1]
  bool feasible = false;
};

struct SweepPoint {
  double bandwidth = 0.0;
  OptimizationResult result;
};

struct SweepCurve {
  std::vector<SweepPoint> points;
};

struct SearchSettings {
  int grid_points = 2048;            // log-q_hat grid for the continuous search
  std::vector<double> s_levels = {1.0 / 16.0, 0.25, 1.0};
  std::vector<int> qp_set;           // empty means 22..51
  Execution execution = Execution::kParallel;

  const std::vector<int>& effective_qp_set() const;
};

// Objective shared by every regime: clamped NQQ * NQS at the rate-coupled
// refinement duration.
OptimizationResult evaluate_point(double q_hat, double s_hat,
                                  const ContentProfile& p,
                                  const SegmentConfig& cfg,
                                  const ModelConstants& c);

// Dense log grid over feasible q_hat plus golden-section refinement of the
// best bracket. s fixed (native resolution unless told otherwise).
OptimizationResult optimize_continuous_q(const ContentProfile& p,
                                         const SegmentConfig& cfg,
                                         const ModelConstants& c,
                                         double s_hat = 1.0,
                                         int grid_points = 2048);

// Continuous-q search per discrete s level, argmax over levels.
OptimizationResult optimize_discrete_s(const ContentProfile& p,
                                       const SegmentConfig& cfg,
                                       const ModelConstants& c,
                                       const SearchSettings& s = {});

// Exhaustive evaluation of every (QP, s) pair.
OptimizationResult optimize_fully_discrete(const ContentProfile& p,
                                           const SegmentConfig& cfg,
                                           const ModelConstants& c,
                                           const SearchSettings& s = {});

// s = 1/16 below 1 Mbps, 1/4 below 4 Mbps, native from 4 Mbps up.
double heuristic_policy(double bandwidth_mbps);

// Heuristic baseline: s pinned by the rule, best feasible QP at that s.
OptimizationResult optimize_heuristic(const ContentProfile& p,
                                      const SegmentConfig& cfg,
                                      const ModelConstants& c,
                                      const SearchSettings& s = {});

OptimizationResult optimize(Policy policy, const ContentProfile& p,
                            const SegmentConfig& cfg, const ModelConstants& c,
                            const SearchSettings& s = {});

// 200 log-spaced bandwidths over [max(eps, r_fov), 4 * (r_fov + r_max)].
std::vector<double> default_b_grid(const ContentProfile& p, int n = 200);

// Smallest bandwidth at which every s level admits the q_hat floor.
double full_ladder_bandwidth(const ContentProfile& p,
                             const SearchSettings& s = {});

// One result per grid bandwidth; infeasible points are kept and flagged.
// Points are independent, so the parallel path just fills slots in grid
// order; it is bit-identical to the serial reference.
SweepCurve sweep(const ContentProfile& p, const ModelConstants& c,
                 Policy policy, const std::vector<double>& b_grid, double T,
                 const SearchSettings& s = {});
SweepCurve sweep_serial(const ContentProfile& p, const ModelConstants& c,
                        Policy policy, const std::vector<double>& b_grid,
                        double T, const SearchSettings& s = {});

}  // namespace fovopt

#endif  // FOVOPT_OPTIMIZER_HPP
