#ifndef FOVOPT_SIMULATOR_HPP
#define FOVOPT_SIMULATOR_HPP

#include <vector>

#include "fovopt/optimizer.hpp"

namespace fovopt {

struct BandwidthTrace {
  struct Sample {
    double time = 0.0;       // seconds
    double bandwidth = 0.0;  // Mbps
  };
  std::vector<Sample> samples;

  void validate() const;
  // Left-step interpolation: last sample at or before t.
  double bandwidth_at(double t) const;
  double span_begin() const;
  double span_end() const;
};

struct FovEvent {
  double time = 0.0;
  std::vector<double> tile_rates;  // HL tiles of the new FoV, Mbps
};

struct EventOutcome {
  double time = 0.0;
  double bandwidth = 0.0;
  double r_fov = 0.0;
  OptimizationResult result;
};

struct SessionReport {
  std::vector<EventOutcome> events;
  double mean_q_norm = 0.0;  // over feasible events, 0 when none
  double min_q_norm = 0.0;
  int infeasible_count = 0;
};

// Replays FoV switches against the trace: per event, bandwidth comes from
// the trace, r_fov from the event tiles, and the policy picks the RL
// representation. Events outside the trace span are an error.
SessionReport simulate(const BandwidthTrace& trace,
                       const std::vector<FovEvent>& events,
                       const ContentProfile& profile, Policy policy, double T,
                       const ModelConstants& c, const SearchSettings& s = {});

}  // namespace fovopt

#endif  // FOVOPT_SIMULATOR_HPP
