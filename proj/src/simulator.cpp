#include "fovopt/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "fovopt/rate.hpp"

namespace fovopt {

void BandwidthTrace::validate() const {
  if (samples.empty()) {
    throw std::invalid_argument("trace must have at least one sample");
  }
  for (size_t i = 0; i < samples.size(); ++i) {
    if (!(samples[i].bandwidth > 0.0)) {
      throw std::invalid_argument("trace bandwidths must be positive");
    }
    if (i > 0 && samples[i].time <= samples[i - 1].time) {
      throw std::invalid_argument("trace times must be strictly increasing");
    }
  }
}

double BandwidthTrace::bandwidth_at(double t) const {
  validate();
  if (t < samples.front().time || t > samples.back().time) {
    throw std::invalid_argument("time " + std::to_string(t) +
                                " outside trace span");
  }
  auto it = std::upper_bound(
      samples.begin(), samples.end(), t,
      [](double v, const Sample& s) { return v < s.time; });
  return std::prev(it)->bandwidth;
}

double BandwidthTrace::span_begin() const {
  validate();
  return samples.front().time;
}

double BandwidthTrace::span_end() const {
  validate();
  return samples.back().time;
}

SessionReport simulate(const BandwidthTrace& trace,
                       const std::vector<FovEvent>& events,
                       const ContentProfile& profile, Policy policy, double T,
                       const ModelConstants& c, const SearchSettings& s) {
  trace.validate();
  profile.validate();
  SessionReport report;
  double sum_q = 0.0;
  double min_q = 0.0;
  int feasible = 0;

  for (const FovEvent& ev : events) {
    if (ev.time < trace.span_begin() || ev.time > trace.span_end()) {
      throw std::invalid_argument("event at t=" + std::to_string(ev.time) +
                                  " outside trace span [" +
                                  std::to_string(trace.span_begin()) + ", " +
                                  std::to_string(trace.span_end()) + "]");
    }
    EventOutcome out;
    out.time = ev.time;
    out.bandwidth = trace.bandwidth_at(ev.time);
    out.r_fov = fov_bitrate(ev.tile_rates);

    ContentProfile p = profile;
    p.r_fov = out.r_fov;
    p.tile_rates.reset();  // the event's tiles define r_fov now
    SegmentConfig cfg{out.bandwidth, T};
    try {
      out.result = optimize(policy, p, cfg, c, s);
    } catch (const InfeasibleError&) {
      out.result = OptimizationResult{};
      ++report.infeasible_count;
    }
    if (out.result.feasible) {
      sum_q += out.result.q_norm;
      min_q = (feasible == 0) ? out.result.q_norm
                              : std::min(min_q, out.result.q_norm);
      ++feasible;
    }
    report.events.push_back(std::move(out));
  }
  report.mean_q_norm = feasible > 0 ? sum_q / feasible : 0.0;
  report.min_q_norm = feasible > 0 ? min_q : 0.0;
  return report;
}

}  // namespace fovopt
