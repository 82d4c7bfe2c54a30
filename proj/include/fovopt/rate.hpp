#ifndef FOVOPT_RATE_HPP
#define FOVOPT_RATE_HPP

#include <optional>
#include <string>
#include <vector>

namespace fovopt {

// Per-content rate model R = r_max * q_hat^alpha * s_hat^beta plus the
// measured high-quality FoV bitrate. All rates are Mbps.
struct ContentProfile {
  std::string name;
  double r_max = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double r_fov = 0.0;
  std::optional<std::vector<double>> tile_rates;

  void validate() const;
};

struct SegmentConfig {
  double bandwidth = 0.0;      // B, Mbps
  double init_duration = 0.0;  // T, seconds

  void validate() const;
};

// Reduced-layer bitrate at the given normalized scales.
double rl_bitrate(double q_hat, double s_hat, const ContentProfile& p);

// Sum of per-tile HL rates. Empty input yields 0 with a warning.
double fov_bitrate(const std::vector<double>& tile_rates);

// tau = (r_fov + r_rl) / B * T
double refinement_duration(double r_fov, double r_rl, const SegmentConfig& cfg);

// The eight bundled profiles (the cross-validation content set).
const std::vector<ContentProfile>& builtin_profiles();

std::vector<ContentProfile> profiles_from_json(const std::string& text);
std::string profiles_to_json(const std::vector<ContentProfile>& profiles);
std::vector<ContentProfile> load_profiles(const std::string& path);
const ContentProfile& find_profile(const std::vector<ContentProfile>& set,
                                   const std::string& name);

}  // namespace fovopt

#endif  // FOVOPT_RATE_HPP
