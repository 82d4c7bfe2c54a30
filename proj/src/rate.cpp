#include "fovopt/rate.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "fovopt/log.hpp"

namespace fovopt {

void ContentProfile::validate() const {
  if (!(r_max > 0.0)) throw std::invalid_argument("r_max must be positive");
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
  if (r_fov < 0.0) throw std::invalid_argument("r_fov must be >= 0");
  if (tile_rates) {
    double sum = std::accumulate(tile_rates->begin(), tile_rates->end(), 0.0);
    if (std::abs(sum - r_fov) > 1e-9 * r_fov) {
      throw std::invalid_argument("tile_rates of \"" + name +
                                  "\" do not sum to r_fov");
    }
  }
}

void SegmentConfig::validate() const {
  if (!(bandwidth > 0.0)) {
    throw std::invalid_argument("bandwidth must be positive");
  }
  if (!(init_duration > 0.0)) {
    throw std::invalid_argument("init_duration must be positive");
  }
}

double rl_bitrate(double q_hat, double s_hat, const ContentProfile& p) {
  if (!(q_hat > 0.0) || q_hat > 1.0) {
    throw std::domain_error("q_hat must be in (0, 1]");
  }
  if (!(s_hat > 0.0) || s_hat > 1.0) {
    throw std::domain_error("s_hat must be in (0, 1]");
  }
  return p.r_max * std::pow(q_hat, p.alpha) * std::pow(s_hat, p.beta);
}

double fov_bitrate(const std::vector<double>& tile_rates) {
  if (tile_rates.empty()) {
    warn("fov_bitrate: empty tile list, FoV rate is 0");
    return 0.0;
  }
  for (double r : tile_rates) {
    if (r < 0.0) throw std::domain_error("tile rates must be >= 0");
  }
  return std::accumulate(tile_rates.begin(), tile_rates.end(), 0.0);
}

double refinement_duration(double r_fov, double r_rl,
                           const SegmentConfig& cfg) {
  cfg.validate();
  if (r_fov < 0.0 || r_rl < 0.0) {
    throw std::domain_error("rates must be >= 0");
  }
  return (r_fov + r_rl) / cfg.bandwidth * cfg.init_duration;
}

const std::vector<ContentProfile>& builtin_profiles() {
  static const std::vector<ContentProfile> kProfiles = {
      {"Balboa", 21.86, 1.1621, 0.8872, 5.95, std::nullopt},
      {"PoleVault", 28.60, 1.7515, 1.0864, 4.75, std::nullopt},
      {"Hangpai2", 38.66, 1.3522, 0.9607, 6.56, std::nullopt},
      {"Hangpai3", 20.63, 1.2516, 0.8880, 4.49, std::nullopt},
      {"Elephants2", 15.80, 1.1220, 1.0251, 4.38, std::nullopt},
      {"NewYork", 11.31, 1.0275, 0.7898, 3.82, std::nullopt},
      {"Snowberg", 5.87, 1.2349, 1.0041, 1.34, std::nullopt},
      {"Street2", 15.34, 1.1137, 0.8537, 3.79, std::nullopt},
  };
  return kProfiles;
}

std::vector<ContentProfile> profiles_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  if (!j.is_array()) {
    throw std::invalid_argument("profile set must be a JSON array");
  }
  std::vector<ContentProfile> out;
  out.reserve(j.size());
  for (const auto& e : j) {
    ContentProfile p;
    p.name = e.at("name").get<std::string>();
    p.r_max = e.at("r_max").get<double>();
    p.alpha = e.at("alpha").get<double>();
    p.beta = e.at("beta").get<double>();
    p.r_fov = e.at("r_fov").get<double>();
    if (e.contains("tile_rates")) {
      p.tile_rates = e.at("tile_rates").get<std::vector<double>>();
    }
    p.validate();
    out.push_back(std::move(p));
  }
  return out;
}

std::string profiles_to_json(const std::vector<ContentProfile>& profiles) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& p : profiles) {
    nlohmann::json e{{"name", p.name},
                     {"r_max", p.r_max},
                     {"alpha", p.alpha},
                     {"beta", p.beta},
                     {"r_fov", p.r_fov}};
    if (p.tile_rates) e["tile_rates"] = *p.tile_rates;
    j.push_back(std::move(e));
  }
  return j.dump(2) + "\n";
}

std::vector<ContentProfile> load_profiles(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open profile file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return profiles_from_json(ss.str());
}

const ContentProfile& find_profile(const std::vector<ContentProfile>& set,
                                   const std::string& name) {
  for (const auto& p : set) {
    if (p.name == name) return p;
  }
  throw std::runtime_error("unknown profile: " + name);
}

}  // namespace fovopt
