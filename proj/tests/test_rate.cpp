#include <cmath>
#include <stdexcept>
#include <string>

#include <doctest.h>

#include "fovopt/log.hpp"
#include "fovopt/rate.hpp"

using namespace fovopt;

namespace {

double rel_err(double got, double want) {
  return std::fabs(got - want) / std::fabs(want);
}

const ContentProfile& balboa() {
  return find_profile(builtin_profiles(), "Balboa");
}

}  // namespace

TEST_CASE("rl bitrate matches the power-law oracle") {
  CHECK(rel_err(rl_bitrate(0.5, 0.25, balboa()), 2.8554566764294654) < 1e-12);
  for (const auto& p : builtin_profiles()) {
    CHECK(rl_bitrate(1.0, 1.0, p) == doctest::Approx(p.r_max).epsilon(1e-15));
    CHECK(rl_bitrate(0.5, 1.0, p) < rl_bitrate(0.6, 1.0, p));
    CHECK(rl_bitrate(1.0, 0.25, p) < rl_bitrate(1.0, 0.5, p));
  }
  CHECK_THROWS_AS(rl_bitrate(0.0, 1.0, balboa()), std::domain_error);
  CHECK_THROWS_AS(rl_bitrate(1.1, 1.0, balboa()), std::domain_error);
  CHECK_THROWS_AS(rl_bitrate(1.0, 0.0, balboa()), std::domain_error);
}

TEST_CASE("fov bitrate sums tiles") {
  CHECK(fov_bitrate({1.5, 2.0, 0.75}) == doctest::Approx(4.25));
  CHECK_THROWS_AS(fov_bitrate({1.0, -0.5}), std::domain_error);
  std::string warned;
  set_warn_handler([&](const std::string& m) { warned = m; });
  CHECK(fov_bitrate({}) == 0.0);
  set_warn_handler(nullptr);
  CHECK(warned.find("empty") != std::string::npos);
}

TEST_CASE("refinement duration") {
  SegmentConfig cfg{10.0, 5.0};
  double rl = rl_bitrate(0.5, 0.25, balboa());
  CHECK(rel_err(refinement_duration(balboa().r_fov, rl, cfg),
                4.4027283382147327) < 1e-12);
  CHECK(refinement_duration(0.0, 0.0, cfg) == 0.0);
  CHECK_THROWS_AS(refinement_duration(1.0, 1.0, SegmentConfig{0.0, 5.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(refinement_duration(-1.0, 1.0, cfg), std::domain_error);
}

TEST_CASE("built-in profile set") {
  const auto& ps = builtin_profiles();
  REQUIRE(ps.size() == 8);
  for (const auto& p : ps) CHECK_NOTHROW(p.validate());
  CHECK(balboa().r_max == 21.86);
  CHECK(balboa().alpha == 1.1621);
  CHECK(balboa().beta == 0.8872);
  CHECK(balboa().r_fov == 5.95);
  CHECK(find_profile(ps, "Snowberg").r_max == 5.87);
  CHECK(find_profile(ps, "Street2").r_fov == 3.79);
  CHECK_THROWS_AS(find_profile(ps, "nope"), std::runtime_error);
}

TEST_CASE("bundled profile file matches the built-ins") {
  auto file = load_profiles("profiles/content.json");
  const auto& ps = builtin_profiles();
  REQUIRE(file.size() == ps.size());
  for (size_t i = 0; i < ps.size(); ++i) {
    CHECK(file[i].name == ps[i].name);
    CHECK(file[i].r_max == ps[i].r_max);
    CHECK(file[i].alpha == ps[i].alpha);
    CHECK(file[i].beta == ps[i].beta);
    CHECK(file[i].r_fov == ps[i].r_fov);
  }
}

TEST_CASE("profile JSON round-trip") {
  ContentProfile p = balboa();
  p.tile_rates = std::vector<double>{2.0, 2.0, 1.95};
  auto back = profiles_from_json(profiles_to_json({p}));
  REQUIRE(back.size() == 1);
  CHECK(back[0].name == p.name);
  CHECK(back[0].r_max == p.r_max);
  REQUIRE(back[0].tile_rates.has_value());
  CHECK(back[0].tile_rates->size() == 3);
}

TEST_CASE("profile validation") {
  ContentProfile p = balboa();
  p.tile_rates = std::vector<double>{1.0, 1.0};  // does not sum to r_fov
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = balboa();
  p.r_max = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = balboa();
  p.r_fov = -1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("segment config validation") {
  CHECK_NOTHROW(SegmentConfig{1.0, 5.0}.validate());
  CHECK_THROWS_AS((SegmentConfig{-1.0, 5.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((SegmentConfig{1.0, 0.0}.validate()), std::invalid_argument);
}
