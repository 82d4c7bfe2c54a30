#include "fovopt/model.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace fovopt {

namespace {

void check(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

void require_scale(double v, const char* name) {
  if (!(v > 0.0) || v > 1.0) {
    throw std::domain_error(std::string(name) + " must be in (0, 1]");
  }
}

nlohmann::json triple_to_json(const ParamTriple& k) {
  return {{"k1", k.k1}, {"k2", k.k2}, {"k3", k.k3}};
}

ParamTriple triple_from_json(const nlohmann::json& j, const ParamTriple& def) {
  ParamTriple k = def;
  if (j.contains("k1")) k.k1 = j.at("k1").get<double>();
  if (j.contains("k2")) k.k2 = j.at("k2").get<double>();
  if (j.contains("k3")) k.k3 = j.at("k3").get<double>();
  return k;
}

}  // namespace

void ModelConstants::validate() const {
  check(a_q.k1 > 0.0, "a_q.k1 must be positive");
  check(b_q.k1 > 0.0, "b_q.k1 must be positive");
  check(a_s.k1 > 0.0, "a_s.k1 must be positive");
  check(b_s.k1 > 0.0, "b_s.k1 must be positive");
  check(a_q.k2 > 0.0 && a_q.k3 > 0.0, "a_q needs k2 > 0 and k3 > 0");
  check(b_q.k2 > 0.0 && b_q.k3 > 0.0, "b_q needs k2 > 0 and k3 > 0");
  check(q_min > 0.0, "q_min must be positive");
  check(q_max_mos > 0.0, "q_max_mos must be positive");
}

void NormalizedScales::validate() const {
  require_scale(q_hat, "q_hat");
  require_scale(s_hat, "s_hat");
  if (tau < 0.0) throw std::domain_error("tau must be >= 0");
}

double qp_to_stepsize(int qp) {
  if (qp < 0 || qp > 51) {
    throw std::domain_error("QP " + std::to_string(qp) +
                            " outside valid range [0, 51]");
  }
  return std::exp2((qp - 4) / 6.0);
}

int stepsize_to_qp(double stepsize) {
  if (!(stepsize > 0.0)) {
    throw std::domain_error("stepsize must be positive");
  }
  double qp = 4.0 + 6.0 * std::log2(stepsize);
  long rounded = std::lround(qp);
  if (rounded < 0) rounded = 0;
  if (rounded > 51) rounded = 51;
  return static_cast<int>(rounded);
}

ModelParams model_params(double q_hat, double s_hat, const ModelConstants& c) {
  require_scale(q_hat, "q_hat");
  require_scale(s_hat, "s_hat");
  return ModelParams{butterworth(c.a_q, q_hat), butterworth(c.b_q, q_hat),
                     exponential(c.a_s, s_hat), exponential(c.b_s, s_hat)};
}

double nqq(double tau, double q_hat, const ModelConstants& c) {
  require_scale(q_hat, "q_hat");
  if (tau < 0.0) throw std::domain_error("tau must be >= 0");
  double v = detail::decay(butterworth(c.a_q, q_hat),
                           butterworth(c.b_q, q_hat), tau);
  return c.clamp_quality ? detail::clamp01(v) : v;
}

double nqs_raw(double tau, double s_hat, const ModelConstants& c) {
  require_scale(s_hat, "s_hat");
  if (tau < 0.0) throw std::domain_error("tau must be >= 0");
  return detail::decay(exponential(c.a_s, s_hat), exponential(c.b_s, s_hat),
                       tau);
}

double nqs(double tau, double s_hat, const ModelConstants& c) {
  double v = nqs_raw(tau, s_hat, c);
  return c.clamp_quality ? detail::clamp01(v) : v;
}

double quality_norm(double tau, double q_hat, double s_hat,
                    const ModelConstants& c) {
  return nqq(tau, q_hat, c) * nqs(tau, s_hat, c);
}

double quality(double tau, double q_hat, double s_hat,
               const ModelConstants& c) {
  return c.q_max_mos * quality_norm(tau, q_hat, s_hat, c);
}

std::string ModelConstants::to_json() const {
  nlohmann::json j{{"a_q", triple_to_json(a_q)},
                   {"b_q", triple_to_json(b_q)},
                   {"a_s", triple_to_json(a_s)},
                   {"b_s", triple_to_json(b_s)},
                   {"q_max_mos", q_max_mos},
                   {"q_min", q_min},
                   {"clamp_quality", clamp_quality}};
  return j.dump(2) + "\n";
}

ModelConstants ModelConstants::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  ModelConstants c;  // missing fields keep the built-in defaults
  if (j.contains("a_q")) c.a_q = triple_from_json(j.at("a_q"), c.a_q);
  if (j.contains("b_q")) c.b_q = triple_from_json(j.at("b_q"), c.b_q);
  if (j.contains("a_s")) c.a_s = triple_from_json(j.at("a_s"), c.a_s);
  if (j.contains("b_s")) c.b_s = triple_from_json(j.at("b_s"), c.b_s);
  if (j.contains("q_max_mos")) c.q_max_mos = j.at("q_max_mos").get<double>();
  if (j.contains("q_min")) c.q_min = j.at("q_min").get<double>();
  if (j.contains("clamp_quality")) {
    c.clamp_quality = j.at("clamp_quality").get<bool>();
  }
  c.validate();
  return c;
}

ModelConstants ModelConstants::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open constants file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

void ModelConstants::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write constants file: " + path);
  out << to_json();
}

}  // namespace fovopt
