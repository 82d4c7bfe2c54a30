#ifndef FOVOPT_MODEL_HPP
#define FOVOPT_MODEL_HPP

#include <cmath>
#include <string>

namespace fovopt {

struct ParamTriple {
  double k1 = 0.0;
  double k2 = 0.0;
  double k3 = 0.0;
};

// Fixed parameters of the refinement-quality model. Defaults reproduce the
// calibrated constant set; alternative sets (e.g. refit from ratings) load
// from JSON with the same field names.
struct ModelConstants {
  ParamTriple a_q{0.8, 39.55, 2.73};
  ParamTriple b_q{1.45, 47.14, 3.29};
  ParamTriple a_s{0.8, 4.65, 0.0};
  ParamTriple b_s{4.53, 0.3, -3.37};
  double q_max_mos = 5.0;   // MOS at zero refinement duration
  double q_min = 8.0;       // finest quantization stepsize (QP 22)
  bool clamp_quality = true;

  // Throws std::invalid_argument when a constraint is violated.
  void validate() const;

  std::string to_json() const;
  static ModelConstants from_json(const std::string& text);
  static ModelConstants load(const std::string& path);
  void save(const std::string& path) const;
};

struct NormalizedScales {
  double q_hat;  // q_min / q, in (0, 1]
  double s_hat;  // s / s_max, in (0, 1]
  double tau;    // refinement duration, seconds, >= 0

  void validate() const;
};

struct ModelParams {
  double a_q;
  double b_q;
  double a_s;
  double b_s;
};

// q = 2^((QP-4)/6). QP outside [0, 51] is a domain error.
double qp_to_stepsize(int qp);

// Nearest integer QP for a stepsize, clamped to [0, 51].
int stepsize_to_qp(double stepsize);

inline double butterworth(const ParamTriple& k, double x) {
  return k.k1 / (1.0 + k.k2 * std::pow(x, k.k3));
}

inline double exponential(const ParamTriple& k, double x) {
  return k.k1 * std::exp(-k.k2 * x) + k.k3;
}

// (a_q, b_q, a_s, b_s) at the given normalized scales.
ModelParams model_params(double q_hat, double s_hat, const ModelConstants& c);

namespace detail {
// a*e^(-b*tau) + (1-a), written so that tau = 0 gives exactly 1.
inline double decay(double a, double b, double tau) {
  return 1.0 + a * std::expm1(-b * tau);
}
inline double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }
}  // namespace detail

// Normalized quality of the quantization gap versus refinement duration.
double nqq(double tau, double q_hat, const ModelConstants& c);

// Normalized quality of the resolution gap. The default b_s crosses zero
// near s_hat 0.986, so the raw value exceeds 1 for larger s_hat; nqs()
// clamps to [0, 1] when c.clamp_quality is set, nqs_raw() never does.
double nqs(double tau, double s_hat, const ModelConstants& c);
double nqs_raw(double tau, double s_hat, const ModelConstants& c);

// Overall quality in MOS units: q_max_mos * NQQ * NQS.
double quality(double tau, double q_hat, double s_hat, const ModelConstants& c);

// Same, divided by q_max_mos.
double quality_norm(double tau, double q_hat, double s_hat,
                    const ModelConstants& c);

}  // namespace fovopt

#endif  // FOVOPT_MODEL_HPP
