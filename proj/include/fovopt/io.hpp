#ifndef FOVOPT_IO_HPP
#define FOVOPT_IO_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "fovopt/calibration.hpp"
#include "fovopt/metrics.hpp"
#include "fovopt/optimizer.hpp"
#include "fovopt/simulator.hpp"

namespace fovopt {

inline constexpr const char* kVersion = "1.0.0";

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& path, int line, const std::string& message);
  const std::string& path() const { return path_; }
  int line() const { return line_; }

 private:
  std::string path_;
  int line_;
};

// FNV-1a, used to stamp output files with a config fingerprint.
std::uint64_t fnv1a64(const std::string& text);
std::string config_hash(const std::string& config_text);

// Token from a file's comment header ("" when absent). Sweep files carry
// config= (full run config) and model= (comparability key: constants,
// profile, T).
std::string read_header_token(const std::string& path, const std::string& key);

// Shortest text that parses back to the same double.
std::string format_double(double v);

// Sweep CSV: comment header with version and config hash, then
// B,qp,q,s_hat,tau,rl_rate,total_rate,q_norm,feasible per point.
void write_sweep_csv(const std::string& path, const SweepCurve& curve,
                     const std::string& config_text,
                     const std::string& model_key_text = "");
std::string sweep_csv_text(const SweepCurve& curve,
                           const std::string& config_text,
                           const std::string& model_key_text = "");
SweepCurve read_sweep_csv(const std::string& path);

// Ratings CSV: video_id,pvs_id,subject_id,kind,q_hat,s_hat,tau,score.
std::vector<RatingRecord> read_ratings_csv(const std::string& path);
void write_ratings_csv(const std::string& path,
                       const std::vector<RatingRecord>& ratings,
                       const std::string& config_text);

// Trace CSV: time,bandwidth. Events CSV: time,tile_rates with the tile
// list separated by semicolons.
BandwidthTrace read_trace_csv(const std::string& path);
std::vector<FovEvent> read_events_csv(const std::string& path);

void write_session_report_csv(const std::string& path,
                              const SessionReport& report,
                              const std::string& config_text);
std::string session_summary_json(const SessionReport& report);

std::string comparison_json(const std::string& profile,
                            const CurveComparison& cmp);
std::string comparison_csv_row(const std::string& profile,
                               const CurveComparison& cmp);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace fovopt

#endif  // FOVOPT_IO_HPP
