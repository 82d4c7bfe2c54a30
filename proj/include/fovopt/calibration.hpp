#ifndef FOVOPT_CALIBRATION_HPP
#define FOVOPT_CALIBRATION_HPP

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fovopt/model.hpp"
#include "fovopt/optimizer.hpp"

namespace fovopt {

enum class TestKind { kQImpact, kSImpact, kJoint };

TestKind test_kind_from_name(const std::string& name);
std::string test_kind_name(TestKind kind);

// One raw subjective score. Condition scales are already normalized: the
// q-impact test varies q_hat at native resolution, the s-impact test varies
// s_hat at the finest quantization, the joint test varies both.
struct RatingRecord {
  std::string video_id;
  std::string pvs_id;
  std::string subject_id;
  TestKind kind = TestKind::kQImpact;
  double q_hat = 1.0;
  double s_hat = 1.0;
  double tau = 0.0;
  // Integer 1..5 on ingest; consistency screening may substitute a
  // neighbor mean, so cleaned records carry reals.
  double score = 0.0;

  void validate() const;
};

struct ZScore {
  RatingRecord record;
  double z = 0.0;
};

struct MosPoint {
  TestKind kind = TestKind::kQImpact;
  double q_hat = 1.0;
  double s_hat = 1.0;
  double tau = 0.0;
  double mos = 0.0;
  double stddev = 0.0;
  int n_subjects = 0;
};

struct FitResult {
  double a = 0.0;
  double b = 0.0;
  double rmse = 0.0;
  int n_points = 0;
};

enum class ZGrouping { kPerSubject, kPerPvs };
enum class SigmaMode { kSample, kPopulation };

struct CalibrationOptions {
  ZGrouping grouping = ZGrouping::kPerSubject;
  SigmaMode sigma = SigmaMode::kSample;
  double q_max_mos = 5.0;
  Execution execution = Execution::kParallel;
};

// Z-scores per the chosen grouping. Zero-variance groups map to z = 0
// with a warning.
std::vector<ZScore> zscore_normalize(const std::vector<RatingRecord>& ratings,
                                     const CalibrationOptions& opts = {});

// BT.500-style post screening on Z-scores, applied per video: per-PVS
// mean/stddev bands with kurtosis-dependent width (2 or sqrt(20) sigma),
// subject rejected when the outlier fractions break the 0.05 / 0.3 rule.
// Returns subjects to drop keyed by video. Videos with fewer than three
// subjects are skipped with a warning.
std::map<std::string, std::set<std::string>> screen_bt500(
    const std::vector<ZScore>& zscores);

struct ConsistencyResult {
  // (video_id, subject_id) pairs whose full rating set was removed.
  std::set<std::pair<std::string, std::string>> removed_subjects;
  // Surviving ratings, outlier cells replaced by neighbor means.
  std::vector<RatingRecord> cleaned;
  int replaced_cells = 0;
  int inconsistent_subjects_kept = 0;
};

// Raw-score consistency screening per (video, subject, kind): a rating is
// inconsistent when a strictly worse condition (or strictly longer tau)
// scores strictly higher. Subjects with more than 1/8 of their cells
// implicated are removed; isolated outlier cells are replaced by the mean
// of the nearest consistent cells along the condition and tau axes.
ConsistencyResult screen_consistency(const std::vector<RatingRecord>& ratings);

// Mean and stddev per (kind, condition, tau) cell.
std::vector<MosPoint> aggregate_mos(const std::vector<RatingRecord>& ratings,
                                    const CalibrationOptions& opts = {});

// LSE fit of a*e^(-b*tau) + 1 - a over a in [0,1], b in [b_lo, b_hi].
// Coarse grid then Nelder-Mead refinement.
struct DecayFitOptions {
  double b_lo = -0.1;
  double b_hi = 50.0;
  int grid_n = 200;
  Execution execution = Execution::kParallel;
};
FitResult fit_decay(const std::vector<std::pair<double, double>>& points,
                    const DecayFitOptions& opts = {});

enum class ParamFamily { kButterworth, kExponential };

struct ParamFit {
  ParamTriple k;
  double rmse = 0.0;
};

// LSE fit of one parameter family to (scale, value) samples.
ParamFit fit_param_family(const std::vector<std::pair<double, double>>& points,
                          ParamFamily family,
                          Execution execution = Execution::kParallel);

struct DecayFitPoint {
  double scale = 0.0;  // q_hat or s_hat
  double a = 0.0;
  double b = 0.0;
};

struct ParamFunctionFit {
  ParamFit a_fit;
  ParamFit b_fit;
};

// Fits the named family to the a(scale) and b(scale) samples of a test arm.
ParamFunctionFit fit_param_functions(const std::vector<DecayFitPoint>& fits,
                                     ParamFamily family,
                                     Execution execution = Execution::kParallel);

struct Correlations {
  double pcc = 0.0;
  double srcc = 0.0;
};

// Pearson and Spearman (average ranks on ties). Zero variance on either
// side yields NaN with a warning.
Correlations correlations(const std::vector<double>& predicted,
                          const std::vector<double>& measured);

struct PipelineResult {
  std::vector<MosPoint> mos;                      // cleaned, aggregated
  std::vector<DecayFitPoint> q_decay_fits;        // per q_hat condition
  std::vector<DecayFitPoint> s_decay_fits;        // per s_hat condition
  ModelConstants fitted;                          // assembled constants
  int subjects_screened_bt500 = 0;
  int subjects_removed_consistency = 0;
  int cells_replaced = 0;
};

// Full path from raw ratings to fitted model constants: Z-scores, BT.500
// screening, consistency screening, MOS aggregation, per-condition decay
// fits, parameter-function fits.
PipelineResult run_pipeline(const std::vector<RatingRecord>& ratings,
                            const CalibrationOptions& opts = {});

}  // namespace fovopt

#endif  // FOVOPT_CALIBRATION_HPP
