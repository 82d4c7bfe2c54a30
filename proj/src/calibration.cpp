#include "fovopt/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "fovopt/log.hpp"

namespace fovopt {

namespace {

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

double stddev_of(const std::vector<double>& v, double mu, SigmaMode mode) {
  if (v.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : v) ss += (x - mu) * (x - mu);
  double n = (mode == SigmaMode::kSample) ? v.size() - 1.0 : v.size();
  return std::sqrt(ss / n);
}

struct GridBest {
  double sse = std::numeric_limits<double>::infinity();
  long idx = -1;
};

// Lexicographic (sse, idx): the winner is independent of scan order, which
// makes the parallel reduction match the serial scan exactly.
void take(GridBest& best, double sse, long idx) {
  if (sse < best.sse || (sse == best.sse && idx < best.idx)) {
    best.sse = sse;
    best.idx = idx;
  }
}

GridBest grid_minimize(long n, const std::function<double(long)>& sse_at,
                       Execution execution) {
  GridBest best;
  if (execution == Execution::kParallel) {
#ifdef _OPENMP
#pragma omp parallel
    {
      GridBest local;
#pragma omp for nowait
      for (long i = 0; i < n; ++i) take(local, sse_at(i), i);
#pragma omp critical(fovopt_grid_minimize)
      take(best, local.sse, local.idx);
    }
    return best;
#endif
  }
  for (long i = 0; i < n; ++i) take(best, sse_at(i), i);
  return best;
}

// Nelder-Mead on a box; every evaluation is tracked so the result can never
// be worse than the starting point.
struct NmResult {
  std::vector<double> x;
  double f = 0.0;
};

NmResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                     std::vector<double> start, std::vector<double> step,
                     const std::vector<double>& lo,
                     const std::vector<double>& hi, int max_iter = 400) {
  size_t dim = start.size();
  NmResult best;
  bool have_best = false;
  auto eval = [&](std::vector<double> x) {
    for (size_t d = 0; d < dim; ++d) x[d] = std::clamp(x[d], lo[d], hi[d]);
    double v = f(x);
    if (!have_best || v < best.f) {
      best = {x, v};
      have_best = true;
    }
    return std::pair<std::vector<double>, double>(std::move(x), v);
  };

  std::vector<std::pair<std::vector<double>, double>> simplex;
  simplex.push_back(eval(start));
  for (size_t d = 0; d < dim; ++d) {
    std::vector<double> v = start;
    v[d] += (v[d] + step[d] <= hi[d]) ? step[d] : -step[d];
    simplex.push_back(eval(v));
  }

  for (int it = 0; it < max_iter; ++it) {
    std::sort(simplex.begin(), simplex.end(),
              [](const auto& a, const auto& b) { return a.second < b.second; });
    double spread = 0.0;
    for (size_t d = 0; d < dim; ++d) {
      spread = std::max(spread, std::fabs(simplex.back().first[d] -
                                          simplex.front().first[d]));
    }
    if (spread < 1e-12) break;

    std::vector<double> centroid(dim, 0.0);
    for (size_t i = 0; i + 1 < simplex.size(); ++i) {
      for (size_t d = 0; d < dim; ++d) centroid[d] += simplex[i].first[d];
    }
    for (size_t d = 0; d < dim; ++d) centroid[d] /= dim;

    auto mix = [&](double t) {
      std::vector<double> x(dim);
      for (size_t d = 0; d < dim; ++d) {
        x[d] = centroid[d] + t * (centroid[d] - simplex.back().first[d]);
      }
      return eval(std::move(x));
    };

    auto refl = mix(1.0);
    if (refl.second < simplex.front().second) {
      auto exp_pt = mix(2.0);
      simplex.back() = (exp_pt.second < refl.second) ? exp_pt : refl;
      continue;
    }
    if (refl.second < simplex[simplex.size() - 2].second) {
      simplex.back() = refl;
      continue;
    }
    auto contr = mix(refl.second < simplex.back().second ? 0.5 : -0.5);
    if (contr.second < std::min(refl.second, simplex.back().second)) {
      simplex.back() = contr;
      continue;
    }
    for (size_t i = 1; i < simplex.size(); ++i) {  // shrink toward the best
      std::vector<double> x(dim);
      for (size_t d = 0; d < dim; ++d) {
        x[d] = 0.5 * (simplex.front().first[d] + simplex[i].first[d]);
      }
      simplex[i] = eval(std::move(x));
    }
  }
  return best;
}

double decay_sse(double a, double b,
                 const std::vector<std::pair<double, double>>& pts) {
  double sse = 0.0;
  for (const auto& [tau, v] : pts) {
    double r = v - detail::decay(a, b, tau);
    sse += r * r;
  }
  return sse;
}

// Profiled linear parameters per family: Butterworth k1, exponential
// (k1, k3). Returns SSE for the nonlinear parameters with the linear part
// solved in closed form.
double butterworth_profiled(
    double k2, double k3, const std::vector<std::pair<double, double>>& pts,
    double* k1_out) {
  double num = 0.0;
  double den = 0.0;
  for (const auto& [x, v] : pts) {
    double g = 1.0 / (1.0 + k2 * std::pow(x, k3));
    num += v * g;
    den += g * g;
  }
  double k1 = den > 0.0 ? std::max(0.0, num / den) : 0.0;
  if (k1_out) *k1_out = k1;
  double sse = 0.0;
  for (const auto& [x, v] : pts) {
    double r = v - k1 / (1.0 + k2 * std::pow(x, k3));
    sse += r * r;
  }
  return sse;
}

double exponential_profiled(double k2,
                            const std::vector<std::pair<double, double>>& pts,
                            double* k1_out, double* k3_out) {
  double s_gg = 0.0, s_g = 0.0, s_gv = 0.0, s_v = 0.0;
  double n = static_cast<double>(pts.size());
  for (const auto& [x, v] : pts) {
    double g = std::exp(-k2 * x);
    s_gg += g * g;
    s_g += g;
    s_gv += g * v;
    s_v += v;
  }
  double det = s_gg * n - s_g * s_g;
  double k1, k3;
  if (std::fabs(det) < 1e-14) {
    k1 = 0.0;  // basis collapsed to a constant; fall back to the mean
    k3 = s_v / n;
  } else {
    k1 = (s_gv * n - s_g * s_v) / det;
    k3 = (s_gg * s_v - s_g * s_gv) / det;
  }
  if (k1_out) *k1_out = k1;
  if (k3_out) *k3_out = k3;
  double sse = 0.0;
  for (const auto& [x, v] : pts) {
    double r = v - (k1 * std::exp(-k2 * x) + k3);
    sse += r * r;
  }
  return sse;
}

bool cond_worse(const RatingRecord& a, const RatingRecord& b) {
  switch (a.kind) {
    case TestKind::kQImpact:
      return a.s_hat == b.s_hat && a.q_hat < b.q_hat;
    case TestKind::kSImpact:
      return a.q_hat == b.q_hat && a.s_hat < b.s_hat;
    case TestKind::kJoint:
      return a.q_hat <= b.q_hat && a.s_hat <= b.s_hat &&
             (a.q_hat < b.q_hat || a.s_hat < b.s_hat);
  }
  return false;
}

bool cond_equal(const RatingRecord& a, const RatingRecord& b) {
  return a.q_hat == b.q_hat && a.s_hat == b.s_hat;
}

}  // namespace

TestKind test_kind_from_name(const std::string& name) {
  if (name == "q") return TestKind::kQImpact;
  if (name == "s") return TestKind::kSImpact;
  if (name == "joint") return TestKind::kJoint;
  throw std::invalid_argument("unknown test kind: " + name);
}

std::string test_kind_name(TestKind kind) {
  switch (kind) {
    case TestKind::kQImpact:
      return "q";
    case TestKind::kSImpact:
      return "s";
    case TestKind::kJoint:
      return "joint";
  }
  throw std::logic_error("unhandled test kind");
}

void RatingRecord::validate() const {
  if (video_id.empty() || pvs_id.empty() || subject_id.empty()) {
    throw std::invalid_argument("rating record ids must be nonempty");
  }
  if (!(q_hat > 0.0) || q_hat > 1.0 || !(s_hat > 0.0) || s_hat > 1.0) {
    throw std::invalid_argument("rating condition scales must be in (0, 1]");
  }
  if (!(tau >= 0.0)) {
    throw std::invalid_argument("rating tau must be >= 0");
  }
  if (score < 1.0 || score > 5.0) {
    throw std::invalid_argument("rating score must be in [1, 5]");
  }
}

std::vector<ZScore> zscore_normalize(const std::vector<RatingRecord>& ratings,
                                     const CalibrationOptions& opts) {
  if (ratings.empty()) {
    throw std::invalid_argument("zscore_normalize: empty input");
  }
  auto group_key = [&](const RatingRecord& r) {
    return opts.grouping == ZGrouping::kPerSubject
               ? r.subject_id
               : r.video_id + "\x1f" + r.pvs_id;
  };
  std::map<std::string, std::vector<double>> groups;
  for (const auto& r : ratings) groups[group_key(r)].push_back(r.score);

  std::map<std::string, std::pair<double, double>> stats;
  for (const auto& [key, scores] : groups) {
    double mu = mean_of(scores);
    double sd = stddev_of(scores, mu, opts.sigma);
    if (sd == 0.0) {
      warn("zscore: zero variance in group '" + key + "', z set to 0");
    }
    stats[key] = {mu, sd};
  }

  std::vector<ZScore> out;
  out.reserve(ratings.size());
  for (const auto& r : ratings) {
    auto [mu, sd] = stats[group_key(r)];
    out.push_back({r, sd > 0.0 ? (r.score - mu) / sd : 0.0});
  }
  return out;
}

std::map<std::string, std::set<std::string>> screen_bt500(
    const std::vector<ZScore>& zscores) {
  // video -> pvs -> observations
  std::map<std::string, std::map<std::string, std::vector<const ZScore*>>> byv;
  for (const auto& z : zscores) {
    byv[z.record.video_id][z.record.pvs_id].push_back(&z);
  }

  std::map<std::string, std::set<std::string>> rejected;
  for (const auto& [video, cells] : byv) {
    std::set<std::string> subjects;
    for (const auto& [pvs, obs] : cells) {
      for (const ZScore* z : obs) subjects.insert(z->record.subject_id);
    }
    if (subjects.size() < 3) {
      warn("bt500: video '" + video + "' has fewer than 3 subjects, skipped");
      continue;
    }

    std::map<std::string, std::array<int, 3>> counts;  // P, Q, N per subject
    for (const auto& [pvs, obs] : cells) {
      std::vector<double> vals;
      vals.reserve(obs.size());
      for (const ZScore* z : obs) vals.push_back(z->z);
      double mu = mean_of(vals);
      double m2 = 0.0, m4 = 0.0;
      for (double v : vals) {
        double d = v - mu;
        m2 += d * d;
        m4 += d * d * d * d;
      }
      m2 /= vals.size();
      m4 /= vals.size();
      double beta2 = m2 > 0.0 ? m4 / (m2 * m2) : 3.0;
      double k = (beta2 >= 2.0 && beta2 <= 4.0) ? 2.0 : std::sqrt(20.0);
      double sd = std::sqrt(m2);
      for (const ZScore* z : obs) {
        auto& c = counts[z->record.subject_id];
        if (z->z > mu + k * sd) ++c[0];
        if (z->z < mu - k * sd) ++c[1];
        ++c[2];
      }
    }

    for (const auto& [subject, c] : counts) {
      int pq = c[0] + c[1];
      if (pq == 0 || c[2] == 0) continue;
      double frac = static_cast<double>(pq) / c[2];
      double balance = std::fabs(c[0] - c[1]) / static_cast<double>(pq);
      if (frac > 0.05 && balance < 0.3) rejected[video].insert(subject);
    }
  }
  return rejected;
}

ConsistencyResult screen_consistency(
    const std::vector<RatingRecord>& ratings) {
  ConsistencyResult res;
  // (video, subject, kind) -> record indices
  std::map<std::tuple<std::string, std::string, int>, std::vector<size_t>> grp;
  for (size_t i = 0; i < ratings.size(); ++i) {
    const auto& r = ratings[i];
    grp[{r.video_id, r.subject_id, static_cast<int>(r.kind)}].push_back(i);
  }

  std::vector<double> new_score(ratings.size());
  for (size_t i = 0; i < ratings.size(); ++i) new_score[i] = ratings[i].score;
  std::vector<char> drop(ratings.size(), 0);
  std::set<std::pair<std::string, std::string>> kept_with_marks;

  for (const auto& [key, idx] : grp) {
    // violation pairs: a strictly worse condition (or longer tau at equal
    // condition) rated strictly higher
    std::vector<std::pair<size_t, size_t>> pairs;
    for (size_t ai = 0; ai < idx.size(); ++ai) {
      for (size_t bi = 0; bi < idx.size(); ++bi) {
        if (ai == bi) continue;
        const auto& ra = ratings[idx[ai]];
        const auto& rb = ratings[idx[bi]];
        bool worse_cond = ra.tau == rb.tau && cond_worse(ra, rb);
        bool longer_tau = cond_equal(ra, rb) && ra.tau > rb.tau;
        if ((worse_cond || longer_tau) && ra.score > rb.score) {
          pairs.emplace_back(ai, bi);
        }
      }
    }

    // greedy hitting set over the violation pairs marks the outlier cells
    std::set<size_t> marked;
    std::vector<char> alive(pairs.size(), 1);
    size_t remaining = pairs.size();
    while (remaining > 0) {
      std::vector<int> cnt(idx.size(), 0);
      for (size_t pi = 0; pi < pairs.size(); ++pi) {
        if (!alive[pi]) continue;
        ++cnt[pairs[pi].first];
        ++cnt[pairs[pi].second];
      }
      size_t pick = 0;
      for (size_t i = 1; i < idx.size(); ++i) {
        if (cnt[i] > cnt[pick]) pick = i;
      }
      marked.insert(pick);
      for (size_t pi = 0; pi < pairs.size(); ++pi) {
        if (alive[pi] &&
            (pairs[pi].first == pick || pairs[pi].second == pick)) {
          alive[pi] = 0;
          --remaining;
        }
      }
    }

    size_t allowed = idx.size() / 8;
    const auto& [video, subject, kind_int] = key;
    if (marked.size() > allowed) {
      res.removed_subjects.insert({video, subject});
      continue;
    }
    if (marked.empty()) continue;
    kept_with_marks.insert({video, subject});

    // replace each marked cell with the mean of its nearest consistent
    // neighbors along the condition and tau axes
    for (size_t mi : marked) {
      const auto& rm = ratings[idx[mi]];
      std::vector<double> neigh;
      auto add_nearest = [&](const std::function<bool(const RatingRecord&)>&
                                 comparable,
                             const std::function<double(const RatingRecord&)>&
                                 dist) {
        const RatingRecord* pick = nullptr;
        double best_d = std::numeric_limits<double>::infinity();
        for (size_t oi = 0; oi < idx.size(); ++oi) {
          if (oi == mi || marked.count(oi)) continue;
          const auto& ro = ratings[idx[oi]];
          if (!comparable(ro)) continue;
          double d = dist(ro);
          if (d < best_d) {
            best_d = d;
            pick = &ro;
          }
        }
        if (pick) neigh.push_back(pick->score);
      };

      auto scale_of = [](const RatingRecord& r) {
        return r.kind == TestKind::kSImpact ? r.s_hat : r.q_hat;
      };
      double ms = scale_of(rm);
      // lower / higher condition at equal tau
      add_nearest(
          [&](const RatingRecord& r) {
            return r.tau == rm.tau && cond_worse(r, rm);
          },
          [&](const RatingRecord& r) { return ms - scale_of(r); });
      add_nearest(
          [&](const RatingRecord& r) {
            return r.tau == rm.tau && cond_worse(rm, r);
          },
          [&](const RatingRecord& r) { return scale_of(r) - ms; });
      // shorter / longer tau at equal condition
      add_nearest(
          [&](const RatingRecord& r) {
            return cond_equal(r, rm) && r.tau < rm.tau;
          },
          [&](const RatingRecord& r) { return rm.tau - r.tau; });
      add_nearest(
          [&](const RatingRecord& r) {
            return cond_equal(r, rm) && r.tau > rm.tau;
          },
          [&](const RatingRecord& r) { return r.tau - rm.tau; });

      if (neigh.empty()) {
        warn("consistency: no consistent neighbors for subject '" + subject +
             "' video '" + video + "', cell kept as-is");
        continue;
      }
      new_score[idx[mi]] = mean_of(neigh);
      ++res.replaced_cells;
    }
  }

  for (const auto& [key, idx] : grp) {
    const auto& [video, subject, kind_int] = key;
    (void)kind_int;
    if (res.removed_subjects.count({video, subject})) {
      for (size_t i : idx) drop[i] = 1;
    }
  }
  res.inconsistent_subjects_kept = static_cast<int>(kept_with_marks.size());
  for (size_t i = 0; i < ratings.size(); ++i) {
    if (drop[i]) continue;
    RatingRecord r = ratings[i];
    r.score = new_score[i];
    res.cleaned.push_back(std::move(r));
  }
  return res;
}

std::vector<MosPoint> aggregate_mos(const std::vector<RatingRecord>& ratings,
                                    const CalibrationOptions& opts) {
  std::map<std::tuple<int, double, double, double>, std::vector<double>> cells;
  for (const auto& r : ratings) {
    cells[{static_cast<int>(r.kind), r.q_hat, r.s_hat, r.tau}].push_back(
        r.score);
  }
  std::vector<MosPoint> out;
  out.reserve(cells.size());
  for (const auto& [key, scores] : cells) {
    MosPoint p;
    p.kind = static_cast<TestKind>(std::get<0>(key));
    p.q_hat = std::get<1>(key);
    p.s_hat = std::get<2>(key);
    p.tau = std::get<3>(key);
    p.mos = mean_of(scores);
    p.stddev = stddev_of(scores, p.mos, opts.sigma);
    p.n_subjects = static_cast<int>(scores.size());
    out.push_back(p);
  }
  return out;
}

FitResult fit_decay(const std::vector<std::pair<double, double>>& points,
                    const DecayFitOptions& opts) {
  std::set<double> taus;
  for (const auto& [tau, v] : points) taus.insert(tau);
  if (taus.size() < 3) {
    throw std::invalid_argument("fit_decay: need >= 3 distinct tau values");
  }
  double vmin = points.front().second, vmax = vmin;
  for (const auto& [tau, v] : points) {
    vmin = std::min(vmin, v);
    vmax = std::max(vmax, v);
  }
  FitResult res;
  res.n_points = static_cast<int>(points.size());
  if (vmax - vmin < 1e-12) {
    warn("fit_decay: constant quality, returning a = 0");
    res.a = 0.0;
    res.b = 0.0;
    res.rmse = std::sqrt(decay_sse(0.0, 0.0, points) / points.size());
    return res;
  }

  int n = opts.grid_n;
  auto a_at = [&](long i) { return static_cast<double>(i) / (n - 1); };
  auto b_at = [&](long j) {
    return opts.b_lo + (opts.b_hi - opts.b_lo) * j / (n - 1);
  };
  GridBest best = grid_minimize(
      static_cast<long>(n) * n,
      [&](long flat) {
        return decay_sse(a_at(flat / n), b_at(flat % n), points);
      },
      opts.execution);

  double a0 = a_at(best.idx / n);
  double b0 = b_at(best.idx % n);
  double da = 1.0 / (n - 1);
  double db = (opts.b_hi - opts.b_lo) / (n - 1);
  NmResult nm = nelder_mead(
      [&](const std::vector<double>& x) {
        return decay_sse(x[0], x[1], points);
      },
      {a0, b0}, {da, db}, {0.0, opts.b_lo}, {1.0, opts.b_hi});

  res.a = nm.x[0];
  res.b = nm.x[1];
  res.rmse = std::sqrt(nm.f / points.size());
  return res;
}

ParamFit fit_param_family(const std::vector<std::pair<double, double>>& points,
                          ParamFamily family, Execution execution) {
  if (points.size() < 3) {
    throw std::invalid_argument("fit_param_family: need >= 3 points");
  }
  for (const auto& [x, v] : points) {
    if (!(x > 0.0)) {
      throw std::invalid_argument("fit_param_family: scales must be > 0");
    }
  }
  double vmin = points.front().second, vmax = vmin;
  for (const auto& [x, v] : points) {
    vmin = std::min(vmin, v);
    vmax = std::max(vmax, v);
  }
  ParamFit fit;
  if (vmax - vmin < 1e-12) {
    warn("fit_param_family: constant data, k2 pinned to 0");
    double vb = mean_of([&] {
      std::vector<double> vs;
      for (const auto& [x, v] : points) vs.push_back(v);
      return vs;
    }());
    fit.k = {family == ParamFamily::kButterworth ? vb : 0.0, 0.0,
             family == ParamFamily::kButterworth ? 1.0 : vb};
    fit.rmse = std::sqrt([&] {
      double s = 0.0;
      for (const auto& [x, v] : points) s += (v - vb) * (v - vb);
      return s;
    }() / points.size());
    return fit;
  }

  if (family == ParamFamily::kButterworth) {
    const int n = 200;
    auto k2_at = [&](long i) {
      return std::pow(10.0, -2.0 + 5.0 * i / (n - 1));  // 1e-2 .. 1e3
    };
    auto k3_at = [&](long j) {
      return std::pow(10.0, -1.0 + (std::log10(12.0) + 1.0) * j / (n - 1));
    };
    GridBest best = grid_minimize(
        static_cast<long>(n) * n,
        [&](long flat) {
          return butterworth_profiled(k2_at(flat / n), k3_at(flat % n), points,
                                      nullptr);
        },
        execution);
    double k2 = k2_at(best.idx / n);
    double k3 = k3_at(best.idx % n);
    NmResult nm = nelder_mead(
        [&](const std::vector<double>& x) {
          return butterworth_profiled(x[0], x[1], points, nullptr);
        },
        {k2, k3}, {0.1 * k2 + 1e-3, 0.1 * k3 + 1e-3}, {0.0, 0.01},
        {1e4, 20.0});
    double k1 = 0.0;
    double sse = butterworth_profiled(nm.x[0], nm.x[1], points, &k1);
    fit.k = {k1, nm.x[0], nm.x[1]};
    fit.rmse = std::sqrt(sse / points.size());
    return fit;
  }

  // exponential: only k2 is nonlinear
  const long n = 2000;
  const double k2_hi = 50.0;
  auto k2_at = [&](long i) { return k2_hi * i / (n - 1); };
  GridBest best = grid_minimize(
      n,
      [&](long i) {
        return exponential_profiled(k2_at(i), points, nullptr, nullptr);
      },
      execution);
  double lo = k2_at(std::max<long>(0, best.idx - 1));
  double hi = k2_at(std::min<long>(n - 1, best.idx + 1));
  constexpr double kGolden = 0.6180339887498949;
  double x1 = hi - kGolden * (hi - lo);
  double x2 = lo + kGolden * (hi - lo);
  double f1 = exponential_profiled(x1, points, nullptr, nullptr);
  double f2 = exponential_profiled(x2, points, nullptr, nullptr);
  for (int it = 0; it < 120; ++it) {
    if (f1 > f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kGolden * (hi - lo);
      f2 = exponential_profiled(x2, points, nullptr, nullptr);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kGolden * (hi - lo);
      f1 = exponential_profiled(x1, points, nullptr, nullptr);
    }
  }
  double k2 = 0.5 * (lo + hi);
  double sse_mid = exponential_profiled(k2, points, nullptr, nullptr);
  double sse_grid = best.sse;
  if (sse_grid < sse_mid) {
    k2 = k2_at(best.idx);
  }
  double k1 = 0.0, k3 = 0.0;
  double sse = exponential_profiled(k2, points, &k1, &k3);
  fit.k = {k1, k2, k3};
  fit.rmse = std::sqrt(sse / points.size());
  return fit;
}

ParamFunctionFit fit_param_functions(const std::vector<DecayFitPoint>& fits,
                                     ParamFamily family, Execution execution) {
  std::vector<std::pair<double, double>> a_pts;
  std::vector<std::pair<double, double>> b_pts;
  for (const auto& f : fits) {
    a_pts.emplace_back(f.scale, f.a);
    b_pts.emplace_back(f.scale, f.b);
  }
  ParamFunctionFit out;
  out.a_fit = fit_param_family(a_pts, family, execution);
  out.b_fit = fit_param_family(b_pts, family, execution);
  return out;
}

Correlations correlations(const std::vector<double>& predicted,
                          const std::vector<double>& measured) {
  if (predicted.empty() || predicted.size() != measured.size()) {
    throw std::invalid_argument(
        "correlations: inputs must be equal-length and nonempty");
  }
  auto pearson = [](const std::vector<double>& x,
                    const std::vector<double>& y) {
    double mx = mean_of(x), my = mean_of(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
      sxy += (x[i] - mx) * (y[i] - my);
      sxx += (x[i] - mx) * (x[i] - mx);
      syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) {
      warn("correlations: zero variance, coefficient undefined");
      return std::numeric_limits<double>::quiet_NaN();
    }
    return sxy / std::sqrt(sxx * syy);
  };
  auto ranks = [](const std::vector<double>& v) {
    std::vector<size_t> order(v.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    size_t i = 0;
    while (i < order.size()) {
      size_t j = i;
      while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
      double avg = (i + j) / 2.0 + 1.0;  // average rank, 1-based
      for (size_t k = i; k <= j; ++k) r[order[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  Correlations c;
  c.pcc = pearson(predicted, measured);
  c.srcc = pearson(ranks(predicted), ranks(measured));
  return c;
}

PipelineResult run_pipeline(const std::vector<RatingRecord>& ratings,
                            const CalibrationOptions& opts) {
  for (const auto& r : ratings) r.validate();
  PipelineResult out;

  auto z = zscore_normalize(ratings, opts);
  auto rejected = screen_bt500(z);
  std::vector<RatingRecord> kept;
  kept.reserve(ratings.size());
  for (const auto& r : ratings) {
    auto it = rejected.find(r.video_id);
    if (it != rejected.end() && it->second.count(r.subject_id)) continue;
    kept.push_back(r);
  }
  for (const auto& [video, subjects] : rejected) {
    out.subjects_screened_bt500 += static_cast<int>(subjects.size());
  }

  ConsistencyResult cons = screen_consistency(kept);
  out.subjects_removed_consistency =
      static_cast<int>(cons.removed_subjects.size());
  out.cells_replaced = cons.replaced_cells;
  out.mos = aggregate_mos(cons.cleaned, opts);

  // decay fit per condition level of each separated test arm
  auto fit_arm = [&](TestKind kind) {
    std::map<double, std::vector<std::pair<double, double>>> by_scale;
    for (const auto& p : out.mos) {
      if (p.kind != kind) continue;
      double scale = (kind == TestKind::kSImpact) ? p.s_hat : p.q_hat;
      by_scale[scale].emplace_back(p.tau, p.mos / opts.q_max_mos);
    }
    std::vector<DecayFitPoint> fits;
    for (auto& [scale, pts] : by_scale) {
      std::set<double> taus;
      for (const auto& [tau, v] : pts) taus.insert(tau);
      if (taus.size() < 3) {
        warn("pipeline: scale " + std::to_string(scale) +
             " has < 3 tau values, skipped");
        continue;
      }
      std::sort(pts.begin(), pts.end());
      DecayFitOptions dopts;
      dopts.execution = opts.execution;
      FitResult f = fit_decay(pts, dopts);
      fits.push_back({scale, f.a, f.b});
    }
    return fits;
  };
  out.q_decay_fits = fit_arm(TestKind::kQImpact);
  out.s_decay_fits = fit_arm(TestKind::kSImpact);

  out.fitted = ModelConstants{};
  out.fitted.q_max_mos = opts.q_max_mos;
  if (out.q_decay_fits.size() >= 3) {
    ParamFunctionFit qf = fit_param_functions(
        out.q_decay_fits, ParamFamily::kButterworth, opts.execution);
    out.fitted.a_q = qf.a_fit.k;
    out.fitted.b_q = qf.b_fit.k;
  } else {
    warn("pipeline: too few q-impact conditions, keeping default a_q/b_q");
  }
  if (out.s_decay_fits.size() >= 3) {
    ParamFunctionFit sf = fit_param_functions(
        out.s_decay_fits, ParamFamily::kExponential, opts.execution);
    out.fitted.a_s = sf.a_fit.k;
    out.fitted.b_s = sf.b_fit.k;
  } else {
    warn("pipeline: too few s-impact conditions, keeping default a_s/b_s");
  }
  return out;
}

}  // namespace fovopt
