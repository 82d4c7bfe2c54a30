// Serial-vs-parallel timing for the two hot paths: bandwidth sweeps and the
// decay-fit grid. Verifies agreement bit for bit while it measures.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <utility>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "fovopt/calibration.hpp"
#include "fovopt/optimizer.hpp"

using namespace fovopt;

namespace {

double now() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

template <typename F>
double time_best_of(int reps, F&& f) {
  double best = 1e18;
  for (int i = 0; i < reps; ++i) {
    double t0 = now();
    f();
    best = std::min(best, now() - t0);
  }
  return best;
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("openmp: %d thread(s)\n", omp_get_max_threads());
#else
  std::printf("openmp: not enabled, serial on both sides\n");
#endif

  ModelConstants c;
  const ContentProfile& p = find_profile(builtin_profiles(), "Balboa");
  auto grid = default_b_grid(p, 400);

  SearchSettings par;
  par.execution = Execution::kParallel;
  SweepCurve curve_par, curve_ser;
  double t_sweep_par = time_best_of(3, [&] {
    curve_par = sweep(p, c, Policy::kModelFullyDiscrete, grid, 5.0, par);
  });
  double t_sweep_ser = time_best_of(3, [&] {
    curve_ser =
        sweep_serial(p, c, Policy::kModelFullyDiscrete, grid, 5.0, par);
  });
  bool same = curve_par.points.size() == curve_ser.points.size();
  for (size_t i = 0; same && i < curve_par.points.size(); ++i) {
    const auto& a = curve_par.points[i].result;
    const auto& b = curve_ser.points[i].result;
    same = a.q == b.q && a.qp == b.qp && a.s_hat == b.s_hat &&
           a.tau == b.tau && a.q_norm == b.q_norm;
  }
  std::printf("sweep 400 pts fully-discrete: serial %.3f s, parallel %.3f s, "
              "speedup %.2fx, identical %s\n",
              t_sweep_ser, t_sweep_par, t_sweep_ser / t_sweep_par,
              same ? "yes" : "NO");

  std::vector<std::pair<double, double>> pts;
  for (int i = 0; i <= 40; ++i) {
    double tau = 5.0 * i / 40.0;
    pts.emplace_back(tau, 1.0 + 0.6 * std::expm1(-1.2 * tau));
  }
  DecayFitOptions fopt;
  fopt.grid_n = 600;
  FitResult f_par, f_ser;
  fopt.execution = Execution::kParallel;
  double t_fit_par = time_best_of(3, [&] { f_par = fit_decay(pts, fopt); });
  fopt.execution = Execution::kSerial;
  double t_fit_ser = time_best_of(3, [&] { f_ser = fit_decay(pts, fopt); });
  std::printf("decay fit 600x600 grid: serial %.3f s, parallel %.3f s, "
              "speedup %.2fx, identical %s\n",
              t_fit_ser, t_fit_par, t_fit_ser / t_fit_par,
              (f_par.a == f_ser.a && f_par.b == f_ser.b) ? "yes" : "NO");

  if (!same || f_par.a != f_ser.a || f_par.b != f_ser.b) return 1;
  return 0;
}
