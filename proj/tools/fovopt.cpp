#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fovopt/calibration.hpp"
#include "fovopt/io.hpp"
#include "fovopt/metrics.hpp"
#include "fovopt/model.hpp"
#include "fovopt/optimizer.hpp"
#include "fovopt/rate.hpp"
#include "fovopt/simulator.hpp"

namespace {

using nlohmann::json;
using namespace fovopt;

std::vector<ContentProfile> load_profile_set(const std::string& flag) {
  if (!flag.empty()) return load_profiles(flag);
  if (const char* env = std::getenv("FOVOPT_PROFILES")) {
    return load_profiles(env);
  }
  return builtin_profiles();
}

ModelConstants load_constants(const std::string& flag) {
  return flag.empty() ? ModelConstants{} : ModelConstants::load(flag);
}

std::vector<double> log_grid(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi > lo) || n < 2) {
    throw std::invalid_argument("bandwidth grid spec must satisfy 0 < "
                                "bmin < bmax with at least 2 points");
  }
  std::vector<double> g(static_cast<size_t>(n));
  double llo = std::log10(lo);
  double lhi = std::log10(hi);
  for (int i = 0; i < n; ++i) {
    g[static_cast<size_t>(i)] = std::pow(10.0, llo + (lhi - llo) * i / (n - 1));
  }
  return g;
}

void print_result(const OptimizationResult& r, const ModelConstants& c) {
  std::cout << "qp = " << (r.qp ? std::to_string(*r.qp) : std::string("-"))
            << "\n"
            << "q = " << format_double(r.q) << "\n"
            << "q_hat = " << format_double(c.q_min / r.q) << "\n"
            << "s_hat = " << format_double(r.s_hat) << "\n"
            << "tau = " << format_double(r.tau) << "\n"
            << "rl_rate = " << format_double(r.rl_rate) << "\n"
            << "total_rate = " << format_double(r.total_rate) << "\n"
            << "q_norm = " << format_double(r.q_norm) << "\n"
            << "Q = " << format_double(r.q_norm * c.q_max_mos) << "\n"
            << "feasible = " << (r.feasible ? 1 : 0) << "\n";
}

struct Cli {
  // shared
  std::string constants_path;
  std::string profiles_path;
  std::string profile_name;
  std::string policy = "model-fully-discrete";
  double T = 5.0;
  long seed = 1;
  bool serial = false;
  std::vector<double> s_levels;
  std::vector<int> qp_set;
  int grid_points = 2048;

  SearchSettings settings() const {
    SearchSettings s;
    s.grid_points = grid_points;
    if (!s_levels.empty()) s.s_levels = s_levels;
    s.qp_set = qp_set;
    s.execution = serial ? Execution::kSerial : Execution::kParallel;
    return s;
  }

  json config(const std::string& cmd) const {
    json j;
    j["cmd"] = cmd;
    j["version"] = kVersion;
    j["constants"] = constants_path;
    j["profiles"] = profiles_path;
    j["profile"] = profile_name;
    j["policy"] = policy;
    j["T"] = T;
    j["seed"] = seed;
    j["serial"] = serial;
    j["s_levels"] = s_levels;
    j["qp_set"] = qp_set;
    j["grid_points"] = grid_points;
    return j;
  }
};

void add_common(CLI::App* cmd, Cli& cli, bool needs_profile) {
  cmd->add_option("--constants", cli.constants_path,
                  "Model constants JSON (defaults to the built-in set)");
  if (needs_profile) {
    cmd->add_option("--profiles", cli.profiles_path,
                    "Profile JSON (default: FOVOPT_PROFILES or built-ins)");
    cmd->add_option("--profile", cli.profile_name, "Content profile name")
        ->required();
    cmd->add_option("--policy", cli.policy,
                    "model-continuous | model-discrete-s | "
                    "model-fully-discrete | heuristic");
    cmd->add_option("-T,--T", cli.T, "Initial-delay window, seconds");
    cmd->add_option("--s-levels", cli.s_levels,
                    "Resolution levels, comma separated")
        ->delimiter(',');
    cmd->add_option("--qp-set", cli.qp_set, "QP values, comma separated")
        ->delimiter(',');
    cmd->add_option("--grid-points", cli.grid_points,
                    "Continuous-search grid size");
  }
  cmd->add_option("--seed", cli.seed, "Seed for randomized paths");
  cmd->add_flag("--serial", cli.serial, "Disable parallel execution");
}

int run(int argc, char** argv) {
  CLI::App app{"Perceptual-quality-driven rate adaptation toolkit"};
  app.require_subcommand(1);
  Cli cli;

  // eval
  double tau = 0.0, qhat = 1.0, shat = 1.0;
  auto* eval = app.add_subcommand("eval", "Evaluate the quality model");
  eval->add_option("--tau", tau, "Refinement duration, seconds")->required();
  eval->add_option("--qhat", qhat, "Normalized quantization in (0,1]")
      ->required();
  eval->add_option("--shat", shat, "Normalized resolution in (0,1]")
      ->required();
  add_common(eval, cli, false);

  // optimize
  double bandwidth = 0.0;
  auto* opt = app.add_subcommand("optimize", "Best representation at one B");
  opt->add_option("-B,--B", bandwidth, "Bandwidth, Mbps")->required();
  add_common(opt, cli, true);

  // sweep
  double bmin = 0.0, bmax = 0.0;
  int points = 200;
  std::string out_path;
  auto* sw = app.add_subcommand("sweep", "Optimal curve over a B grid");
  sw->add_option("--bmin", bmin, "Grid start, Mbps (default: profile floor)");
  sw->add_option("--bmax", bmax, "Grid end, Mbps (default: 4*(r_fov+r_max))");
  sw->add_option("--points", points, "Grid size");
  sw->add_option("-o,--out", out_path, "Output CSV path")->required();
  add_common(sw, cli, true);

  // bdrate
  std::string test_csv, anchor_csv, label = "curve";
  std::string bd_format = "json";
  auto* bd = app.add_subcommand("bdrate", "Compare two sweep CSVs");
  bd->add_option("test", test_csv, "Tested sweep CSV")->required();
  bd->add_option("anchor", anchor_csv, "Anchor sweep CSV")->required();
  bd->add_option("--label", label, "Name used in the report");
  bd->add_option("--format", bd_format, "json | csv");
  add_common(bd, cli, false);

  // fit
  std::string ratings_path, fit_out;
  std::string grouping = "per-subject", sigma = "sample";
  auto* fit = app.add_subcommand("fit", "Calibrate constants from ratings");
  fit->add_option("--ratings", ratings_path, "Ratings CSV")->required();
  fit->add_option("-o,--out", fit_out, "Write fitted constants JSON here");
  fit->add_option("--grouping", grouping, "per-subject | per-pvs");
  fit->add_option("--sigma", sigma, "sample | population");
  add_common(fit, cli, false);

  // simulate
  std::string trace_path, events_path, report_path;
  auto* sim = app.add_subcommand("simulate", "Replay a trace with FoV events");
  sim->add_option("--trace", trace_path, "Bandwidth trace CSV")->required();
  sim->add_option("--events", events_path, "FoV event CSV")->required();
  sim->add_option("-o,--out", report_path, "Per-event report CSV");
  add_common(sim, cli, true);

  CLI11_PARSE(app, argc, argv);

  ModelConstants c = load_constants(cli.constants_path);

  if (eval->parsed()) {
    std::cout << "NQQ = " << format_double(nqq(tau, qhat, c)) << "\n"
              << "NQS = " << format_double(nqs(tau, shat, c)) << "\n"
              << "Q_norm = " << format_double(quality_norm(tau, qhat, shat, c))
              << "\n"
              << "Q = " << format_double(quality(tau, qhat, shat, c)) << "\n";
    return 0;
  }

  if (opt->parsed()) {
    auto profiles = load_profile_set(cli.profiles_path);
    const ContentProfile& p = find_profile(profiles, cli.profile_name);
    SegmentConfig cfg{bandwidth, cli.T};
    OptimizationResult r =
        optimize(policy_from_name(cli.policy), p, cfg, c, cli.settings());
    std::cout << "policy = " << cli.policy << "\n"
              << "B = " << format_double(bandwidth) << "\n"
              << "T = " << format_double(cli.T) << "\n";
    print_result(r, c);
    return 0;
  }

  if (sw->parsed()) {
    auto profiles = load_profile_set(cli.profiles_path);
    const ContentProfile& p = find_profile(profiles, cli.profile_name);
    std::vector<double> grid;
    if (bmin > 0.0 || bmax > 0.0) {
      double lo = bmin > 0.0 ? bmin : std::max(1e-6, p.r_fov);
      double hi = bmax > 0.0 ? bmax : 4.0 * (p.r_fov + p.r_max);
      grid = log_grid(lo, hi, points);
    } else {
      grid = default_b_grid(p, points);
    }
    SweepCurve curve = sweep(p, c, policy_from_name(cli.policy), grid, cli.T,
                             cli.settings());
    json cfg = cli.config("sweep");
    cfg["bmin"] = grid.front();
    cfg["bmax"] = grid.back();
    cfg["points"] = points;
    json mk{{"constants", json::parse(c.to_json())},
            {"profile",
             {{"name", p.name},
              {"r_max", p.r_max},
              {"alpha", p.alpha},
              {"beta", p.beta},
              {"r_fov", p.r_fov}}},
            {"T", cli.T}};
    write_sweep_csv(out_path, curve, cfg.dump(), mk.dump());
    std::cout << "wrote " << out_path << " (" << curve.points.size()
              << " points)\n";
    return 0;
  }

  if (bd->parsed()) {
    std::string ht = read_header_token(test_csv, "model");
    std::string ha = read_header_token(anchor_csv, "model");
    if (!ht.empty() && !ha.empty() && ht != ha) {
      throw std::runtime_error(
          "model mismatch (constants/profile/T differ): " + test_csv + " (" +
          ht + ") vs " + anchor_csv + " (" + ha + ")");
    }
    SweepCurve test = read_sweep_csv(test_csv);
    SweepCurve anchor = read_sweep_csv(anchor_csv);
    CurveComparison cmp = bd_rate(test, anchor);
    if (bd_format == "csv") {
      std::cout << comparison_csv_row(label, cmp);
    } else {
      std::cout << comparison_json(label, cmp);
    }
    return 0;
  }

  if (fit->parsed()) {
    CalibrationOptions opts;
    opts.grouping = (grouping == "per-pvs") ? ZGrouping::kPerPvs
                                            : ZGrouping::kPerSubject;
    opts.sigma =
        (sigma == "population") ? SigmaMode::kPopulation : SigmaMode::kSample;
    opts.execution = cli.serial ? Execution::kSerial : Execution::kParallel;
    PipelineResult res = run_pipeline(read_ratings_csv(ratings_path), opts);
    json j;
    j["n_mos_points"] = res.mos.size();
    j["subjects_screened_bt500"] = res.subjects_screened_bt500;
    j["subjects_removed_consistency"] = res.subjects_removed_consistency;
    j["cells_replaced"] = res.cells_replaced;
    auto dump_fits = [](const std::vector<DecayFitPoint>& fits) {
      json arr = json::array();
      for (const auto& f : fits) {
        arr.push_back({{"scale", f.scale}, {"a", f.a}, {"b", f.b}});
      }
      return arr;
    };
    j["q_decay_fits"] = dump_fits(res.q_decay_fits);
    j["s_decay_fits"] = dump_fits(res.s_decay_fits);
    j["fitted"] = json::parse(res.fitted.to_json());
    std::cout << j.dump(2) << "\n";
    if (!fit_out.empty()) res.fitted.save(fit_out);
    return 0;
  }

  if (sim->parsed()) {
    auto profiles = load_profile_set(cli.profiles_path);
    const ContentProfile& p = find_profile(profiles, cli.profile_name);
    BandwidthTrace trace = read_trace_csv(trace_path);
    std::vector<FovEvent> events = read_events_csv(events_path);
    SessionReport report = simulate(trace, events, p,
                                    policy_from_name(cli.policy), cli.T, c,
                                    cli.settings());
    if (!report_path.empty()) {
      json cfg = cli.config("simulate");
      cfg["trace"] = trace_path;
      cfg["events"] = events_path;
      write_session_report_csv(report_path, report, cfg.dump());
    }
    std::cout << session_summary_json(report);
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ParseError& e) {
    json j{{"type", "parse"},
           {"path", e.path()},
           {"line", e.line()},
           {"message", e.what()}};
    std::cerr << "error: " << j.dump() << "\n";
    return 1;
  } catch (const InfeasibleError& e) {
    json j{{"type", "infeasible"},
           {"min_required_bandwidth", e.min_required_bandwidth()},
           {"message", e.what()}};
    std::cerr << "error: " << j.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    json j{{"type", "error"}, {"message", e.what()}};
    std::cerr << "error: " << j.dump() << "\n";
    return 1;
  }
}
