#include "fovopt/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fovopt {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(trim(cur));
  return out;
}

double parse_double(const std::string& s, const std::string& path, int line) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) {
    throw ParseError(path, line, "bad number '" + s + "'");
  }
  return v;
}

int parse_int(const std::string& s, const std::string& path, int line) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) {
    throw ParseError(path, line, "bad integer '" + s + "'");
  }
  return v;
}

// Data rows of a CSV file: (physical line number, fields). Comment lines
// and the expected header are skipped.
std::vector<std::pair<int, std::vector<std::string>>> read_csv_rows(
    const std::string& path, const std::string& header) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");
  std::vector<std::pair<int, std::vector<std::string>>> rows;
  std::string line;
  int lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (!header_seen && t == header) {
      header_seen = true;
      continue;
    }
    header_seen = true;
    rows.emplace_back(lineno, split(t, ','));
  }
  return rows;
}

void check_columns(const std::vector<std::string>& fields, size_t expected,
                   const std::string& path, int line) {
  if (fields.size() != expected) {
    throw ParseError(path, line,
                     "expected " + std::to_string(expected) + " columns, got " +
                         std::to_string(fields.size()));
  }
}

std::string file_header(const std::string& config_text,
                        const std::string& model_key_text = "") {
  std::string h = std::string("# fovopt ") + kVersion +
                  " config=" + config_hash(config_text);
  if (!model_key_text.empty()) h += " model=" + config_hash(model_key_text);
  return h + "\n";
}

constexpr const char* kSweepHeader =
    "B,qp,q,s_hat,tau,rl_rate,total_rate,q_norm,feasible";
constexpr const char* kRatingsHeader =
    "video_id,pvs_id,subject_id,kind,q_hat,s_hat,tau,score";
constexpr const char* kTraceHeader = "time,bandwidth";
constexpr const char* kEventsHeader = "time,tile_rates";
constexpr const char* kSessionHeader =
    "time,B,r_fov,qp,q,s_hat,tau,rl_rate,total_rate,q_norm,feasible";

}  // namespace

ParseError::ParseError(const std::string& path, int line,
                       const std::string& message)
    : std::runtime_error(path + ":" + std::to_string(line) + ": " + message),
      path_(path),
      line_(line) {}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string config_hash(const std::string& config_text) {
  std::ostringstream os;
  os << std::hex << fnv1a64(config_text);
  return os.str();
}

std::string read_header_token(const std::string& path, const std::string& key) {
  std::ifstream in(path);
  std::string line;
  if (!in || !std::getline(in, line)) return "";
  if (line.empty() || line[0] != '#') return "";
  const std::string needle = " " + key + "=";
  auto pos = line.find(needle);
  if (pos == std::string::npos) return "";
  auto b = pos + needle.size();
  auto e = line.find_first_of(" \r", b);
  return line.substr(b, e == std::string::npos ? std::string::npos : e - b);
}

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, p);
}

std::string sweep_csv_text(const SweepCurve& curve,
                           const std::string& config_text,
                           const std::string& model_key_text) {
  std::ostringstream os;
  os << file_header(config_text, model_key_text) << kSweepHeader << "\n";
  for (const SweepPoint& pt : curve.points) {
    const OptimizationResult& r = pt.result;
    os << format_double(pt.bandwidth) << ",";
    if (r.qp) os << *r.qp;
    os << "," << format_double(r.q) << "," << format_double(r.s_hat) << ","
       << format_double(r.tau) << "," << format_double(r.rl_rate) << ","
       << format_double(r.total_rate) << "," << format_double(r.q_norm) << ","
       << (r.feasible ? 1 : 0) << "\n";
  }
  return os.str();
}

void write_sweep_csv(const std::string& path, const SweepCurve& curve,
                     const std::string& config_text,
                     const std::string& model_key_text) {
  write_text_file(path, sweep_csv_text(curve, config_text, model_key_text));
}

SweepCurve read_sweep_csv(const std::string& path) {
  SweepCurve curve;
  for (const auto& [lineno, f] : read_csv_rows(path, kSweepHeader)) {
    check_columns(f, 9, path, lineno);
    SweepPoint pt;
    pt.bandwidth = parse_double(f[0], path, lineno);
    if (!f[1].empty()) pt.result.qp = parse_int(f[1], path, lineno);
    pt.result.q = parse_double(f[2], path, lineno);
    pt.result.s_hat = parse_double(f[3], path, lineno);
    pt.result.tau = parse_double(f[4], path, lineno);
    pt.result.rl_rate = parse_double(f[5], path, lineno);
    pt.result.total_rate = parse_double(f[6], path, lineno);
    pt.result.q_norm = parse_double(f[7], path, lineno);
    pt.result.feasible = parse_int(f[8], path, lineno) != 0;
    curve.points.push_back(pt);
  }
  return curve;
}

std::vector<RatingRecord> read_ratings_csv(const std::string& path) {
  std::vector<RatingRecord> out;
  for (const auto& [lineno, f] : read_csv_rows(path, kRatingsHeader)) {
    check_columns(f, 8, path, lineno);
    RatingRecord r;
    r.video_id = f[0];
    r.pvs_id = f[1];
    r.subject_id = f[2];
    try {
      r.kind = test_kind_from_name(f[3]);
    } catch (const std::invalid_argument& e) {
      throw ParseError(path, lineno, e.what());
    }
    r.q_hat = parse_double(f[4], path, lineno);
    r.s_hat = parse_double(f[5], path, lineno);
    r.tau = parse_double(f[6], path, lineno);
    r.score = parse_double(f[7], path, lineno);
    try {
      r.validate();
    } catch (const std::invalid_argument& e) {
      throw ParseError(path, lineno, e.what());
    }
    out.push_back(std::move(r));
  }
  return out;
}

void write_ratings_csv(const std::string& path,
                       const std::vector<RatingRecord>& ratings,
                       const std::string& config_text) {
  std::ostringstream os;
  os << file_header(config_text) << kRatingsHeader << "\n";
  for (const RatingRecord& r : ratings) {
    os << r.video_id << "," << r.pvs_id << "," << r.subject_id << ","
       << test_kind_name(r.kind) << "," << format_double(r.q_hat) << ","
       << format_double(r.s_hat) << "," << format_double(r.tau) << ","
       << format_double(r.score) << "\n";
  }
  write_text_file(path, os.str());
}

BandwidthTrace read_trace_csv(const std::string& path) {
  BandwidthTrace trace;
  for (const auto& [lineno, f] : read_csv_rows(path, kTraceHeader)) {
    check_columns(f, 2, path, lineno);
    trace.samples.push_back({parse_double(f[0], path, lineno),
                             parse_double(f[1], path, lineno)});
  }
  try {
    trace.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(path, 0, e.what());
  }
  return trace;
}

std::vector<FovEvent> read_events_csv(const std::string& path) {
  std::vector<FovEvent> out;
  for (const auto& [lineno, f] : read_csv_rows(path, kEventsHeader)) {
    check_columns(f, 2, path, lineno);
    FovEvent ev;
    ev.time = parse_double(f[0], path, lineno);
    if (!f[1].empty()) {
      for (const std::string& tile : split(f[1], ';')) {
        ev.tile_rates.push_back(parse_double(tile, path, lineno));
      }
    }
    out.push_back(std::move(ev));
  }
  return out;
}

void write_session_report_csv(const std::string& path,
                              const SessionReport& report,
                              const std::string& config_text) {
  std::ostringstream os;
  os << file_header(config_text) << kSessionHeader << "\n";
  for (const EventOutcome& ev : report.events) {
    const OptimizationResult& r = ev.result;
    os << format_double(ev.time) << "," << format_double(ev.bandwidth) << ","
       << format_double(ev.r_fov) << ",";
    if (r.qp) os << *r.qp;
    os << "," << format_double(r.q) << "," << format_double(r.s_hat) << ","
       << format_double(r.tau) << "," << format_double(r.rl_rate) << ","
       << format_double(r.total_rate) << "," << format_double(r.q_norm) << ","
       << (r.feasible ? 1 : 0) << "\n";
  }
  write_text_file(path, os.str());
}

std::string session_summary_json(const SessionReport& report) {
  json j;
  j["n_events"] = report.events.size();
  j["mean_q_norm"] = report.mean_q_norm;
  j["min_q_norm"] = report.min_q_norm;
  j["infeasible_count"] = report.infeasible_count;
  return j.dump(2) + "\n";
}

std::string comparison_json(const std::string& profile,
                            const CurveComparison& cmp) {
  json j;
  j["profile"] = profile;
  j["bd_rate_percent"] = cmp.bd_rate_percent;
  j["overlap_low"] = cmp.overlap_low;
  j["overlap_high"] = cmp.overlap_high;
  j["method_note"] = cmp.method_note;
  return j.dump(2) + "\n";
}

std::string comparison_csv_row(const std::string& profile,
                               const CurveComparison& cmp) {
  std::ostringstream os;
  os << profile << "," << format_double(cmp.bd_rate_percent) << ","
     << format_double(cmp.overlap_low) << ","
     << format_double(cmp.overlap_high) << "\n";
  return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace fovopt
