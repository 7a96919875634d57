#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "doormpc/scenario_runner.hpp"

namespace doormpc {

namespace {

constexpr const char* kStateNames[9] = {"roll_rad",  "pitch_rad", "yaw_rad",
                                        "alpha_rad", "alpha_rate_rad_s", "eta1_rad",
                                        "eta2_rad",  "eta3_rad",  "eta4_rad"};

std::vector<std::string> build_columns() {
  std::vector<std::string> c{"time_s"};
  for (const char* n : {"roll_rad", "pitch_rad", "yaw_rad", "alpha_rad", "roll_rate_rad_s",
                        "pitch_rate_rad_s", "yaw_rate_rad_s", "alpha_rate_rad_s",
                        "eta1_rad", "eta2_rad", "eta3_rad", "eta4_rad"})
    c.push_back(std::string("plant_") + n);
  for (const char* n : kStateNames) c.push_back(std::string("planner_") + n);
  for (const char* n : kStateNames) c.push_back(std::string("predicted_") + n);
  for (const char* n : {"px_m", "py_m", "pz_m", "vx_m_s", "vy_m_s", "vz_m_s", "yaw_rad",
                        "eta1_rate_rad_s", "eta2_rate_rad_s", "eta3_rate_rad_s",
                        "eta4_rate_rad_s"})
    c.push_back(std::string("setpoint_") + n);
  for (const char* n : {"thrust_N", "torque_x_Nm", "torque_y_Nm", "torque_z_Nm",
                        "eta1_rate_rad_s", "eta2_rate_rad_s", "eta3_rate_rad_s",
                        "eta4_rate_rad_s"})
    c.push_back(std::string("input_") + n);
  for (std::string_view n : ConstraintStack::kLabels)
    c.push_back("c_" + std::string(n) + "_m");
  for (const char* n : {"iterations", "outer_iterations", "latency_ms", "violation_m",
                        "cost", "converged", "degraded"})
    c.push_back(n);
  return c;
}

const std::vector<std::string>& columns() {
  static const std::vector<std::string> c = build_columns();
  return c;
}

std::vector<double> flatten(const TickRecord& r, bool timing) {
  std::vector<double> v;
  v.reserve(columns().size());
  auto put = [&](const auto& vec) {
    for (Eigen::Index i = 0; i < vec.size(); ++i) v.push_back(vec[i]);
  };
  v.push_back(r.time);
  put(r.plant);
  put(r.planner);
  put(r.predicted);
  put(r.setpoint.position);
  put(r.setpoint.velocity);
  v.push_back(r.setpoint.yaw);
  put(r.setpoint.arm_rate);
  put(r.input);
  put(r.constraints);
  v.push_back(r.iterations);
  v.push_back(r.outer_iterations);
  v.push_back(timing ? r.latency_ms : 0.0);
  v.push_back(r.violation);
  v.push_back(r.cost);
  v.push_back(r.converged ? 1.0 : 0.0);
  v.push_back(r.degraded ? 1.0 : 0.0);
  return v;
}

TickRecord unflatten(const std::vector<double>& v) {
  if (v.size() != columns().size())
    throw std::runtime_error("log row has " + std::to_string(v.size()) +
                             " fields, expected " + std::to_string(columns().size()));
  std::size_t i = 0;
  auto get = [&](auto& vec) {
    for (Eigen::Index j = 0; j < vec.size(); ++j) vec[j] = v[i++];
  };
  TickRecord r;
  r.time = v[i++];
  get(r.plant);
  get(r.planner);
  get(r.predicted);
  get(r.setpoint.position);
  get(r.setpoint.velocity);
  r.setpoint.yaw = v[i++];
  get(r.setpoint.arm_rate);
  get(r.input);
  get(r.constraints);
  r.iterations = static_cast<int>(v[i++]);
  r.outer_iterations = static_cast<int>(v[i++]);
  r.latency_ms = v[i++];
  r.violation = v[i++];
  r.cost = v[i++];
  r.converged = v[i++] != 0.0;
  r.degraded = v[i++] != 0.0;
  return r;
}

void append_number(std::string& out, double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  out.append(buf, res.ptr);
}

double parse_number(std::string_view s) {
  double x = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::runtime_error("bad number in log: '" + std::string(s) + "'");
  return x;
}

}  // namespace

std::vector<std::string> log_columns() { return columns(); }

std::string format_log(const RunLog& log, const LogOptions& opts) {
  std::string out;
  const auto& cols = columns();
  if (opts.format == LogFormat::kCsv) {
    for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + cols[i];
    out += '\n';
    for (const TickRecord& r : log.records) {
      const std::vector<double> v = flatten(r, opts.include_timing);
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        append_number(out, v[i]);
      }
      out += '\n';
    }
  } else {
    for (const TickRecord& r : log.records) {
      const std::vector<double> v = flatten(r, opts.include_timing);
      nlohmann::ordered_json row;
      for (std::size_t i = 0; i < v.size(); ++i) row[cols[i]] = v[i];
      out += row.dump();
      out += '\n';
    }
  }
  return out;
}

void write_log(const RunLog& log, const std::string& path, const LogOptions& opts) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << format_log(log, opts);
  if (!f) throw std::runtime_error("write to " + path + " failed");
}

RunLog parse_log(const std::string& text, LogFormat format) {
  RunLog log;
  std::istringstream in(text);
  std::string line;
  const auto& cols = columns();
  if (format == LogFormat::kCsv) {
    if (!std::getline(in, line)) throw std::runtime_error("empty log");
    std::string expected;
    for (std::size_t i = 0; i < cols.size(); ++i) expected += (i ? "," : "") + cols[i];
    if (line != expected) throw std::runtime_error("unexpected CSV header");
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::vector<double> v;
      std::string_view rest(line);
      while (true) {
        const auto comma = rest.find(',');
        v.push_back(parse_number(rest.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
      }
      log.records.push_back(unflatten(v));
    }
  } else {
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto row = nlohmann::ordered_json::parse(line);
      std::vector<double> v;
      v.reserve(cols.size());
      for (const std::string& c : cols) v.push_back(row.at(c).get<double>());
      log.records.push_back(unflatten(v));
    }
  }
  return log;
}

RunLog read_log(const std::string& path, LogFormat format) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_log(buf.str(), format);
}

}  // namespace doormpc
