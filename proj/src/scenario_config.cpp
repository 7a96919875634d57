#include "doormpc/scenario_config.hpp"

#include <charconv>
#include <fstream>
#include <regex>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace doormpc {

ConfigError::ConfigError(std::string field, int line, const std::string& what)
    : std::runtime_error(
          (line > 0 ? "line " + std::to_string(line) + ": " : std::string()) +
          field + ": " + what),
      field_(std::move(field)),
      line_(line) {}

double parse_angle_expression(const std::string& text) {
  // Plain number first.
  {
    const char* b = text.data();
    const char* e = b + text.size();
    while (b < e && std::isspace(static_cast<unsigned char>(*b))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(e[-1]))) --e;
    double v = 0.0;
    const char* start = (b < e && *b == '+') ? b + 1 : b;
    auto [ptr, ec] = std::from_chars(start, e, v);
    if (ec == std::errc() && ptr == e && start != e) return v;
  }
  static const std::regex kPiExpr(
      R"(^\s*([+-]?)\s*([0-9]*\.?[0-9]+(?:[eE][+-]?[0-9]+)?)?\s*\*?\s*pi\s*(?:/\s*([0-9]*\.?[0-9]+))?\s*$)");
  std::smatch m;
  if (!std::regex_match(text, m, kPiExpr))
    throw std::invalid_argument("not a number or multiple of pi: '" + text + "'");
  double coef = m[2].matched ? std::stod(m[2].str()) : 1.0;
  if (m[1].str() == "-") coef = -coef;
  double v = coef * kPi;
  if (m[3].matched) v /= std::stod(m[3].str());
  return v;
}

namespace {

int line_of(const YAML::Node& n) {
  const YAML::Mark mark = n.Mark();
  return mark.line >= 0 ? mark.line + 1 : 0;
}

std::string join(const std::string& a, const std::string& b) {
  return a.empty() ? b : a + "." + b;
}

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <typename V>
std::string fmt_vec(const V& v) {
  std::string s = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
  return s + "]";
}

// Walks one mapping, records which keys fell back to defaults.
class Section {
 public:
  Section(YAML::Node node, std::string path, std::vector<std::string>* log)
      : node_(std::move(node)), path_(std::move(path)), log_(log) {
    if (node_ && !node_.IsNull() && !node_.IsMap())
      throw ConfigError(path_, line_of(node_), "expected a mapping");
  }

  Section child(const std::string& key) const {
    return Section(present() ? node_[key] : YAML::Node(), join(path_, key), log_);
  }

  bool present() const { return node_ && !node_.IsNull(); }
  bool has(const std::string& key) const { return present() && node_[key]; }
  int line() const { return present() ? line_of(node_) : 0; }
  const std::string& path() const { return path_; }

  double scalar(const std::string& key, double fallback) const {
    if (!has(key)) {
      log_->push_back(join(path_, key) + " = " + fmt(fallback));
      return fallback;
    }
    return to_double(node_[key], join(path_, key));
  }

  double required(const std::string& key) const {
    if (!has(key))
      throw ConfigError(join(path_, key), line(), "required field is missing");
    return to_double(node_[key], join(path_, key));
  }

  std::string text(const std::string& key, const std::string& fallback) const {
    if (!has(key)) {
      log_->push_back(join(path_, key) + " = " + fallback);
      return fallback;
    }
    return node_[key].as<std::string>();
  }

  bool flag(const std::string& key, bool fallback) const {
    if (!has(key)) {
      log_->push_back(join(path_, key) + " = " + (fallback ? "true" : "false"));
      return fallback;
    }
    try {
      return node_[key].as<bool>();
    } catch (const YAML::Exception&) {
      throw ConfigError(join(path_, key), line_of(node_[key]), "expected true/false");
    }
  }

  template <int N>
  Eigen::Matrix<double, N, 1> vector(const std::string& key,
                                     const Eigen::Matrix<double, N, 1>& fallback) const {
    if (!has(key)) {
      log_->push_back(join(path_, key) + " = " + fmt_vec(fallback));
      return fallback;
    }
    const YAML::Node seq = node_[key];
    const std::string p = join(path_, key);
    if (!seq.IsSequence() || static_cast<int>(seq.size()) != N)
      throw ConfigError(p, line_of(seq),
                        "expected a list of " + std::to_string(N) + " numbers");
    Eigen::Matrix<double, N, 1> v;
    for (int i = 0; i < N; ++i)
      v[i] = to_double(seq[i], p + "[" + std::to_string(i) + "]");
    return v;
  }

  void reject_unknown(std::initializer_list<const char*> known) const {
    if (!present()) return;
    for (const auto& kv : node_) {
      const std::string k = kv.first.as<std::string>();
      bool ok = false;
      for (const char* name : known) ok = ok || k == name;
      if (!ok) throw ConfigError(join(path_, k), line_of(kv.first), "unknown key");
    }
  }

 private:
  static double to_double(const YAML::Node& n, const std::string& path) {
    if (!n.IsScalar()) throw ConfigError(path, line_of(n), "expected a number");
    try {
      return parse_angle_expression(n.Scalar());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(path, line_of(n), e.what());
    }
  }

  YAML::Node node_;
  std::string path_;
  std::vector<std::string>* log_;
};

void read_vehicle(const Section& s, ScenarioConfig& c) {
  s.reject_unknown({"m_A", "gravity", "inertia", "R_A"});
  VehicleParams& v = c.model.vehicle;
  v.mass = s.required("m_A");
  v.gravity = s.scalar("gravity", v.gravity);
  const Vec3 diag = s.vector<3>("inertia", Vec3(v.inertia.diagonal()));
  v.inertia = diag.asDiagonal();
  c.model.door.vehicle_radius = s.scalar("R_A", c.model.door.vehicle_radius);
}

void read_door(const Section& s, ScenarioConfig& c) {
  s.reject_unknown({"hinge_base", "D_V", "D_H", "width", "height", "inertia"});
  DoorGeometry& d = c.model.door;
  d.hinge_base = s.vector<3>("hinge_base", d.hinge_base);
  d.dv = s.required("D_V");
  d.dh = s.scalar("D_H", d.dh);
  d.width = s.required("width");
  d.height = s.scalar("height", d.height);
  d.inertia = s.required("inertia");
}

void read_arm(const Section& s, ScenarioConfig& c) {
  s.reject_unknown({"link_lengths", "mount_offset", "joint_lower", "joint_upper"});
  ArmGeometry& a = c.model.arm;
  const Vec4 len = s.vector<4>("link_lengths",
                               Vec4(a.link_lengths[0], a.link_lengths[1],
                                    a.link_lengths[2], a.link_lengths[3]));
  a.mount_offset = s.vector<3>("mount_offset", a.mount_offset);
  Vec4 lo, hi;
  for (int i = 0; i < 4; ++i) {
    lo[i] = a.joint_limits[i].first;
    hi[i] = a.joint_limits[i].second;
  }
  lo = s.vector<4>("joint_lower", lo);
  hi = s.vector<4>("joint_upper", hi);
  for (int i = 0; i < 4; ++i) {
    a.link_lengths[i] = len[i];
    if (!(lo[i] < hi[i]))
      throw ConfigError(s.path() + ".joint_lower", s.line(),
                        "lower limit must be below upper limit");
    a.joint_limits[i] = {lo[i], hi[i]};
  }
}

void read_mpc(const Section& s, ScenarioConfig& c) {
  s.reject_unknown({"dt", "horizon", "Q", "L", "R", "constraint_margin",
                    "setpoint_index", "attachment_tolerance"});
  PlannerConfig& p = c.planner;
  p.dt = s.scalar("dt", p.dt);
  const double horizon = s.scalar("horizon", p.horizon);
  if (horizon != static_cast<int>(horizon))
    throw ConfigError(s.path() + ".horizon", s.line(), "must be an integer");
  p.horizon = static_cast<int>(horizon);
  p.running_weight = s.vector<9>("Q", p.running_weight);
  p.terminal_weight = s.vector<9>("L", p.running_weight);
  p.input_weight = s.vector<8>("R", p.input_weight);
  p.constraint_margin = s.scalar("constraint_margin", p.constraint_margin);
  p.setpoint_index = static_cast<int>(s.scalar("setpoint_index", p.setpoint_index));
  p.attachment_tolerance = s.scalar("attachment_tolerance", p.attachment_tolerance);
}

void read_solver(const Section& s, ScenarioConfig& c) {
  s.reject_unknown({"max_outer_iterations", "max_inner_iterations", "penalty_init",
                    "penalty_growth", "constraint_tolerance", "cost_tolerance",
                    "regularization_init", "regularization_min",
                    "regularization_max", "regularization_increase",
                    "regularization_decrease", "line_search_steps", "armijo"});
  SolverSettings& o = c.planner.solver;
  o.max_outer_iterations =
      static_cast<int>(s.scalar("max_outer_iterations", o.max_outer_iterations));
  o.max_inner_iterations =
      static_cast<int>(s.scalar("max_inner_iterations", o.max_inner_iterations));
  o.penalty_init = s.scalar("penalty_init", o.penalty_init);
  o.penalty_growth = s.scalar("penalty_growth", o.penalty_growth);
  o.constraint_tolerance = s.scalar("constraint_tolerance", o.constraint_tolerance);
  o.cost_tolerance = s.scalar("cost_tolerance", o.cost_tolerance);
  o.regularization_init = s.scalar("regularization_init", o.regularization_init);
  o.regularization_min = s.scalar("regularization_min", o.regularization_min);
  o.regularization_max = s.scalar("regularization_max", o.regularization_max);
  o.regularization_increase =
      s.scalar("regularization_increase", o.regularization_increase);
  o.regularization_decrease =
      s.scalar("regularization_decrease", o.regularization_decrease);
  o.line_search_steps =
      static_cast<int>(s.scalar("line_search_steps", o.line_search_steps));
  o.armijo = s.scalar("armijo", o.armijo);
}

void read_target(const Section& s, ScenarioConfig& c) {
  s.reject_unknown({"x_f", "alpha0", "alpha_rate0"});
  TargetSpec& t = c.target;
  t.final_state = s.vector<9>("x_f", t.final_state);
  t.initial_alpha = s.scalar("alpha0", t.initial_alpha);
  t.initial_alpha_rate = s.scalar("alpha_rate0", t.initial_alpha_rate);
}

void read_controller(const Section& s, ScenarioConfig& c) {
  s.reject_unknown({"kp_position", "kd_position", "kp_attitude", "kd_rate",
                    "max_thrust", "max_arm_rate"});
  TrackingGains& g = c.controller;
  g.kp_position = s.vector<3>("kp_position", g.kp_position);
  g.kd_position = s.vector<3>("kd_position", g.kd_position);
  g.kp_attitude = s.vector<3>("kp_attitude", g.kp_attitude);
  g.kd_rate = s.vector<3>("kd_rate", g.kd_rate);
  g.max_thrust = s.scalar("max_thrust", g.max_thrust);
  g.max_arm_rate = s.scalar("max_arm_rate", g.max_arm_rate);
}

void read_simulation(const Section& s, ScenarioConfig& c) {
  s.reject_unknown({"duration", "plant_dt", "seed", "disturbance",
                    "divergence_bound", "attachment_bound", "threaded"});
  SimulationSettings& m = c.simulation;
  m.duration = s.scalar("duration", m.duration);
  m.plant_dt = s.scalar("plant_dt", m.plant_dt);
  const double seed = s.scalar("seed", static_cast<double>(m.seed));
  if (seed < 0 || seed != static_cast<double>(static_cast<std::uint64_t>(seed)))
    throw ConfigError(s.path() + ".seed", s.line(), "must be a non-negative integer");
  m.seed = static_cast<std::uint64_t>(seed);
  m.disturbance = s.scalar("disturbance", m.disturbance);
  m.divergence_bound = s.scalar("divergence_bound", m.divergence_bound);
  m.attachment_bound = s.scalar("attachment_bound", m.attachment_bound);
  m.threaded = s.flag("threaded", m.threaded);
}

}  // namespace

void ScenarioConfig::validate() const {
  model.validate();
  planner.validate();
  controller.validate();
  if (!target.final_state.allFinite())
    throw InvalidParameter("target.x_f", "must be finite");
  if (!(simulation.duration >= 0.0))
    throw InvalidParameter("simulation.duration", "must be non-negative");
  if (!(simulation.plant_dt > 0.0) || simulation.plant_dt > planner.dt)
    throw InvalidParameter("simulation.plant_dt", "must lie in (0, mpc.dt]");
  const double ratio = planner.dt / simulation.plant_dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio)
    throw InvalidParameter("simulation.plant_dt", "must divide mpc.dt");
  if (simulation.disturbance < 0.0)
    throw InvalidParameter("simulation.disturbance", "must be non-negative");
  if (!(simulation.divergence_bound > 0.0))
    throw InvalidParameter("simulation.divergence_bound", "must be positive");
  if (!(simulation.attachment_bound > 0.0))
    throw InvalidParameter("simulation.attachment_bound", "must be positive");
}

ScenarioConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("<document>", e.mark.line + 1, e.msg);
  }
  ScenarioConfig c;
  std::vector<std::string>* log = &c.defaults_applied;
  const Section top(root, "", log);
  top.reject_unknown({"name", "vehicle", "door", "arm", "mpc", "solver", "target",
                      "controller", "simulation"});
  try {
    c.name = top.text("name", c.name);
    if (!top.has("vehicle")) throw ConfigError("vehicle.m_A", 0, "required field is missing");
    if (!top.has("door")) throw ConfigError("door.D_V", 0, "required field is missing");
    read_vehicle(top.child("vehicle"), c);
    read_door(top.child("door"), c);
    read_arm(top.child("arm"), c);
    read_mpc(top.child("mpc"), c);
    read_solver(top.child("solver"), c);
    read_target(top.child("target"), c);
    read_controller(top.child("controller"), c);
    read_simulation(top.child("simulation"), c);
  } catch (const YAML::Exception& e) {
    throw ConfigError("<document>", e.mark.line + 1, e.msg);
  }
  try {
    c.validate();
  } catch (const InvalidParameter& e) {
    throw ConfigError(e.field(), 0, e.what());
  }
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, 0, "cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace doormpc
