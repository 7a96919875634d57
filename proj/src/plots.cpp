#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doormpc/kinematics.hpp"
#include "doormpc/scenario_runner.hpp"

namespace doormpc {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 320.0;
constexpr double kMargin = 50.0;
constexpr double kRadToDeg = 180.0 / kPi;

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

struct Axes {
  double x0, x1, y0, y1;
  double px(double x) const {
    return kMargin + (x - x0) / (x1 - x0) * (kWidth - 2 * kMargin);
  }
  double py(double y) const {
    return kHeight - kMargin - (y - y0) / (y1 - y0) * (kHeight - 2 * kMargin);
  }
};

std::string polyline(const Axes& ax, const std::vector<double>& t,
                     const std::vector<double>& y, const std::string& attrs) {
  std::string pts;
  for (std::size_t i = 0; i < t.size(); ++i)
    pts += num(ax.px(t[i])) + "," + num(ax.py(y[i])) + " ";
  return "  <polyline fill=\"none\" " + attrs + " points=\"" + pts + "\"/>\n";
}

void write_file(const std::filesystem::path& p, const std::string& body) {
  std::ofstream f(p);
  if (!f) throw std::runtime_error("cannot open " + p.string() + " for writing");
  f << body;
  if (!f) throw std::runtime_error("write to " + p.string() + " failed");
}

std::string header(double w, double h) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w) +
         "\" height=\"" + num(h) + "\" viewBox=\"0 0 " + num(w) + " " + num(h) +
         "\">\n  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

std::string state_panel(const std::string& label, const std::string& unit,
                        const std::vector<double>& t, const std::vector<double>& measured,
                        const std::vector<double>& t_pred, const std::vector<double>& predicted,
                        double target) {
  double lo = target, hi = target;
  for (double v : measured) lo = std::min(lo, v), hi = std::max(hi, v);
  for (double v : predicted) lo = std::min(lo, v), hi = std::max(hi, v);
  if (hi - lo < 1e-6) lo -= 1.0, hi += 1.0;
  const double pad = 0.05 * (hi - lo);
  const double t_end = std::max(t.back(), t_pred.empty() ? 0.0 : t_pred.back());
  const Axes ax{t.front(), t_end > t.front() ? t_end : t.front() + 1.0, lo - pad, hi + pad};

  std::string s = header(kWidth, kHeight);
  s += "  <text x=\"" + num(kWidth / 2) + "\" y=\"20\" text-anchor=\"middle\">" + label +
       " [" + unit + "]</text>\n";
  s += "  <line class=\"axis\" x1=\"" + num(kMargin) + "\" y1=\"" + num(kHeight - kMargin) +
       "\" x2=\"" + num(kWidth - kMargin) + "\" y2=\"" + num(kHeight - kMargin) +
       "\" stroke=\"gray\"/>\n";
  s += "  <line class=\"axis\" x1=\"" + num(kMargin) + "\" y1=\"" + num(kMargin) + "\" x2=\"" +
       num(kMargin) + "\" y2=\"" + num(kHeight - kMargin) + "\" stroke=\"gray\"/>\n";
  s += "  <text x=\"" + num(kMargin - 4) + "\" y=\"" + num(ax.py(hi)) +
       "\" text-anchor=\"end\" font-size=\"10\">" + num(hi) + "</text>\n";
  s += "  <text x=\"" + num(kMargin - 4) + "\" y=\"" + num(ax.py(lo)) +
       "\" text-anchor=\"end\" font-size=\"10\">" + num(lo) + "</text>\n";
  s += "  <text x=\"" + num(kWidth - kMargin) + "\" y=\"" + num(kHeight - kMargin + 16) +
       "\" text-anchor=\"end\" font-size=\"10\">t = " + num(ax.x1) + " s</text>\n";
  s += "  <line class=\"target\" data-value-deg=\"" + num(target) + "\" x1=\"" +
       num(ax.px(ax.x0)) + "\" y1=\"" + num(ax.py(target)) + "\" x2=\"" + num(ax.px(ax.x1)) +
       "\" y2=\"" + num(ax.py(target)) + "\" stroke=\"green\"/>\n";
  s += polyline(ax, t_pred, predicted,
                "class=\"predicted\" stroke=\"red\" stroke-dasharray=\"6,4\"");
  s += polyline(ax, t, measured, "class=\"measured\" stroke=\"black\"");
  s += "</svg>\n";
  return s;
}

std::string xy_plot(const RunLog& log, const ScenarioConfig& cfg) {
  const DoorGeometry& door = cfg.model.door;
  const double alpha0 = cfg.target.initial_alpha;
  const Vec3 hinge = door.hinge_base;
  // Frame opening: from the hinge along the closed-door direction.
  const Vec3 closed_dir(std::cos(alpha0), std::sin(alpha0), 0.0);
  const Vec3 frame_end = hinge + door.width * closed_dir;

  std::vector<Vec3> centers;
  for (const TickRecord& r : log.records)
    centers.push_back(
        uam_position_from_door(r.plant[3], attitude_of(r.plant), arm_of(r.plant), door, cfg.model.arm));

  double xmin = std::min(hinge.x(), frame_end.x()) - door.width;
  double xmax = std::max(hinge.x(), frame_end.x()) + door.width;
  double ymin = std::min(hinge.y(), frame_end.y()) - door.width;
  double ymax = std::max(hinge.y(), frame_end.y()) + door.width;
  for (const Vec3& c : centers) {
    xmin = std::min(xmin, c.x() - door.vehicle_radius);
    xmax = std::max(xmax, c.x() + door.vehicle_radius);
    ymin = std::min(ymin, c.y() - door.vehicle_radius);
    ymax = std::max(ymax, c.y() + door.vehicle_radius);
  }
  const double span = std::max(xmax - xmin, ymax - ymin);
  const double size = 480.0;
  const double scale = (size - 2 * kMargin) / span;
  auto sx = [&](double x) { return kMargin + (x - xmin) * scale; };
  auto sy = [&](double y) { return size - kMargin - (y - ymin) * scale; };

  std::string s = header(size, size);
  s += "  <text x=\"" + num(size / 2) + "\" y=\"20\" text-anchor=\"middle\">top view [m]</text>\n";
  s += "  <line class=\"frame\" data-length=\"" + num(door.width) + "\" x1=\"" +
       num(sx(hinge.x())) + "\" y1=\"" + num(sy(hinge.y())) + "\" x2=\"" +
       num(sx(frame_end.x())) + "\" y2=\"" + num(sy(frame_end.y())) +
       "\" stroke=\"gray\" stroke-width=\"6\" stroke-opacity=\"0.4\"/>\n";
  auto door_line = [&](double alpha, const std::string& cls, const std::string& style) {
    const Vec3 end = hinge + door.width * Vec3(std::cos(alpha), std::sin(alpha), 0.0);
    s += "  <line class=\"" + cls + "\" data-length=\"" + num(door.width) +
         "\" data-alpha-rad=\"" + num(alpha) + "\" x1=\"" + num(sx(hinge.x())) + "\" y1=\"" +
         num(sy(hinge.y())) + "\" x2=\"" + num(sx(end.x())) + "\" y2=\"" + num(sy(end.y())) +
         "\" " + style + "/>\n";
  };
  if (!log.records.empty()) {
    door_line(log.records.front().plant[3], "door-initial", "stroke=\"gray\" stroke-dasharray=\"4,3\"");
    door_line(log.records.back().plant[3], "door", "stroke=\"saddlebrown\" stroke-width=\"3\"");
  }
  std::string pts;
  for (const Vec3& c : centers) pts += num(sx(c.x())) + "," + num(sy(c.y())) + " ";
  s += "  <polyline class=\"vehicle-path\" fill=\"none\" stroke=\"black\" points=\"" + pts + "\"/>\n";
  if (!centers.empty()) {
    const Vec3& c = centers.back();
    s += "  <circle class=\"vehicle\" data-radius=\"" + num(door.vehicle_radius) + "\" cx=\"" +
         num(sx(c.x())) + "\" cy=\"" + num(sy(c.y())) + "\" r=\"" +
         num(door.vehicle_radius * scale) + "\" fill=\"none\" stroke=\"blue\"/>\n";
  }
  s += "</svg>\n";
  return s;
}

}  // namespace

std::vector<std::string> emit_plots(const RunLog& log, const ScenarioConfig& cfg,
                                    const std::string& out_dir) {
  if (log.records.empty()) throw std::invalid_argument("emit_plots: empty log");
  std::filesystem::create_directories(out_dir);

  struct Panel {
    const char* file;
    const char* label;
    const char* unit;
    int planner_index;
    int plant_index;
  };
  const Panel panels[] = {
      {"roll.svg", "roll", "deg", 0, 0},       {"pitch.svg", "pitch", "deg", 1, 1},
      {"yaw.svg", "yaw", "deg", 2, 2},         {"alpha.svg", "alpha", "deg", 3, 3},
      {"alpha_rate.svg", "alpha rate", "deg/s", 4, 7},
      {"eta1.svg", "eta1", "deg", 5, 8},       {"eta2.svg", "eta2", "deg", 6, 9},
      {"eta3.svg", "eta3", "deg", 7, 10},      {"eta4.svg", "eta4", "deg", 8, 11},
  };

  const double dt = cfg.planner.dt;
  std::vector<double> t, t_pred;
  for (const TickRecord& r : log.records) {
    t.push_back(r.time);
    t_pred.push_back(r.time + dt);
  }
  std::vector<std::string> written;
  for (const Panel& p : panels) {
    std::vector<double> measured, predicted;
    for (const TickRecord& r : log.records) {
      measured.push_back(r.plant[p.plant_index] * kRadToDeg);
      predicted.push_back(r.predicted[p.planner_index] * kRadToDeg);
    }
    const double target = cfg.target.final_state[p.planner_index] * kRadToDeg;
    write_file(std::filesystem::path(out_dir) / p.file,
               state_panel(p.label, p.unit, t, measured, t_pred, predicted, target));
    written.emplace_back(p.file);
  }
  write_file(std::filesystem::path(out_dir) / "xy_geometry.svg", xy_plot(log, cfg));
  written.emplace_back("xy_geometry.svg");
  return written;
}

}  // namespace doormpc
