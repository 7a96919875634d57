#include "doormpc/scenario_runner.hpp"

#include <algorithm>
#include <cmath>
#include <condition_variable>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <thread>

#include "doormpc/kinematics.hpp"
#include "doormpc/plant_dynamics.hpp"

namespace doormpc {

PlantState initial_plant_state(const ScenarioConfig& cfg) {
  PlantState x = PlantState::Zero();
  x[3] = cfg.target.initial_alpha;
  x[plant_idx::kQdot + 3] = cfg.target.initial_alpha_rate;
  x.segment<4>(plant_idx::kArm) = arm_of(cfg.target.final_state);
  return x;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

namespace {

// Single-slot handoff between two threads.
template <typename T>
class Mailbox {
 public:
  void put(T value) {
    {
      std::lock_guard lock(mu_);
      slot_ = std::move(value);
    }
    cv_.notify_one();
  }
  std::optional<T> take() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return slot_.has_value() || closed_; });
    if (!slot_) return std::nullopt;
    std::optional<T> out = std::move(slot_);
    slot_.reset();
    return out;
  }
  void close() {
    {
      std::lock_guard lock(mu_);
      closed_ = true;
    }
    cv_.notify_all();
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::optional<T> slot_;
  bool closed_{false};
};

struct Aborted {
  std::string reason;
};

// Plant side of the loop: integrates between planner ticks and keeps the
// per-step statistics.
class PlantSide {
 public:
  explicit PlantSide(const ScenarioConfig& cfg)
      : cfg_(cfg),
        x_(initial_plant_state(cfg)),
        rng_(cfg.simulation.seed),
        substeps_(static_cast<int>(std::lround(cfg.planner.dt / cfg.simulation.plant_dt))) {
    log_.records.reserve(static_cast<std::size_t>(tick_count()));
    observe(x_);
  }

  int tick_count() const {
    return static_cast<int>(std::floor(cfg_.simulation.duration / cfg_.planner.dt + 1e-9)) + 1;
  }

  Measurement measure() const { return measure_plant(x_, arm_rate_, cfg_.model); }

  void record(int k, const TickResult& tick) {
    const TrackingOutput ctrl =
        tracking_controller(tick.setpoint, measure(), cfg_.model.vehicle, cfg_.controller);
    TickRecord r;
    r.time = k * cfg_.planner.dt;
    r.plant = x_;
    r.planner = tick.conversion.state;
    r.predicted = tick.predicted;
    r.setpoint = tick.setpoint;
    r.input = ctrl.input;
    r.constraints = constraint_values(planner_view(x_), cfg_.model.door, cfg_.model.arm);
    r.iterations = tick.solve.iterations;
    r.outer_iterations = tick.solve.outer_iterations;
    r.latency_ms = tick.latency_ms;
    r.violation = tick.solve.max_violation;
    r.cost = tick.solve.cost;
    r.converged = tick.solve.converged;
    r.degraded = tick.degraded;
    log_.records.push_back(r);
    log_.latencies_ms.push_back(tick.latency_ms);
    if (tick.conversion.attachment_residual > cfg_.simulation.attachment_bound) {
      std::ostringstream os;
      os << "attachment residual " << tick.conversion.attachment_residual
         << " m exceeds bound at t=" << r.time;
      throw Aborted{os.str()};
    }
  }

  void advance(const Setpoint& sp) {
    const double a = cfg_.simulation.disturbance;
    std::uniform_real_distribution<double> noise(-a, a);
    for (int s = 0; s < substeps_; ++s) {
      const TrackingOutput ctrl =
          tracking_controller(sp, measure(), cfg_.model.vehicle, cfg_.controller);
      arm_rate_ = ctrl.input.segment<4>(plant_idx::kArmRate);
      Vec4 tau = Vec4::Zero();
      if (a > 0.0)
        for (int i = 0; i < 4; ++i) tau[i] = noise(rng_);
      try {
        x_ = rk4_step(x_, ctrl.input, cfg_.simulation.plant_dt, cfg_.model, tau);
      } catch (const SingularityError& e) {
        throw Aborted{std::string("plant singular: ") + e.what()};
      }
      ++log_.plant_steps;
      if (!x_.allFinite() || x_.cwiseAbs().maxCoeff() > cfg_.simulation.divergence_bound)
        throw Aborted{"plant state diverged"};
      observe(x_);
    }
  }

  RunLog finish(std::optional<std::string> abort_reason) {
    if (abort_reason) {
      log_.aborted = true;
      log_.abort_reason = *abort_reason;
    }
    return std::move(log_);
  }

 private:
  void observe(const PlantState& x) {
    log_.max_constraints = log_.max_constraints.cwiseMax(
        constraint_values(planner_view(x), cfg_.model.door, cfg_.model.arm));
  }

  const ScenarioConfig& cfg_;
  PlantState x_;
  ArmConfig arm_rate_{ArmConfig::Zero()};
  std::mt19937_64 rng_;
  int substeps_;
  RunLog log_;
};

RunLog run_stepped(const ScenarioConfig& cfg) {
  PlantSide plant(cfg);
  MpcPlanner planner(cfg.model, cfg.planner, cfg.target);
  const int ticks = plant.tick_count();
  try {
    for (int k = 0; k < ticks; ++k) {
      const TickResult tick = planner.tick(plant.measure());
      plant.record(k, tick);
      if (k + 1 < ticks) plant.advance(tick.setpoint);
    }
  } catch (const Aborted& a) {
    return plant.finish(a.reason);
  } catch (const SingularityError& e) {
    return plant.finish(std::string("planner singular: ") + e.what());
  }
  return plant.finish(std::nullopt);
}

RunLog run_threaded(const ScenarioConfig& cfg) {
  PlantSide plant(cfg);
  const int ticks = plant.tick_count();
  Mailbox<Measurement> measurements;
  Mailbox<TickResult> results;
  std::optional<std::string> planner_error;

  std::thread mpc([&] {
    MpcPlanner planner(cfg.model, cfg.planner, cfg.target);
    while (auto m = measurements.take()) {
      try {
        results.put(planner.tick(*m));
      } catch (const std::exception& e) {
        planner_error = std::string("planner failed: ") + e.what();
        results.close();
        return;
      }
    }
  });

  std::optional<std::string> reason;
  try {
    for (int k = 0; k < ticks; ++k) {
      measurements.put(plant.measure());
      const std::optional<TickResult> tick = results.take();
      if (!tick) break;
      plant.record(k, *tick);
      if (k + 1 < ticks) plant.advance(tick->setpoint);
    }
  } catch (const Aborted& a) {
    reason = a.reason;
  }
  measurements.close();
  mpc.join();
  if (!reason && planner_error) reason = planner_error;
  return plant.finish(reason);
}

}  // namespace

RunLog run_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  return cfg.simulation.threaded ? run_threaded(cfg) : run_stepped(cfg);
}

BenchStats bench_scenario(const ScenarioConfig& cfg) {
  const RunLog log = run_scenario(cfg);
  BenchStats b;
  // The first tick is a cold solve; the distribution covers warm starts.
  b.latencies_ms.assign(log.latencies_ms.begin() + (log.latencies_ms.size() > 1 ? 1 : 0),
                        log.latencies_ms.end());
  b.ticks = static_cast<int>(log.records.size());
  for (const TickRecord& r : log.records) b.degraded_ticks += r.degraded ? 1 : 0;
  b.median_ms = percentile(b.latencies_ms, 0.5);
  b.p95_ms = percentile(b.latencies_ms, 0.95);
  b.max_ms = b.latencies_ms.empty()
                 ? 0.0
                 : *std::max_element(b.latencies_ms.begin(), b.latencies_ms.end());
  return b;
}

}  // namespace doormpc
