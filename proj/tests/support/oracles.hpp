#pragma once

// Independent reference computations used by the unit tests and the
// acceptance runner. Nothing here calls into the solver or the planner.

#include <cmath>
#include <functional>
#include <random>

#include <Eigen/Dense>

#include "doormpc/ddp_solver.hpp"
#include "doormpc/integrators.hpp"
#include "doormpc/kinematics.hpp"
#include "doormpc/plant_dynamics.hpp"
#include "doormpc/types.hpp"

namespace doormpc::oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Central-difference Jacobian of f at x.
inline MatrixXd central_jacobian(const std::function<VectorXd(const VectorXd&)>& f,
                                 const VectorXd& x, double h = 1e-6) {
  const VectorXd f0 = f(x);
  MatrixXd j(f0.size(), x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    VectorXd xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    j.col(k) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return j;
}

/// |a - b| / max(|b|, floor), Frobenius norms.
inline double rel_err(const MatrixXd& a, const MatrixXd& b, double floor = 1e-6) {
  return (a - b).norm() / std::max(b.norm(), floor);
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline VectorXd uniform_vec(std::mt19937_64& rng, int n, double lo, double hi) {
  VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = uniform(rng, lo, hi);
  return v;
}

/// Random planner state away from gimbal lock with a generic arm pose.
inline PlannerState random_planner_state(std::mt19937_64& rng) {
  PlannerState x;
  x << uniform(rng, -0.6, 0.6), uniform(rng, -0.6, 0.6), uniform(rng, -kPi, kPi),
      uniform(rng, -kPi, kPi), uniform(rng, -1.0, 1.0), uniform(rng, -kPi, kPi),
      uniform(rng, -2.5, 2.5), uniform(rng, -2.5, 2.5), uniform(rng, -2.5, 2.5);
  return x;
}

// ---------------------------------------------------------------------------
// Linear-quadratic reference problem.

/// x_{k+1} = A x_k + B u_k + c.
class AffineDynamics final : public DiscreteDynamics {
 public:
  AffineDynamics(MatrixXd a, MatrixXd b, VectorXd c)
      : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)) {}
  int state_dim() const override { return static_cast<int>(a_.rows()); }
  int input_dim() const override { return static_cast<int>(b_.cols()); }
  VectorXd step(const VectorXd& x, const VectorXd& u) const override {
    return a_ * x + b_ * u + c_;
  }
  void linearize(const VectorXd&, const VectorXd&, MatrixXd& a, MatrixXd& b) const override {
    a = a_;
    b = b_;
  }
  const MatrixXd& a() const { return a_; }
  const MatrixXd& b() const { return b_; }
  const VectorXd& c() const { return c_; }

 private:
  MatrixXd a_, b_;
  VectorXd c_;
};

struct LqInstance {
  std::shared_ptr<AffineDynamics> dynamics;
  OcpProblem problem;
  VectorXd x0;
};

/// Random stable-ish affine LQ instance with random references.
inline LqInstance random_lq(std::mt19937_64& rng, int nx, int nu, int horizon) {
  MatrixXd a = MatrixXd::Identity(nx, nx) + 0.1 * uniform_vec(rng, nx * nx, -1, 1).reshaped(nx, nx);
  MatrixXd b = 0.2 * uniform_vec(rng, nx * nu, -1, 1).reshaped(nx, nu);
  VectorXd c = 0.05 * uniform_vec(rng, nx, -1, 1);
  LqInstance lq;
  lq.dynamics = std::make_shared<AffineDynamics>(a, b, c);
  OcpProblem& p = lq.problem;
  p.horizon = horizon;
  p.dt = 0.05;
  p.dynamics = lq.dynamics;
  p.running_state_weight = uniform_vec(rng, nx, 0.5, 5.0);
  p.running_input_weight = uniform_vec(rng, nu, 0.1, 2.0);
  p.terminal_state_weight = uniform_vec(rng, nx, 1.0, 10.0);
  for (int i = 0; i <= horizon; ++i) p.state_reference.push_back(uniform_vec(rng, nx, -1, 1));
  for (int i = 0; i < horizon; ++i) p.input_reference.push_back(uniform_vec(rng, nu, -1, 1));
  lq.x0 = uniform_vec(rng, nx, -1, 1);
  return lq;
}

/// Cost of a trajectory written out directly from the problem definition.
inline double lq_cost(const LqInstance& lq, const std::vector<VectorXd>& xs,
                      const std::vector<VectorXd>& us) {
  const OcpProblem& p = lq.problem;
  double j = 0.0;
  for (int i = 0; i < p.horizon; ++i) {
    const VectorXd dx = xs[i] - p.state_reference[i];
    const VectorXd du = us[i] - p.input_reference[i];
    j += p.dt * 0.5 * (dx.transpose() * p.running_state_weight.asDiagonal() * dx +
                       du.transpose() * p.running_input_weight.asDiagonal() * du)(0);
  }
  const VectorXd dn = xs[p.horizon] - p.state_reference[p.horizon];
  j += 0.5 * (dn.transpose() * p.terminal_state_weight.asDiagonal() * dn)(0);
  return j;
}

struct LqSolution {
  std::vector<VectorXd> states;
  std::vector<VectorXd> inputs;
  double cost{0.0};
};

/// Finite-horizon discrete Riccati recursion for the affine problem, with
/// the value function V_k(x) = 1/2 x'P x + p'x.
inline LqSolution riccati_solve(const LqInstance& lq) {
  const OcpProblem& pr = lq.problem;
  const MatrixXd& a = lq.dynamics->a();
  const MatrixXd& b = lq.dynamics->b();
  const VectorXd& c = lq.dynamics->c();
  const int n = pr.horizon;
  const MatrixXd q = pr.dt * pr.running_state_weight.asDiagonal().toDenseMatrix();
  const MatrixXd r = pr.dt * pr.running_input_weight.asDiagonal().toDenseMatrix();

  MatrixXd p = pr.terminal_state_weight.asDiagonal();
  VectorXd pv = -(p * pr.state_reference[n]);
  std::vector<MatrixXd> gain_k(n);
  std::vector<VectorXd> gain_f(n);
  for (int i = n - 1; i >= 0; --i) {
    const MatrixXd huu = r + b.transpose() * p * b;
    const MatrixXd hux = b.transpose() * p * a;
    const VectorXd hu = -r * pr.input_reference[i] + b.transpose() * (p * c + pv);
    const Eigen::LDLT<MatrixXd> ldlt(huu);
    gain_k[i] = -ldlt.solve(hux);
    gain_f[i] = -ldlt.solve(hu);
    const MatrixXd acl = a + b * gain_k[i];
    const VectorXd ccl = b * gain_f[i] + c;
    const MatrixXd p_next = q + gain_k[i].transpose() * r * gain_k[i] + acl.transpose() * p * acl;
    const VectorXd pv_next = -q * pr.state_reference[i] +
                             gain_k[i].transpose() * r * (gain_f[i] - pr.input_reference[i]) +
                             acl.transpose() * (p * ccl + pv);
    p = 0.5 * (p_next + p_next.transpose());
    pv = pv_next;
  }
  LqSolution s;
  s.states.push_back(lq.x0);
  for (int i = 0; i < n; ++i) {
    s.inputs.push_back(gain_k[i] * s.states[i] + gain_f[i]);
    s.states.push_back(a * s.states[i] + b * s.inputs[i] + c);
  }
  s.cost = lq_cost(lq, s.states, s.inputs);
  return s;
}

/// Same problem solved as one dense least-squares system in the stacked
/// inputs.
inline LqSolution batch_qp_solve(const LqInstance& lq) {
  const OcpProblem& pr = lq.problem;
  const MatrixXd& a = lq.dynamics->a();
  const MatrixXd& b = lq.dynamics->b();
  const VectorXd& c = lq.dynamics->c();
  const int n = pr.horizon;
  const int nx = static_cast<int>(a.rows());
  const int nu = static_cast<int>(b.cols());
  // x_k = F_k x0 + G_k U + h_k
  std::vector<MatrixXd> f(n + 1), g(n + 1);
  std::vector<VectorXd> h(n + 1);
  f[0] = MatrixXd::Identity(nx, nx);
  g[0] = MatrixXd::Zero(nx, n * nu);
  h[0] = VectorXd::Zero(nx);
  for (int k = 0; k < n; ++k) {
    f[k + 1] = a * f[k];
    g[k + 1] = a * g[k];
    g[k + 1].block(0, k * nu, nx, nu) += b;
    h[k + 1] = a * h[k] + c;
  }
  MatrixXd hess = MatrixXd::Zero(n * nu, n * nu);
  VectorXd grad = VectorXd::Zero(n * nu);
  for (int k = 0; k <= n; ++k) {
    const VectorXd w = k < n ? VectorXd(pr.dt * pr.running_state_weight)
                             : VectorXd(pr.terminal_state_weight);
    const VectorXd off = f[k] * lq.x0 + h[k] - pr.state_reference[k];
    hess += g[k].transpose() * w.asDiagonal() * g[k];
    grad += g[k].transpose() * w.asDiagonal() * off;
    if (k < n) {
      const VectorXd wr = pr.dt * pr.running_input_weight;
      hess.block(k * nu, k * nu, nu, nu) += wr.asDiagonal();
      grad.segment(k * nu, nu) -= wr.asDiagonal() * pr.input_reference[k];
    }
  }
  const VectorXd u = -hess.ldlt().solve(grad);
  LqSolution s;
  s.states.push_back(lq.x0);
  for (int k = 0; k < n; ++k) {
    s.inputs.push_back(u.segment(k * nu, nu));
    s.states.push_back(a * s.states[k] + b * s.inputs[k] + c);
  }
  s.cost = lq_cost(lq, s.states, s.inputs);
  return s;
}

// ---------------------------------------------------------------------------
// Attached-system helpers.

/// Body torque and door acceleration that keep the attitude still
/// (Phi_ddot = 0) for a given thrust, from M q_ddot + C q_dot + G = tau.
struct AttitudeHold {
  Vec3 torque;
  double alpha_ddot;
};

inline AttitudeHold attitude_hold(const Vec4& q, const Vec4& qd, const ArmConfig& h,
                                  double thrust, const SystemModel& model) {
  const Mat4 m = mass_matrix(q, h, model);
  const Mat4 cmat = coriolis(q, qd, h, model);
  const Vec4 g = gravity_vector(q, h, model);
  PlantInput u_thrust = PlantInput::Zero();
  u_thrust[0] = thrust;
  const Vec4 tau_f = generalized_forces(q, h, u_thrust, model);
  // Columns: alpha_ddot, T_x, T_y, T_z. Generalized torque of T is linear.
  Mat4 lhs;
  lhs.col(0) = m.col(3);
  for (int i = 0; i < 3; ++i) {
    PlantInput ut = PlantInput::Zero();
    ut[1 + i] = 1.0;
    lhs.col(1 + i) = -generalized_forces(q, h, ut, model);
  }
  const Vec4 rhs = tau_f - cmat * qd - g;
  const Vec4 sol = lhs.fullPivLu().solve(rhs);
  return {sol.tail<3>(), sol[0]};
}

// ---------------------------------------------------------------------------
// Free-flying vehicle (door detached) for controller tuning checks.

/// State [P(3), V(3), Euler(3), Omega(3)].
using FreeFlightState = Eigen::Matrix<double, 12, 1>;

inline FreeFlightState free_flight_deriv(const FreeFlightState& s, double thrust,
                                         const Vec3& torque, const VehicleParams& v) {
  const EulerZYX att{s[6], s[7], s[8]};
  const Mat3 r = euler_to_rot(att);
  const Vec3 om = s.segment<3>(9);
  FreeFlightState d;
  d.segment<3>(0) = s.segment<3>(3);
  d.segment<3>(3) = thrust / v.mass * r.col(2) - v.gravity * Vec3::UnitZ();
  d.segment<3>(6) = euler_rate_map(att) * om;
  d.segment<3>(9) = v.inertia.ldlt().solve(torque - om.cross(v.inertia * om));
  return d;
}

inline FreeFlightState free_flight_step(const FreeFlightState& s, double thrust,
                                        const Vec3& torque, const VehicleParams& v,
                                        double dt) {
  return rk4(s, dt, [&](const FreeFlightState& y) {
    return free_flight_deriv(y, thrust, torque, v);
  });
}

}  // namespace doormpc::oracle
