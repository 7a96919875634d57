#include "doormpc/ddp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace doormpc {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

void check_trajectories(const Trajectory& states, const Trajectory& inputs,
                        const OcpProblem& problem) {
  const auto n = static_cast<std::size_t>(problem.horizon);
  require(states.size() == n + 1, "state trajectory length must be horizon + 1");
  require(inputs.size() == n, "input trajectory length must be horizon");
  for (const auto& x : states) {
    require(x.size() == problem.state_dim(), "state dimension mismatch");
  }
  for (const auto& u : inputs) {
    require(u.size() == problem.input_dim(), "input dimension mismatch");
  }
}

// Penalty contribution (max(0, lambda + mu c)^2 - lambda^2) / (2 mu).
double penalty_term(const VectorXd& c, const VectorXd& lambda, double mu) {
  double sum = 0.0;
  for (Eigen::Index j = 0; j < c.size(); ++j) {
    const double v = std::max(0.0, lambda[j] + mu * c[j]);
    sum += (v * v - lambda[j] * lambda[j]) / (2.0 * mu);
  }
  return sum;
}

// Gauss-Newton gradient and Hessian of penalty_term.
void penalty_derivatives(const VectorXd& x, const OcpProblem& problem,
                         const VectorXd& lambda, double mu, VectorXd& grad,
                         MatrixXd& hess) {
  VectorXd c;
  MatrixXd jac;
  problem.constraints->evaluate(x, c, jac);
  for (Eigen::Index j = 0; j < c.size(); ++j) {
    const double v = lambda[j] + mu * c[j];
    if (v <= 0.0) continue;
    grad.noalias() += v * jac.row(j).transpose();
    hess.noalias() += mu * jac.row(j).transpose() * jac.row(j);
  }
}

}  // namespace

void OcpProblem::validate() const {
  require(horizon >= 1, "horizon must be >= 1");
  require(dt > 0.0, "dt must be positive");
  require(dynamics != nullptr, "dynamics handle is required");
  const int nx = state_dim();
  const int nu = input_dim();
  require(running_state_weight.size() == nx, "Q diagonal has wrong length");
  require(terminal_state_weight.size() == nx, "L diagonal has wrong length");
  require(running_input_weight.size() == nu, "R diagonal has wrong length");
  require((running_state_weight.array() >= 0.0).all(), "Q must be PSD");
  require((terminal_state_weight.array() >= 0.0).all(), "L must be PSD");
  require((running_input_weight.array() > 0.0).all(), "R must be PD");
  require(state_reference.size() == static_cast<std::size_t>(horizon) + 1,
          "state reference length must be horizon + 1");
  require(input_reference.size() == static_cast<std::size_t>(horizon),
          "input reference length must be horizon");
}

void SolverSettings::validate() const {
  require(max_outer_iterations > 0 && max_inner_iterations > 0,
          "iteration caps must be positive");
  require(penalty_init > 0.0, "initial penalty must be positive");
  require(penalty_growth > 1.0, "penalty growth must exceed 1");
  require(constraint_tolerance >= 0.0 && cost_tolerance >= 0.0,
          "tolerances must be non-negative");
  require(regularization_min > 0.0 &&
              regularization_max >= regularization_min &&
              regularization_init >= regularization_min,
          "regularization range is inconsistent");
  require(regularization_increase > 1.0 && regularization_decrease > 1.0,
          "regularization factors must exceed 1");
  require(line_search_steps > 0 && armijo > 0.0 && armijo < 1.0,
          "line search settings are inconsistent");
}

Multipliers Multipliers::zeros(const OcpProblem& problem, double penalty) {
  Multipliers m;
  m.lambda.assign(static_cast<std::size_t>(problem.horizon) + 1,
                  VectorXd::Zero(problem.constraint_dim()));
  m.penalty = penalty;
  return m;
}

double eval_cost(const Trajectory& states, const Trajectory& inputs,
                 const OcpProblem& problem) {
  check_trajectories(states, inputs, problem);
  const int n = problem.horizon;
  double running = 0.0;
  for (int i = 0; i < n; ++i) {
    const VectorXd dx = states[i] - problem.state_reference[i];
    const VectorXd du = inputs[i] - problem.input_reference[i];
    running += 0.5 * dx.dot(problem.running_state_weight.cwiseProduct(dx)) +
               0.5 * du.dot(problem.running_input_weight.cwiseProduct(du));
  }
  const VectorXd dn = states[n] - problem.state_reference[n];
  return 0.5 * dn.dot(problem.terminal_state_weight.cwiseProduct(dn)) +
         running * problem.dt;
}

Trajectory constraint_trajectory(const Trajectory& states,
                                 const OcpProblem& problem) {
  Trajectory c;
  c.reserve(states.size());
  for (const auto& x : states) {
    c.push_back(problem.constraints ? problem.constraints->values(x)
                                    : VectorXd());
  }
  return c;
}

double eval_augmented_cost(const Trajectory& states, const Trajectory& inputs,
                           const OcpProblem& problem, const Multipliers& mult) {
  double j = eval_cost(states, inputs, problem);
  if (!problem.constraints) return j;
  for (std::size_t i = 1; i < states.size(); ++i) {
    j += penalty_term(problem.constraints->values(states[i]), mult.lambda[i],
                      mult.penalty);
  }
  return j;
}

double max_violation(const Trajectory& states, const OcpProblem& problem) {
  if (!problem.constraints) return 0.0;
  double worst = 0.0;
  for (std::size_t i = 1; i < states.size(); ++i) {
    worst = std::max(worst, problem.constraints->values(states[i]).maxCoeff());
  }
  return worst;
}

Trajectory rollout(const OcpProblem& problem, const VectorXd& x0,
                   const Trajectory& inputs) {
  Trajectory states;
  states.reserve(inputs.size() + 1);
  states.push_back(x0);
  for (const auto& u : inputs) {
    states.push_back(problem.dynamics->step(states.back(), u));
  }
  return states;
}

Gains backward_pass(const Trajectory& states, const Trajectory& inputs,
                    const OcpProblem& problem, const Multipliers& mult,
                    double regularization) {
  const int n = problem.horizon;
  const int nx = problem.state_dim();
  const int nu = problem.input_dim();
  const double dt = problem.dt;
  const bool constrained = problem.constraints != nullptr;

  Gains g;
  g.feedforward.assign(n, VectorXd::Zero(nu));
  g.feedback.assign(n, MatrixXd::Zero(nu, nx));

  VectorXd vx = problem.terminal_state_weight.cwiseProduct(
      states[n] - problem.state_reference[n]);
  MatrixXd vxx = problem.terminal_state_weight.asDiagonal();
  if (constrained) {
    penalty_derivatives(states[n], problem, mult.lambda[n], mult.penalty, vx,
                        vxx);
  }

  MatrixXd a, b;
  for (int i = n - 1; i >= 0; --i) {
    problem.dynamics->linearize(states[i], inputs[i], a, b);

    VectorXd lx = dt * problem.running_state_weight.cwiseProduct(
                           states[i] - problem.state_reference[i]);
    MatrixXd lxx = (dt * problem.running_state_weight).asDiagonal();
    if (constrained && i > 0) {
      penalty_derivatives(states[i], problem, mult.lambda[i], mult.penalty, lx,
                          lxx);
    }
    const VectorXd lu = dt * problem.running_input_weight.cwiseProduct(
                                 inputs[i] - problem.input_reference[i]);

    const MatrixXd vxx_a = vxx * a;
    const VectorXd qx = lx + a.transpose() * vx;
    const VectorXd qu = lu + b.transpose() * vx;
    const MatrixXd qxx = lxx + a.transpose() * vxx_a;
    MatrixXd quu = b.transpose() * vxx * b;
    quu.diagonal() += dt * problem.running_input_weight;
    const MatrixXd qux = b.transpose() * vxx_a;

    MatrixXd quu_reg = quu;
    quu_reg.diagonal().array() += regularization;
    Eigen::LLT<MatrixXd> llt(quu_reg);
    if (llt.info() != Eigen::Success) return g;

    VectorXd& k = g.feedforward[i];
    MatrixXd& kk = g.feedback[i];
    k = -llt.solve(qu);
    kk = -llt.solve(qux);

    g.expected_linear += k.dot(qu);
    g.expected_quadratic += 0.5 * k.dot(quu * k);

    vx = qx + kk.transpose() * (quu * k) + kk.transpose() * qu +
         qux.transpose() * k;
    vxx = qxx + kk.transpose() * quu * kk + kk.transpose() * qux +
          qux.transpose() * kk;
    vxx = 0.5 * (vxx + vxx.transpose()).eval();
  }
  g.success = true;
  return g;
}

ForwardPassResult forward_pass(const Trajectory& states,
                               const Trajectory& inputs, const Gains& gains,
                               const OcpProblem& problem,
                               const Multipliers& mult,
                               const SolverSettings& settings) {
  const int n = problem.horizon;
  const double j0 = eval_augmented_cost(states, inputs, problem, mult);

  ForwardPassResult out;
  out.states = states;
  out.inputs = inputs;
  out.augmented_cost = j0;

  Trajectory xs(states.size()), us(inputs.size());
  double beta = 1.0;
  for (int s = 0; s < settings.line_search_steps; ++s, beta *= 0.5) {
    xs[0] = states[0];
    bool finite = true;
    for (int i = 0; i < n && finite; ++i) {
      us[i] = inputs[i] + beta * gains.feedforward[i] +
              gains.feedback[i] * (xs[i] - states[i]);
      xs[i + 1] = problem.dynamics->step(xs[i], us[i]);
      finite = xs[i + 1].allFinite();
    }
    if (!finite) continue;
    const double j = eval_augmented_cost(xs, us, problem, mult);
    const double predicted = -gains.expected_change(beta);
    const bool sufficient = predicted > 0.0
                                ? (j0 - j) >= settings.armijo * predicted
                                : j < j0;
    if (std::isfinite(j) && sufficient && j <= j0) {
      out.states = xs;
      out.inputs = us;
      out.augmented_cost = j;
      out.step = beta;
      out.accepted = true;
      return out;
    }
  }
  return out;
}

Multipliers al_update(const Multipliers& mult,
                      const Trajectory& constraint_values, double growth,
                      double tolerance) {
  Multipliers next = mult;
  double worst = 0.0;
  for (std::size_t i = 1; i < constraint_values.size(); ++i) {
    const VectorXd& c = constraint_values[i];
    if (c.size() == 0) continue;
    next.lambda[i] = (mult.lambda[i] + mult.penalty * c).cwiseMax(0.0);
    worst = std::max(worst, c.maxCoeff());
  }
  if (worst > tolerance) next.penalty = mult.penalty * growth;
  return next;
}

DdpSolver::DdpSolver(SolverSettings settings) : settings_(settings) {
  settings_.validate();
}

SolveResult DdpSolver::solve(const OcpProblem& problem, const VectorXd& x0,
                             const Trajectory& initial_inputs,
                             const Multipliers* warm) const {
  problem.validate();
  require(x0.size() == problem.state_dim(), "initial state dimension mismatch");
  require(initial_inputs.size() == static_cast<std::size_t>(problem.horizon),
          "initial input sequence must have horizon entries");

  SolveResult result;
  result.inputs = initial_inputs;
  result.states = rollout(problem, x0, result.inputs);
  check_trajectories(result.states, result.inputs, problem);

  Multipliers mult = Multipliers::zeros(problem, settings_.penalty_init);
  if (warm != nullptr && warm->lambda.size() == mult.lambda.size() &&
      (warm->lambda.empty() ||
       warm->lambda.front().size() == problem.constraint_dim())) {
    mult = *warm;
  }

  const bool constrained = problem.constraints != nullptr;
  double rho = settings_.regularization_init;
  double j_aug = eval_augmented_cost(result.states, result.inputs, problem, mult);
  result.cost_trace.push_back({0, j_aug});

  for (int outer = 0; outer < settings_.max_outer_iterations; ++outer) {
    ++result.outer_iterations;
    bool inner_converged = false;
    for (int inner = 0; inner < settings_.max_inner_iterations; ++inner) {
      ++result.iterations;
      const Gains gains =
          backward_pass(result.states, result.inputs, problem, mult, rho);
      if (!gains.success) {
        rho *= settings_.regularization_increase;
        if (rho > settings_.regularization_max) break;
        continue;
      }
      const double scale = std::max(1.0, std::abs(j_aug));
      if (-gains.expected_change(1.0) <= settings_.cost_tolerance * scale) {
        inner_converged = true;
        break;
      }
      ForwardPassResult fp = forward_pass(result.states, result.inputs, gains,
                                          problem, mult, settings_);
      if (!fp.accepted) {
        rho *= settings_.regularization_increase;
        if (rho > settings_.regularization_max) break;
        continue;
      }
      const double decrease = j_aug - fp.augmented_cost;
      result.states = std::move(fp.states);
      result.inputs = std::move(fp.inputs);
      j_aug = fp.augmented_cost;
      result.cost_trace.push_back({outer, j_aug});
      rho = std::max(rho / settings_.regularization_decrease,
                     settings_.regularization_min);
      if (decrease <= settings_.cost_tolerance * scale) {
        inner_converged = true;
        break;
      }
    }

    result.max_violation = max_violation(result.states, problem);
    if (inner_converged &&
        result.max_violation <= settings_.constraint_tolerance) {
      result.converged = true;
      break;
    }
    if (!constrained) break;
    mult = al_update(mult, constraint_trajectory(result.states, problem),
                     settings_.penalty_growth, settings_.constraint_tolerance);
    j_aug = eval_augmented_cost(result.states, result.inputs, problem, mult);
    result.cost_trace.push_back({outer + 1, j_aug});
    rho = settings_.regularization_init;
  }

  result.cost = eval_cost(result.states, result.inputs, problem);
  result.max_violation = max_violation(result.states, problem);
  result.multipliers = std::move(mult);
  return result;
}

}  // namespace doormpc
