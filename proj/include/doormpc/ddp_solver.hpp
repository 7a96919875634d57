#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

namespace doormpc {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Trajectory = std::vector<VectorXd>;

/// x_{k+1} = f(x_k, u_k) with its first-order Jacobians.
class DiscreteDynamics {
 public:
  virtual ~DiscreteDynamics() = default;
  virtual int state_dim() const = 0;
  virtual int input_dim() const = 0;
  virtual VectorXd step(const VectorXd& x, const VectorXd& u) const = 0;
  virtual void linearize(const VectorXd& x, const VectorXd& u, MatrixXd& a,
                         MatrixXd& b) const = 0;
};

/// Pointwise state inequality c(x) <= 0.
class StateConstraint {
 public:
  virtual ~StateConstraint() = default;
  virtual int size() const = 0;
  virtual VectorXd values(const VectorXd& x) const = 0;
  virtual void evaluate(const VectorXd& x, VectorXd& c, MatrixXd& jac) const = 0;
};

/// Finite-horizon problem
///   min 1/2 |x_N - xd_N|_L^2 + sum_i (1/2 |x_i - xd_i|_Q^2 + 1/2 |u_i - ud_i|_R^2) dt
/// subject to the dynamics and c(x_i) <= 0 for i = 1..N.
struct OcpProblem {
  int horizon{20};
  double dt{0.05};
  std::shared_ptr<const DiscreteDynamics> dynamics;
  VectorXd running_state_weight;   // diag(Q)
  VectorXd running_input_weight;   // diag(R)
  VectorXd terminal_state_weight;  // diag(L)
  Trajectory state_reference;      // horizon + 1 entries, last one is the target
  Trajectory input_reference;      // horizon entries
  std::shared_ptr<const StateConstraint> constraints;  // may be null

  int state_dim() const { return dynamics->state_dim(); }
  int input_dim() const { return dynamics->input_dim(); }
  int constraint_dim() const { return constraints ? constraints->size() : 0; }

  /// Throws std::invalid_argument when dimensions or weights are inconsistent.
  void validate() const;
};

struct SolverSettings {
  int max_outer_iterations{8};
  int max_inner_iterations{30};
  double penalty_init{1.0};
  double penalty_growth{10.0};
  double constraint_tolerance{1e-3};
  double cost_tolerance{1e-4};
  double regularization_init{1e-8};
  double regularization_min{1e-8};
  double regularization_max{1e8};
  double regularization_increase{10.0};
  double regularization_decrease{2.0};
  int line_search_steps{11};  // beta = 1, 1/2, ..., 2^-10
  double armijo{1e-4};

  void validate() const;
};

/// Augmented-Lagrangian state: one multiplier vector per knot (knot 0 unused)
/// and the shared penalty.
struct Multipliers {
  Trajectory lambda;
  double penalty{1.0};

  static Multipliers zeros(const OcpProblem& problem, double penalty);
};

/// Augmented cost after an accepted step, tagged with the outer iteration
/// whose multipliers defined it.
struct CostTraceEntry {
  int outer{0};
  double augmented_cost{0.0};
};

struct SolveResult {
  Trajectory states;  // horizon + 1
  Trajectory inputs;  // horizon
  double cost{0.0};   // problem cost without the constraint terms
  double max_violation{0.0};
  int iterations{0};  // inner (backward + forward pass) iterations
  int outer_iterations{0};
  bool converged{false};
  std::vector<CostTraceEntry> cost_trace;
  Multipliers multipliers;
};

/// Problem cost J of a trajectory pair. Throws std::invalid_argument on a
/// dimension mismatch.
double eval_cost(const Trajectory& states, const Trajectory& inputs,
                 const OcpProblem& problem);

/// J plus sum over knots 1..N of (max(0, lambda + mu c)^2 - lambda^2) / (2 mu).
double eval_augmented_cost(const Trajectory& states, const Trajectory& inputs,
                           const OcpProblem& problem, const Multipliers& mult);

/// Largest positive constraint value over knots 1..N.
double max_violation(const Trajectory& states, const OcpProblem& problem);

/// Rolls out x_{k+1} = f(x_k, u_k) from x0.
Trajectory rollout(const OcpProblem& problem, const VectorXd& x0,
                   const Trajectory& inputs);

struct Gains {
  Trajectory feedforward;          // k_i
  std::vector<MatrixXd> feedback;  // K_i
  double expected_linear{0.0};     // sum k^T Q_u
  double expected_quadratic{0.0};  // sum 1/2 k^T Q_uu k
  bool success{false};             // false when Q_uu + rho I is not PD

  /// Predicted change of the augmented cost for step scale beta (<= 0).
  double expected_change(double beta) const {
    return beta * expected_linear + beta * beta * expected_quadratic;
  }
};

/// Gauss-Newton Riccati recursion on the augmented cost around (X, U).
Gains backward_pass(const Trajectory& states, const Trajectory& inputs,
                    const OcpProblem& problem, const Multipliers& mult,
                    double regularization);

struct ForwardPassResult {
  Trajectory states;
  Trajectory inputs;
  double augmented_cost{0.0};
  double step{0.0};
  bool accepted{false};
};

/// Backtracking line search over beta = 1, 1/2, ... with the Armijo test.
/// When nothing is accepted the original trajectory is returned.
ForwardPassResult forward_pass(const Trajectory& states,
                               const Trajectory& inputs, const Gains& gains,
                               const OcpProblem& problem,
                               const Multipliers& mult,
                               const SolverSettings& settings);

/// lambda' = max(0, lambda + mu c) per knot; mu' = mu * growth when the
/// largest violation exceeds `tolerance`.
Multipliers al_update(const Multipliers& mult, const Trajectory& constraint_values,
                      double growth, double tolerance);

/// Constraint values c(x_i) per knot (knot 0 included for indexing).
Trajectory constraint_trajectory(const Trajectory& states,
                                 const OcpProblem& problem);

/// Augmented-Lagrangian iLQR. A solver owns no problem data and may be
/// reused across problems; it is not meant to be shared between threads.
class DdpSolver {
 public:
  explicit DdpSolver(SolverSettings settings = {});

  const SolverSettings& settings() const { return settings_; }

  /// Solves from x0 starting at inputs `initial_inputs`. `warm` carries
  /// multipliers from a previous solve (shifted by the caller); when null
  /// they start at zero with the configured initial penalty.
  SolveResult solve(const OcpProblem& problem, const VectorXd& x0,
                    const Trajectory& initial_inputs,
                    const Multipliers* warm = nullptr) const;

 private:
  SolverSettings settings_;
};

}  // namespace doormpc
