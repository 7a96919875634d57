#pragma once

namespace doormpc {

/// One classical Runge-Kutta step of x_dot = f(x). `State` needs vector-space
/// arithmetic (Eigen vectors work).
template <typename State, typename Deriv>
State rk4(const State& x, double dt, Deriv&& f) {
  const State k1 = f(x);
  const State k2 = f(State(x + 0.5 * dt * k1));
  const State k3 = f(State(x + 0.5 * dt * k2));
  const State k4 = f(State(x + dt * k3));
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace doormpc
