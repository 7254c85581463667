#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "mftg/core/error.hpp"
#include "mftg/core/path.hpp"
#include "mftg/core/random.hpp"
#include "mftg/core/time_grid.hpp"

namespace mftg {

namespace detail {

inline State axpy(const State& x, double a, const State& y) {
  State out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + a * y[i];
  return out;
}

}  // namespace detail

/// Classical fourth-order Runge-Kutta on a uniform grid.
/// `rhs(t, x)` returns dx/dt with the same dimension as x.
template <class Rhs>
Path rk4_integrate(Rhs&& rhs, const State& x0, const TimeGrid& grid) {
  ensure_finite(x0, "rk4_integrate: initial state");
  Path path(grid, x0.size());
  path[0] = x0;
  const double h = grid.step();
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    const double t = grid.time(k);
    const State& x = path[k];
    const State k1 = rhs(t, x);
    const State k2 = rhs(t + 0.5 * h, detail::axpy(x, 0.5 * h, k1));
    const State k3 = rhs(t + 0.5 * h, detail::axpy(x, 0.5 * h, k2));
    const State k4 = rhs(t + h, detail::axpy(x, h, k3));
    State next(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
      next[i] = x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    ensure_finite(next, "rk4_integrate: trajectory blew up");
    path[k + 1] = std::move(next);
  }
  return path;
}

/// Brownian increments dW_k ~ N(0, h) for every step and component.
inline std::vector<State> brownian_increments(const TimeGrid& grid, std::size_t dim,
                                              StreamId stream) {
  RandomStream rng(stream);
  const double sq = std::sqrt(grid.step());
  std::vector<State> dw(grid.steps(), State(dim));
  for (auto& step : dw)
    for (double& v : step) v = sq * rng.normal();
  return dw;
}

/// Sums consecutive blocks of `factor` increments (fine path -> coarse path).
inline std::vector<State> coarsen_increments(const std::vector<State>& fine, std::size_t factor) {
  require(factor > 0 && fine.size() % factor == 0, Errc::InvalidArgument,
          "coarsening factor must divide the step count");
  std::vector<State> coarse(fine.size() / factor, State(fine.empty() ? 0 : fine[0].size(), 0.0));
  for (std::size_t k = 0; k < fine.size(); ++k)
    for (std::size_t i = 0; i < fine[k].size(); ++i) coarse[k / factor][i] += fine[k][i];
  return coarse;
}

/// Euler-Maruyama with diagonal noise driven by explicit increments.
template <class Drift, class Diffusion>
Path em_simulate(Drift&& drift, Diffusion&& diffusion, const State& x0, const TimeGrid& grid,
                 const std::vector<State>& dw) {
  require(dw.size() == grid.steps(), Errc::InvalidArgument, "one increment per step required");
  ensure_finite(x0, "em_simulate: initial state");
  Path path(grid, x0.size());
  path[0] = x0;
  const double h = grid.step();
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    const double t = grid.time(k);
    const State& x = path[k];
    const State f = drift(t, x);
    const State g = diffusion(t, x);
    State next(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) next[i] = x[i] + f[i] * h + g[i] * dw[k][i];
    ensure_finite(next, "em_simulate: trajectory diverged");
    path[k + 1] = std::move(next);
  }
  return path;
}

template <class Drift, class Diffusion>
Path em_simulate(Drift&& drift, Diffusion&& diffusion, const State& x0, const TimeGrid& grid,
                 StreamId stream) {
  return em_simulate(std::forward<Drift>(drift), std::forward<Diffusion>(diffusion), x0, grid,
                     brownian_increments(grid, x0.size(), stream));
}

/// Milstein scheme for delay SDEs dx = f(t, x, x(t-tau)) dt + g(t, x, x(t-tau)) dW.
///
/// tau must be a whole number of steps. The state before t0 comes from
/// `history(t)` on [t0 - tau, t0]; later delayed values are read back from the
/// path itself. `diffusion_dx(t, x, xd)` is the diagonal of dg/dx with respect
/// to the current state and supplies the Milstein correction
/// 0.5 g g_x (dW^2 - h). The delayed argument is frozen over each step.
template <class Drift, class Diffusion, class History, class DiffusionDx>
Path milstein_delay_simulate(Drift&& drift, Diffusion&& diffusion, History&& history, double tau,
                             const TimeGrid& grid, const std::vector<State>& dw,
                             DiffusionDx&& diffusion_dx) {
  require(tau > 0.0, Errc::DelayNotOnGrid, "delay must be positive");
  const std::size_t lag = grid.steps_for(tau);
  require(lag >= 1, Errc::DelayNotOnGrid, "delay shorter than one step");
  require(dw.size() == grid.steps(), Errc::InvalidArgument, "one increment per step required");

  const double h = grid.step();
  std::vector<State> past(lag + 1);
  for (std::size_t j = 0; j <= lag; ++j) {
    past[j] = history(grid.t0() - tau + static_cast<double>(j) * h);
    ensure_finite(past[j], "milstein_delay_simulate: history");
  }
  const State x0 = past[lag];
  Path path(grid, x0.size());
  path[0] = x0;

  for (std::size_t k = 0; k < grid.steps(); ++k) {
    const double t = grid.time(k);
    const State& x = path[k];
    const State& xd = k >= lag ? path[k - lag] : past[k];
    const State f = drift(t, x, xd);
    const State g = diffusion(t, x, xd);
    const State gx = diffusion_dx(t, x, xd);
    State next(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double w = dw[k][i];
      next[i] = x[i] + f[i] * h + g[i] * w + 0.5 * g[i] * gx[i] * (w * w - h);
    }
    ensure_finite(next, "milstein_delay_simulate: trajectory diverged");
    path[k + 1] = std::move(next);
  }
  return path;
}

/// Overload for diffusions that depend on the delayed state only (no correction term).
template <class Drift, class Diffusion, class History>
Path milstein_delay_simulate(Drift&& drift, Diffusion&& diffusion, History&& history, double tau,
                             const TimeGrid& grid, const std::vector<State>& dw) {
  return milstein_delay_simulate(
      std::forward<Drift>(drift), std::forward<Diffusion>(diffusion),
      std::forward<History>(history), tau, grid, dw,
      [](double, const State& x, const State&) { return State(x.size(), 0.0); });
}

template <class Drift, class Diffusion, class History>
Path milstein_delay_simulate(Drift&& drift, Diffusion&& diffusion, History&& history, double tau,
                             const TimeGrid& grid, StreamId stream) {
  const State probe = history(grid.t0());
  return milstein_delay_simulate(std::forward<Drift>(drift), std::forward<Diffusion>(diffusion),
                                 std::forward<History>(history), tau, grid,
                                 brownian_increments(grid, probe.size(), stream));
}

}  // namespace mftg
