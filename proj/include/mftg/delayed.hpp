#pragma once

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "mftg/core/error.hpp"
#include "mftg/core/integrate.hpp"
#include "mftg/core/parallel.hpp"
#include "mftg/core/path.hpp"
#include "mftg/core/random.hpp"
#include "mftg/core/time_grid.hpp"

namespace mftg::delayed {

/// de = (c1(t) e(t - tau) - u) dt + c2(t) e(t - tau) dW, terminal reward c4 e(T).
/// The jump channel is disabled (c3 = 0).
struct DelayedProsumerModel {
  TimeFn c1 = constant_fn(1.0);
  TimeFn c2 = constant_fn(0.0);
  double c3 = 0.0;
  double c4 = 1.0;
  double tau = 1.0 / 3.0;
  double T = 1.0;
  double mu = 1.0;
  TimeFn history = constant_fn(1.0);  // e on [-tau, 0]

  void validate() const {
    require(tau > 0.0 && T > 0.0 && T >= tau - 1e-12, Errc::InvalidArgument, "need 0 < tau <= T");
    require(c4 >= 0.0, Errc::InvalidArgument, "terminal slope c4 must be nonnegative");
    require(mu > 0.0, Errc::InvalidArgument, "satisfaction coupling mu must be positive");
    require(c3 == 0.0, Errc::InvalidArgument, "the jump channel is not supported");
    require(static_cast<bool>(c1) && static_cast<bool>(c2) && static_cast<bool>(history), Errc::InvalidArgument,
            "c1, c2 and history must be set");
  }
};

/// Backward construction of p on [0, T] over a grid whose step divides tau.
/// p = c4 on [T - tau, T]; earlier, p' = -c1(t + tau) p(t + tau) with the future
/// segment already known. Each step integrates the known right-hand side with
/// Simpson's rule, taking the midpoint value of p(. + tau) from the cubic
/// Hermite interpolant through its grid values and slopes.
inline Path adjoint_backward_stepping(const DelayedProsumerModel& m, std::size_t steps) {
  m.validate();
  const TimeGrid grid(0.0, m.T, steps);
  const std::size_t L = grid.steps_for(m.tau);
  require(L >= 1, Errc::DelayNotOnGrid, "delay shorter than one step");
  const std::size_t N = grid.steps();
  const double h = grid.step();
  Path p(grid, 1);
  for (std::size_t k = N - std::min(L, N); k <= N; ++k) p[k][0] = m.c4;

  // Slope of p at grid point j, taken from the piece to the left of T - tau
  // when `left_piece` is set (one-sided at the joint).
  auto slope = [&](std::size_t j, bool left_piece) {
    if (!left_piece) return 0.0;
    return -m.c1(grid.time(j) + m.tau) * p[j + L][0];
  };
  for (std::size_t k = N - std::min(L, N); k-- > 0;) {
    const std::size_t a = k + L, b = k + L + 1;  // p(s + tau) lives on [t_a, t_b]
    const bool left = b <= N - L;                // [t_a, t_b] lies before T - tau
    const double pa = p[a][0], pb = p[b][0];
    const double mid = 0.5 * (pa + pb) + h / 8.0 * (slope(a, left) - slope(b, left));
    const double t = grid.time(k);
    const double fa = m.c1(t + m.tau) * pa;
    const double fm = m.c1(t + 0.5 * h + m.tau) * mid;
    const double fb = m.c1(grid.time(k + 1) + m.tau) * pb;
    p[k][0] = p[k + 1][0] + h / 6.0 * (fa + 4.0 * fm + fb);
    ensure_finite(p[k], "adjoint_backward_stepping: costate diverged");
  }
  return p;
}

/// Nested-quadrature evaluation of p(t) = p(T - k tau) + int_{t+tau}^{T-(k-1)tau} c1 p ds
/// on t in [T - (k+1) tau, T - k tau). Supported on [max(0, T - 3 tau), T].
inline double prosumer_closed_form_p(const DelayedProsumerModel& m, double t) {
  require(t >= -1e-12 && t <= m.T + 1e-12, Errc::OutOfRange, "time outside [0, T]");
  require(t >= m.T - 3.0 * m.tau - 1e-12, Errc::OutOfRange, "closed form covers the last three delay intervals");
  using Gauss = boost::math::quadrature::gauss<double, 20>;
  auto eval = [&](auto&& self, double s) -> double {
    double r = (m.T - s) / m.tau;
    if (std::abs(r - std::round(r)) < 1e-12) r = std::round(r);
    if (r <= 1.0) return m.c4;
    const double k = std::ceil(r) - 1.0;
    const double joint = m.T - k * m.tau;
    const double upper = m.T - (k - 1.0) * m.tau;
    return self(self, joint) + Gauss::integrate([&](double x) { return m.c1(x) * self(self, x); }, s + m.tau, upper);
  };
  return eval(eval, t);
}

/// u* = -log p / (1 + mu m2) on p in (0, 1], zero for p > 1.
inline double optimal_control(double p, double m2, double mu) {
  require(p > 0.0, Errc::NonpositiveCostate, "optimal control needs a positive costate");
  if (p > 1.0) return 0.0;
  return -std::log(p) / (1.0 + mu * m2);
}

/// Positive root of m (1 + mu m) = log(1/p).
inline double mean_field_fixed_point(double p, double mu) {
  require(p > 0.0 && p <= 1.0, Errc::OutOfRange, "fixed point needs p in (0, 1]");
  require(mu > 0.0, Errc::InvalidArgument, "mu must be positive");
  const double L = -std::log(p);
  if (L == 0.0) return 0.0;
  // Cancellation-free form of (-1 + sqrt(1 + 4 mu L)) / (2 mu), then Newton polish.
  double x = 2.0 * L / (1.0 + std::sqrt(1.0 + 4.0 * mu * L));
  for (int i = 0; i < 3; ++i) x -= (x * (1.0 + mu * x) - L) / (1.0 + 2.0 * mu * x);
  require(std::abs(x * (1.0 + mu * x) - L) <= 1e-12 * std::max(1.0, L), Errc::NonFinite,
          "fixed-point residual too large");
  return x;
}

/// Equilibrium consumption at costate p: the fixed point when p in (0, 1], else 0.
inline double equilibrium_control(double p, double mu) {
  require(p > 0.0, Errc::NonpositiveCostate, "optimal control needs a positive costate");
  if (p > 1.0) return 0.0;
  const double m2 = mean_field_fixed_point(p, mu);
  return optimal_control(p, m2, mu);
}

struct DelayProfile {
  double tau;
  Path p;
  std::vector<double> u;
};

struct MonotonicityReport {
  std::vector<DelayProfile> profiles;  // sorted by tau
  bool monotone = true;
  bool degenerate = false;             // some consecutive pair has identical p
  double worst = 0.0;                  // largest ordering violation
};

/// p and u* for each delay on one grid; checks p decreasing and u* increasing in tau.
inline MonotonicityReport delay_monotonicity_report(DelayedProsumerModel m, std::vector<double> taus,
                                                    std::size_t steps, double tol = 1e-10) {
  require(!taus.empty(), Errc::InvalidArgument, "need at least one delay");
  std::sort(taus.begin(), taus.end());
  MonotonicityReport rep;
  for (double tau : taus) {
    require(tau <= m.T + 1e-12, Errc::InvalidArgument, "delay longer than the horizon");
    m.tau = tau;
    DelayProfile prof{tau, adjoint_backward_stepping(m, steps), {}};
    for (const auto& v : prof.p.values) prof.u.push_back(equilibrium_control(v[0], m.mu));
    rep.profiles.push_back(std::move(prof));
  }
  for (std::size_t i = 0; i + 1 < rep.profiles.size(); ++i) {
    const auto& a = rep.profiles[i];
    const auto& b = rep.profiles[i + 1];
    bool strict = false;
    for (std::size_t k = 0; k < a.p.size(); ++k) {
      const double dp = b.p[k][0] - a.p[k][0];  // should be <= 0
      const double du = a.u[k] - b.u[k];        // should be <= 0
      rep.worst = std::max({rep.worst, dp, du});
      if (dp > tol || du > tol) rep.monotone = false;
      if (a.p.grid.time(k) < m.T - a.tau && -dp > tol) strict = true;
    }
    if (!strict) rep.degenerate = true;
  }
  return rep;
}

/// Throws MonotonicityViolation when the report breaks the ordering.
inline void require_monotone(const MonotonicityReport& rep) {
  require(rep.monotone, Errc::MonotonicityViolation, "delay ordering of p or u* is violated");
}

/// Ensemble of closed-loop energy paths under consumption u(t).
inline std::vector<Path> simulate_prosumer(const DelayedProsumerModel& m, const TimeFn& u, std::size_t steps,
                                           std::size_t paths, StreamId stream) {
  m.validate();
  require(paths >= 1, Errc::InvalidArgument, "need at least one path");
  const TimeGrid grid(0.0, m.T, steps);
  std::vector<Path> out(paths, Path(grid, 1));
  parallel_for(paths, [&](std::size_t r) {
    out[r] = milstein_delay_simulate(
        [&](double t, const State&, const State& xd) { return State{m.c1(t) * xd[0] - u(t)}; },
        [&](double t, const State&, const State& xd) { return State{m.c2(t) * xd[0]}; },
        [&](double t) { return State{m.history(t)}; }, m.tau, grid, stream.child(r));
  });
  return out;
}

}  // namespace mftg::delayed
