#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "mftg/core/error.hpp"
#include "mftg/core/integrate.hpp"
#include "mftg/core/path.hpp"
#include "mftg/core/random.hpp"
#include "mftg/core/time_grid.hpp"

namespace mftg::lq {

/// Network security investment game: n agents steer a common security level
/// dx = (-a x - abar E[x] + sum_i b_i u_i) dt + c x dW.
struct SecurityModel {
  std::size_t n = 1;
  double a = 0.0;
  double abar = 0.0;
  double c = 0.0;
  std::vector<double> b;
  std::vector<TimeFn> q, eps, rho, r;
  double x0 = 1.0;

  /// Same constant coefficients for every agent.
  static SecurityModel symmetric(std::size_t n, double a, double abar, double c, double b, double q,
                                 double eps, double rho, double r, double x0) {
    SecurityModel m;
    m.n = n;
    m.a = a;
    m.abar = abar;
    m.c = c;
    m.b.assign(n, b);
    m.q.assign(n, constant_fn(q));
    m.eps.assign(n, constant_fn(eps));
    m.rho.assign(n, constant_fn(rho));
    m.r.assign(n, constant_fn(r));
    m.x0 = x0;
    return m;
  }

  void validate(const TimeGrid& grid) const {
    require(n >= 1, Errc::InvalidArgument, "security model needs n >= 1");
    require(b.size() == n && q.size() == n && eps.size() == n && rho.size() == n && r.size() == n,
            Errc::InvalidArgument, "security model arrays must have length n");
    require(std::isfinite(a) && std::isfinite(abar) && std::isfinite(c) && std::isfinite(x0),
            Errc::InvalidArgument, "security model scalars must be finite");
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double t = grid.time(k);
      for (std::size_t i = 0; i < n; ++i) {
        require(r[i](t) > 0.0, Errc::InvalidArgument, "r_i(t) must be positive");
        require(q[i](t) >= 0.0 && eps[i](t) >= 0.0 && rho[i](t) >= 0.0, Errc::InvalidArgument,
                "q_i, eps_i, rho_i must be nonnegative");
      }
    }
  }
};

/// Coefficient paths of the feedback law, indexed [agent][grid point].
struct RiccatiSolution {
  TimeGrid grid;
  std::vector<std::vector<double>> beta, eta1, eta2;
};

/// Right-hand side of the coupled (beta, eta1, eta2) system in forward time.
/// State layout: [beta_0..beta_{n-1}, eta1_0.., eta2_0..].
inline State security_riccati_rhs(const SecurityModel& m, double t, const State& y) {
  const std::size_t n = m.n;
  State dy(3 * n);
  double kb = 0.0, ke1 = 0.0, kbe = 0.0, ke2 = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double rj = m.r[j](t);
    const double kj = m.b[j] * m.b[j] / rj;
    kb += kj * y[j];
    ke1 += kj * y[n + j];
    kbe += kj * (y[j] + y[n + j]);
    ke2 += m.b[j] / rj * (m.b[j] * y[2 * n + j] + m.rho[j](t));
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double beta = y[i], e1 = y[n + i], e2 = y[2 * n + i];
    const double qi = m.q[i](t);
    dy[i] = (2.0 * m.a - m.c * m.c) * beta + beta * kb - 2.0 * qi * m.eps[i](t);
    dy[n + i] = 2.0 * (m.a + m.abar) * e1 + 2.0 * m.abar * beta + beta * ke1 + e1 * kbe;
    dy[2 * n + i] = (m.a + m.abar) * e2 + (beta + e1) * ke2 + qi;
  }
  return dy;
}

/// Backward RK4 solve from beta(T)=1, eta1(T)=-1, eta2(T)=0.
inline RiccatiSolution solve_security_riccati(const SecurityModel& m, const TimeGrid& grid) {
  m.validate(grid);
  const std::size_t n = m.n;
  State terminal(3 * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    terminal[i] = 1.0;
    terminal[n + i] = -1.0;
  }
  const double T = grid.horizon();
  // s = T - t runs forward on the reversed grid.
  auto rhs = [&](double s, const State& y) {
    State d = security_riccati_rhs(m, T - s, y);
    for (double& v : d) v = -v;
    return d;
  };
  const Path rev = rk4_integrate(rhs, terminal, grid.reversed());

  RiccatiSolution sol{grid, {}, {}, {}};
  sol.beta.assign(n, std::vector<double>(grid.size()));
  sol.eta1 = sol.beta;
  sol.eta2 = sol.beta;
  const std::size_t last = grid.steps();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const State& y = rev[last - k];
    for (std::size_t i = 0; i < n; ++i) {
      sol.beta[i][k] = y[i];
      sol.eta1[i][k] = y[n + i];
      sol.eta2[i][k] = y[2 * n + i];
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    sol.beta[i][last] = 1.0;
    sol.eta1[i][last] = -1.0;
    sol.eta2[i][last] = 0.0;
  }
  return sol;
}

/// u_i = -(b_i/r_i)(beta_i x + eta1_i Ex + eta2_i) - rho_i/r_i at grid index k.
inline double security_feedback(const SecurityModel& m, const RiccatiSolution& sol, std::size_t i,
                                std::size_t k, double x, double ex) {
  require(i < m.n && k < sol.grid.size(), Errc::OutOfRange, "security_feedback: index out of range");
  const double t = sol.grid.time(k);
  const double ri = m.r[i](t);
  return -(m.b[i] / ri) * (sol.beta[i][k] * x + sol.eta1[i][k] * ex + sol.eta2[i][k]) -
         m.rho[i](t) / ri;
}

/// Same, with the time given as a grid time.
inline double security_feedback_at(const SecurityModel& m, const RiccatiSolution& sol,
                                   std::size_t i, double t, double x, double ex) {
  return security_feedback(m, sol, i, sol.grid.index_of(t), x, ex);
}

struct SecurityStats {
  std::vector<double> mean;      // ensemble mean of x per grid point
  std::vector<double> variance;  // ensemble variance per grid point
  std::vector<double> cost;      // average running cost over agents per grid point
  std::vector<double> payoff;    // realized R_i per agent
};

/// Closed-loop Euler-Maruyama ensemble. E[x] in the feedback is the ensemble
/// average at the current step. With `controlled == false` every u_i is zero.
inline SecurityStats simulate_security(const SecurityModel& m, const RiccatiSolution& sol,
                                       std::size_t n_paths, StreamId stream,
                                       bool controlled = true) {
  require(n_paths >= 1, Errc::InvalidArgument, "simulate_security needs n_paths >= 1");
  const TimeGrid& grid = sol.grid;
  const std::size_t n = m.n;
  const double h = grid.step();
  const double sq = std::sqrt(h);

  std::vector<RandomStream> rng;
  rng.reserve(n_paths);
  for (std::size_t p = 0; p < n_paths; ++p) rng.emplace_back(stream.child(p));

  std::vector<double> x(n_paths, m.x0);
  SecurityStats out;
  out.mean.resize(grid.size());
  out.variance.resize(grid.size());
  out.cost.resize(grid.size());
  out.payoff.assign(n, 0.0);
  std::vector<double> running(n);
  std::vector<double> u(n);

  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double t = grid.time(k);
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n_paths);
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n_paths);
    out.mean[k] = mean;
    out.variance[k] = var;

    std::fill(running.begin(), running.end(), 0.0);
    std::vector<double> next(n_paths);
    for (std::size_t p = 0; p < n_paths; ++p) {
      double push = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        u[i] = controlled ? security_feedback(m, sol, i, k, x[p], mean) : 0.0;
        push += m.b[i] * u[i];
        running[i] += m.q[i](t) * x[p] * (1.0 - m.eps[i](t) * x[p]) - m.rho[i](t) * u[i] -
                      0.5 * m.r[i](t) * u[i] * u[i];
      }
      if (k < grid.steps()) {
        const double drift = -m.a * x[p] - m.abar * mean + push;
        next[p] = x[p] + drift * h + m.c * x[p] * sq * rng[p].normal();
      }
    }
    double avg_cost = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double ri = running[i] / static_cast<double>(n_paths);
      avg_cost -= ri;
      // Left-point rule for the running payoff.
      if (k < grid.steps()) out.payoff[i] += ri * h;
    }
    out.cost[k] = avg_cost / static_cast<double>(n);
    if (k < grid.steps()) {
      for (double v : next) require(std::isfinite(v), Errc::NonFinite, "simulate_security diverged");
      x = std::move(next);
    }
  }
  for (std::size_t i = 0; i < n; ++i) out.payoff[i] -= 0.5 * out.variance.back();
  return out;
}

/// Single decision-maker standing in for the full coalition: one control with
/// the aggregated gain sum b_j^2/r_j and the averaged state weights.
inline SecurityModel cooperative_baseline(const SecurityModel& m) {
  SecurityModel c;
  c.n = 1;
  c.a = m.a;
  c.abar = m.abar;
  c.c = m.c;
  c.x0 = m.x0;
  c.b = {1.0};
  const SecurityModel src = m;
  c.r = {[src](double t) {
    double k = 0.0;
    for (std::size_t j = 0; j < src.n; ++j) k += src.b[j] * src.b[j] / src.r[j](t);
    return 1.0 / (static_cast<double>(src.n) * k);
  }};
  c.rho = {[src](double t) {
    double k = 0.0, bsum = 0.0;
    for (std::size_t j = 0; j < src.n; ++j) {
      k += src.b[j] * src.b[j] / src.r[j](t);
      bsum += src.b[j] * src.rho[j](t) / src.r[j](t);
    }
    return bsum / (static_cast<double>(src.n) * k);
  }};
  c.q = {[src](double t) {
    double s = 0.0;
    for (std::size_t j = 0; j < src.n; ++j) s += src.q[j](t);
    return s / static_cast<double>(src.n);
  }};
  c.eps = {[src](double t) {
    double s = 0.0, w = 0.0;
    for (std::size_t j = 0; j < src.n; ++j) {
      s += src.q[j](t) * src.eps[j](t);
      w += src.q[j](t);
    }
    return w > 0.0 ? s / w : 0.0;
  }};
  return c;
}

}  // namespace mftg::lq
