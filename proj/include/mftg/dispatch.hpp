#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "mftg/core/error.hpp"
#include "mftg/core/root.hpp"
#include "mftg/core/time_grid.hpp"

namespace mftg::dispatch {

/// Mismatch loss l with first and second derivatives.
struct Loss {
  std::function<double(double)> value, d1, d2;

  double operator()(double z) const { return value(z); }

  /// k z^2 / 2.
  static Loss quadratic(double k) {
    require(k > 0.0, Errc::InvalidArgument, "quadratic loss needs k > 0");
    return {[k](double z) { return 0.5 * k * z * z; }, [k](double z) { return k * z; },
            [k](double) { return k; }};
  }

  /// Smooth Huber: delta^2 (sqrt(1 + (z/delta)^2) - 1), scaled by k.
  static Loss huber(double k, double delta) {
    require(k > 0.0 && delta > 0.0, Errc::InvalidArgument, "huber loss needs k > 0 and delta > 0");
    return {[k, delta](double z) { return k * delta * delta * (std::sqrt(1.0 + (z / delta) * (z / delta)) - 1.0); },
            [k, delta](double z) { return k * z / std::sqrt(1.0 + (z / delta) * (z / delta)); },
            [k, delta](double z) {
              const double r = 1.0 + (z / delta) * (z / delta);
              return k / (r * std::sqrt(r));
            }};
  }

  static Loss zero() {
    return {[](double) { return 0.0; }, [](double) { return 0.0; }, [](double) { return 0.0; }};
  }
};

/// Terminal loss on the stock vector.
using TerminalLoss = std::function<double(const std::vector<double>&)>;

struct Window {
  double start, end;  // [start, end)
};

struct ProducerModel {
  Loss loss;
  double rho = 1.0;
  std::vector<double> caps;                 // s-bar per plant
  std::vector<TimeFn> maintenance;          // c_k(t) >= 0; empty means zero
  std::vector<std::vector<Window>> windows; // plant k produces nothing inside its windows
  TerminalLoss terminal = [](const std::vector<double>&) { return 0.0; };

  std::size_t plants() const { return caps.size(); }

  double c(std::size_t k, double t) const { return maintenance.empty() ? 0.0 : maintenance[k](t); }

  bool active(std::size_t k, double t) const {
    if (windows.empty()) return true;
    for (const auto& w : windows[k])
      if (t >= w.start && t < w.end) return false;
    return true;
  }

  /// Plant cap at time t: zero inside a maintenance window.
  double cap(std::size_t k, double t) const { return active(k, t) ? caps[k] : 0.0; }

  void validate(double demand_scale = 1.0) const {
    require(rho > 0.0, Errc::InvalidArgument, "rho must be positive");
    require(!caps.empty(), Errc::InvalidArgument, "a producer needs at least one plant");
    for (double s : caps) require(s > 0.0 && std::isfinite(s), Errc::InvalidArgument, "plant caps must be positive");
    require(maintenance.empty() || maintenance.size() == caps.size(), Errc::InvalidArgument,
            "one maintenance rate per plant");
    require(windows.empty() || windows.size() == caps.size(), Errc::InvalidArgument,
            "one maintenance window list per plant");
    require(loss.value && loss.d1 && loss.d2, Errc::InvalidArgument, "loss needs value and derivatives");
    double total = 0.0;
    for (double s : caps) total += s;
    const double R = total + std::abs(demand_scale) + 1.0;
    for (int i = 0; i <= 100; ++i) {
      const double z = -R + 2.0 * R * i / 100.0;
      require(loss.d2(z) > 0.0, Errc::InvalidArgument, "loss must be strictly convex on the working range");
    }
  }
};

/// Root of -K l'(D - S) - sum y + rho S = 0 on [0, sum caps + D].
/// K counts the plants that are active at time t.
inline double total_supply_root(const ProducerModel& m, double D, const std::vector<double>& y, double t = 0.0) {
  require(y.size() == m.plants(), Errc::InvalidArgument, "one costate entry per plant");
  double K = 0.0, ysum = 0.0, cap = 0.0;
  for (std::size_t k = 0; k < m.plants(); ++k)
    if (m.active(k, t)) {
      K += 1.0;
      ysum += y[k];
      cap += m.caps[k];
    }
  auto f = [&](double S) { return -K * m.loss.d1(D - S) - ysum + m.rho * S; };
  return bracketed_root(f, 0.0, cap + std::max(D, 0.0), 1e-10);
}

struct Supply {
  double total = 0.0;          // S* from the summed condition
  std::vector<double> plant;   // s*_k
  bool clamped = false;        // some plant hit s >= 0
  bool capped = false;         // some plant hit its cap
};

/// s*_k = min(cap_k, (l'(D - S*) + y_k) / rho), floored at 0.
inline Supply optimal_supply(const ProducerModel& m, double D, const std::vector<double>& y, double t = 0.0) {
  Supply out;
  out.total = total_supply_root(m, D, y, t);
  const double slope = m.loss.d1(D - out.total);
  out.plant.resize(m.plants());
  for (std::size_t k = 0; k < m.plants(); ++k) {
    const double cap = m.cap(k, t);
    double s = (slope + y[k]) / m.rho;
    if (s > cap) {
      s = cap;
      out.capped = out.capped || m.active(k, t);
    }
    if (s < 0.0) {
      s = 0.0;
      out.clamped = true;
    }
    out.plant[k] = s;
  }
  return out;
}

/// inf over s in [0, cap] of l(D - S) + rho/2 |s|^2 + sum (c_k - s_k) y_k.
/// The KKT point has s_k = clamp((l'(D - S) + y_k) / rho, 0, cap_k); S solves a monotone scalar equation.
inline double hamiltonian(const ProducerModel& m, double D, const std::vector<double>& y, double t = 0.0) {
  require(y.size() == m.plants(), Errc::InvalidArgument, "one costate entry per plant");
  auto plant = [&](std::size_t k, double S) {
    return std::clamp((m.loss.d1(D - S) + y[k]) / m.rho, 0.0, m.cap(k, t));
  };
  double cap = 0.0;
  for (std::size_t k = 0; k < m.plants(); ++k) cap += m.cap(k, t);
  auto g = [&](double S) {
    double sum = 0.0;
    for (std::size_t k = 0; k < m.plants(); ++k) sum += plant(k, S);
    return S - sum;
  };
  double S = 0.0;
  if (cap > 0.0) S = g(0.0) >= 0.0 ? 0.0 : (g(cap) <= 0.0 ? cap : bracketed_root(g, 0.0, cap, 1e-14));
  double val = m.loss(D - S);
  for (std::size_t k = 0; k < m.plants(); ++k) {
    const double s = plant(k, S);
    val += 0.5 * m.rho * s * s + (m.c(k, t) - s) * y[k];
  }
  return val;
}

/// Conjugate of the Hamiltonian in the sense used by the Hopf-Lax formula:
/// sup_y [a.y + H(D, y)] = l(D - sum(a + c)) + rho/2 |a + c|^2 when every a_k + c_k
/// lies in [0, cap_k], and +infinity otherwise.
inline double legendre_Hstar(const ProducerModel& m, double D, const std::vector<double>& a, double t = 0.0) {
  require(a.size() == m.plants(), Errc::InvalidArgument, "one rate per plant");
  double S = 0.0, quad = 0.0;
  for (std::size_t k = 0; k < m.plants(); ++k) {
    const double s = a[k] + m.c(k, t);
    if (s < -1e-14 || s > m.cap(k, t) + 1e-14) return std::numeric_limits<double>::infinity();
    S += s;
    quad += s * s;
  }
  return m.loss(D - S) + 0.5 * m.rho * quad;
}

/// Shortcut form l(D - sum a / rho - l'(D - S*) / rho) + rho/2 |a|^2 + c.a. Not the conjugate of
/// `hamiltonian`; kept for comparison. S* comes from total_supply_root at y = rho a.
inline double displayed_Hstar(const ProducerModel& m, double D, const std::vector<double>& a, double t = 0.0) {
  require(a.size() == m.plants(), Errc::InvalidArgument, "one rate per plant");
  std::vector<double> y(a.size());
  double asum = 0.0, quad = 0.0, lin = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    y[k] = m.rho * a[k];
    asum += a[k];
    quad += a[k] * a[k];
    lin += m.c(k, t) * a[k];
  }
  const double S = total_supply_root(m, D, y, t);
  return m.loss(D - asum / m.rho - m.loss.d1(D - S) / m.rho) + 0.5 * m.rho * quad + lin;
}

struct HopfLaxResult {
  double value;
  std::vector<double> argmin;
};

struct SearchBox {
  std::vector<double> lo, hi;  // empty: use the feasible box
};

namespace detail {

// Grid search over a K-dimensional box (K <= 3): `pts` points per axis, then
// `rounds` refinements of 21 points on +-2 cells around the incumbent.
template <class F>
std::pair<double, std::vector<double>> box_minimize(F&& f, std::vector<double> lo, std::vector<double> hi,
                                                    int pts = 101, int rounds = 8) {
  const std::size_t K = lo.size();
  require(K >= 1 && K <= 3, Errc::InvalidArgument, "grid search supports 1 to 3 plants");
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> arg(lo);
  std::vector<double> x(K);
  for (int r = 0; r <= rounds; ++r) {
    const int n = r == 0 ? pts : 21;
    std::size_t total = 1;
    for (std::size_t d = 0; d < K; ++d) total *= static_cast<std::size_t>(n);
    std::vector<double> step(K);
    for (std::size_t d = 0; d < K; ++d) step[d] = (hi[d] - lo[d]) / (n - 1);
    for (std::size_t idx = 0; idx < total; ++idx) {
      std::size_t rem = idx;
      for (std::size_t d = 0; d < K; ++d) {
        x[d] = lo[d] + step[d] * static_cast<double>(rem % static_cast<std::size_t>(n));
        rem /= static_cast<std::size_t>(n);
      }
      const double v = f(x);
      if (v < best) {
        best = v;
        arg = x;
      }
    }
    for (std::size_t d = 0; d < K; ++d) {
      const double nlo = std::max(lo[d], arg[d] - 2.0 * step[d]);
      const double nhi = std::min(hi[d], arg[d] + 2.0 * step[d]);
      lo[d] = nlo;
      hi[d] = nhi;
    }
  }
  return {best, arg};
}

}  // namespace detail

/// v(t, e) = inf_y { l_T(y) + (T - t) H*(D, (e - y) / (T - t)) }.
/// Demand and maintenance rates are frozen at time t. The default search box is
/// the feasible set y_k in [e_k - (T - t)(cap_k - c_k), e_k + (T - t) c_k]. A
/// user box that cuts the feasible set raises GridTooCoarse if the minimizer
/// lands on a cut edge.
inline HopfLaxResult hopf_lax_value(const ProducerModel& m, double D, double t, double T,
                                    const std::vector<double>& e, const SearchBox& box = {}) {
  require(t < T, Errc::InvalidArgument, "Hopf-Lax evaluation needs t < T");
  require(e.size() == m.plants(), Errc::InvalidArgument, "one stock per plant");
  const double tau = T - t;
  const std::size_t K = m.plants();
  std::vector<double> flo(K), fhi(K);
  for (std::size_t k = 0; k < K; ++k) {
    flo[k] = e[k] - tau * (m.cap(k, t) - m.c(k, t));
    fhi[k] = e[k] + tau * m.c(k, t);
    require(flo[k] <= fhi[k] + 1e-14, Errc::InvalidArgument, "maintenance rate exceeds plant cap");
  }
  std::vector<double> lo = flo, hi = fhi;
  if (!box.lo.empty()) {
    require(box.lo.size() == K && box.hi.size() == K, Errc::InvalidArgument, "search box needs one bound per plant");
    for (std::size_t k = 0; k < K; ++k) {
      lo[k] = std::max(lo[k], box.lo[k]);
      hi[k] = std::min(hi[k], box.hi[k]);
      require(lo[k] <= hi[k], Errc::InvalidArgument, "search box misses the feasible set");
    }
  }
  std::vector<double> a(K);
  auto objective = [&](const std::vector<double>& y) {
    for (std::size_t k = 0; k < K; ++k) {
      // Snap rounding noise at the feasible edges.
      a[k] = std::clamp((e[k] - y[k]) / tau, -m.c(k, t), m.cap(k, t) - m.c(k, t));
    }
    return m.terminal(y) + tau * legendre_Hstar(m, D, a, t);
  };
  auto [v, y] = detail::box_minimize(objective, lo, hi);
  const double span_tol = 1e-9;
  for (std::size_t k = 0; k < K; ++k) {
    const double w = std::max(fhi[k] - flo[k], 1e-300);
    const bool cut_lo = lo[k] > flo[k] + span_tol * w, cut_hi = hi[k] < fhi[k] - span_tol * w;
    if ((cut_lo && y[k] <= lo[k] + span_tol * w) || (cut_hi && y[k] >= hi[k] - span_tol * w))
      throw Error(Errc::GridTooCoarse, "Hopf-Lax minimizer sits on the search-box boundary");
  }
  return {v, y};
}

/// Costate y = dv/de by central differences of hopf_lax_value.
inline std::vector<double> costate(const ProducerModel& m, double D, double t, double T, const std::vector<double>& e,
                                   double h = 1e-4) {
  std::vector<double> y(e.size());
  for (std::size_t k = 0; k < e.size(); ++k) {
    auto up = e, dn = e;
    up[k] += h;
    dn[k] -= h;
    y[k] = (hopf_lax_value(m, D, t, T, up).value - hopf_lax_value(m, D, t, T, dn).value) / (2.0 * h);
  }
  return y;
}

struct FixedPoint {
  double supply = 0.0;
  double demand = 0.0;
  std::size_t iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

/// Damped iteration S <- (1 - gamma) S + gamma sum_j S*_j(D(S)) with zero costates.
inline FixedPoint supply_demand_fixed_point(const std::vector<ProducerModel>& producers,
                                            const std::function<double(double)>& demand, double damping,
                                            std::size_t iters, double S0 = 0.0, double t = 0.0) {
  require(!producers.empty(), Errc::InvalidArgument, "need at least one producer");
  require(damping > 0.0 && damping <= 1.0, Errc::InvalidArgument, "damping must lie in (0, 1]");
  FixedPoint fp;
  fp.supply = S0;
  for (std::size_t it = 1; it <= iters; ++it) {
    const double D = demand(fp.supply);
    require(std::isfinite(D) && D >= 0.0, Errc::InvalidArgument, "demand response left the demand range");
    double next = 0.0;
    for (const auto& m : producers) next += total_supply_root(m, D, std::vector<double>(m.plants(), 0.0), t);
    const double S = (1.0 - damping) * fp.supply + damping * next;
    fp.residual = std::abs(S - fp.supply);
    fp.supply = S;
    fp.demand = demand(S);
    fp.iterations = it;
    if (fp.residual < 1e-8) {
      fp.converged = true;
      break;
    }
  }
  return fp;
}

}  // namespace mftg::dispatch
