#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "mftg/core/error.hpp"
#include "mftg/core/parallel.hpp"

namespace mftg::spatial {

using Point = std::array<double, 2>;

inline double distance(const Point& a, const Point& b) { return std::hypot(a[0] - b[0], a[1] - b[1]); }

/// Arrival cost c(t) = c1 [t - tbar]+ + c2 [t - T]+ + c3 [T - t]+ around a
/// scheduled time tbar and an effective start T.
struct MeetingModel {
  Point room{0.0, 0.0};
  double c1 = 1.0, c2 = 1.0, c3 = 0.5;
  double tbar = 1.0;
  std::size_t quorum = 1;
  std::vector<Point> agents;
  double congestion = 1.0;

  void validate() const {
    require(c1 >= 0.0 && c2 >= 0.0 && c3 >= 0.0, Errc::InvalidArgument, "cost coefficients must be nonnegative");
    require(c1 + c2 > 0.0, Errc::NegativeSlope, "late arrivals must be penalized (c1 + c2 > 0)");
    require(std::isfinite(tbar) && tbar >= 0.0, Errc::InvalidArgument, "scheduled time must be nonnegative");
    require(quorum >= 1 && quorum <= agents.size(), Errc::InvalidArgument, "quorum must be in [1, agent count]");
    require(congestion > 0.0, Errc::InvalidArgument, "congestion factor must be positive");
  }

  double cost(double t, double T) const {
    return c1 * std::max(0.0, t - tbar) + c2 * std::max(0.0, t - T) + c3 * std::max(0.0, T - t);
  }
};

/// v(t, x) = -2 sqrt(s) d(x, room) - 2 (t_h - t) s - c(t_h) for a regime slope s = c'(t_h).
inline double meeting_value(double t, const Point& x, double t_h, const MeetingModel& m, double T, double slope) {
  require(slope >= 0.0, Errc::NegativeSlope, "regime slope must be nonnegative");
  return -2.0 * std::sqrt(slope) * distance(x, m.room) - 2.0 * (t_h - t) * slope - m.cost(t_h, T);
}

enum class Regime { Present, Early, OnTime, Late, AtSchedule, AtStart };

inline const char* regime_name(Regime r) {
  switch (r) {
    case Regime::Present: return "present";
    case Regime::Early: return "early";
    case Regime::OnTime: return "ontime";
    case Regime::Late: return "late";
    case Regime::AtSchedule: return "at_tbar";
    case Regime::AtStart: return "at_T";
  }
  return "?";
}

struct Arrival {
  double t_h = 0.0;
  double speed = 0.0;
  bool indifferent = false;
};

/// Straight-line arrival at constant speed sqrt(s), t_h = d / sqrt(s).
inline Arrival optimal_arrival(double d, double slope) {
  require(d >= 0.0 && std::isfinite(d), Errc::InvalidArgument, "distance must be nonnegative");
  require(slope >= 0.0, Errc::NegativeSlope, "regime slope must be nonnegative");
  if (slope == 0.0) return {INFINITY, 0.0, true};
  const double v = std::sqrt(slope);
  return {d / v, v, false};
}

/// Total cost of reaching the room at t_h along the straight line: c(t_h) + d^2 / t_h.
inline double arrival_cost(const MeetingModel& m, double d, double t_h, double T) {
  if (d == 0.0) return m.cost(t_h, T);
  return m.cost(t_h, T) + d * d / t_h;
}

struct AgentChoice {
  double t_h = 0.0;
  Regime regime = Regime::Present;
};

/// Exact minimizer of the convex arrival cost given the start time T. A
/// stationary point inside a piece is the global minimizer; otherwise the
/// cheaper kink wins, ties to the earlier time.
inline AgentChoice best_arrival(const MeetingModel& m, double d, double T) {
  require(m.c1 + m.c2 > 0.0, Errc::NegativeSlope, "late arrivals must be penalized (c1 + c2 > 0)");
  if (d == 0.0) return {0.0, Regime::Present};
  const double a = std::min(m.tbar, T), b = std::max(m.tbar, T);
  struct Piece {
    double lo, hi, slope;
    Regime r;
  };
  const bool sched_first = m.tbar <= T;
  const Piece pieces[3] = {
      {0.0, a, -m.c3, Regime::Early},
      {a, b, sched_first ? m.c1 - m.c3 : m.c2, Regime::OnTime},
      {b, INFINITY, m.c1 + m.c2, Regime::Late},
  };
  AgentChoice best{INFINITY, Regime::Late};
  double best_cost = INFINITY;
  auto consider = [&](double t, Regime r) {
    if (!(t > 0.0) || !std::isfinite(t)) return;
    const double c = arrival_cost(m, d, t, T);
    if (c < best_cost || (c == best_cost && t < best.t_h)) {
      best_cost = c;
      best = {t, r};
    }
  };
  for (const auto& p : pieces) {
    if (p.hi <= p.lo) continue;
    const double s = p.slope;
    if (s > 0.0) {
      const double t = d / std::sqrt(s);
      if (t > p.lo && t < p.hi) return {t, p.r};
    }
  }
  consider(m.tbar, Regime::AtSchedule);
  consider(T, Regime::AtStart);
  return best;
}

struct StartTime {
  double T = 0.0;
  std::vector<double> arrivals;
  std::vector<Regime> regimes;
  std::vector<double> trace;  // T iterates
  bool converged = false;
};

/// Quorum time inf{t >= tbar : #arrivals <= t >= quorum}.
inline double quorum_time(const MeetingModel& m, std::vector<double> arrivals) {
  std::nth_element(arrivals.begin(), arrivals.begin() + static_cast<long>(m.quorum - 1), arrivals.end());
  return std::max(m.tbar, arrivals[m.quorum - 1]);
}

/// Damped iteration T <- (T + quorum_time(best responses to T)) / 2.
inline StartTime start_time_fixed_point(const MeetingModel& m, std::size_t iters = 200, double tol = 1e-12) {
  m.validate();
  const std::size_t n = m.agents.size();
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = distance(m.agents[i], m.room);
  StartTime out;
  out.T = m.tbar;
  out.arrivals.resize(n);
  out.regimes.resize(n);
  out.trace.push_back(out.T);
  auto respond = [&](double T) {
    parallel_for(n, [&](std::size_t i) {
      const auto c = best_arrival(m, d[i], T);
      out.arrivals[i] = c.t_h;
      out.regimes[i] = c.regime;
    });
    return quorum_time(m, out.arrivals);
  };
  for (std::size_t k = 0; k < iters; ++k) {
    const double next = respond(out.T);
    if (std::abs(next - out.T) <= tol * std::max(1.0, out.T)) {
      out.converged = true;
      break;
    }
    out.T = 0.5 * (out.T + next);
    out.trace.push_back(out.T);
  }
  if (!out.converged) respond(out.T);
  return out;
}

enum class EikonalFamily { Linear, Cone };

/// v = <x, p> with |p| = 1, or v = offset + sign |x - y|.
struct EikonalParams {
  EikonalFamily family = EikonalFamily::Linear;
  Point p{1.0, 0.0};
  Point y{0.0, 0.0};
  double offset = 0.0;
  double sign = 1.0;

  double value(const Point& x) const {
    if (family == EikonalFamily::Linear) return x[0] * p[0] + x[1] * p[1];
    return offset + sign * distance(x, y);
  }
};

/// Largest | |grad v| - 1 | over the samples using central differences of width h.
inline double eikonal_residual(const EikonalParams& e, const std::vector<Point>& samples, double h = 1e-5) {
  if (e.family == EikonalFamily::Linear)
    require(std::abs(std::hypot(e.p[0], e.p[1]) - 1.0) < 1e-12, Errc::InvalidArgument, "p must have unit norm");
  double worst = 0.0;
  for (const auto& x : samples) {
    if (e.family == EikonalFamily::Cone)
      require(distance(x, e.y) > 100.0 * h, Errc::VertexSample, "sample too close to the cone vertex");
    const double gx = (e.value({x[0] + h, x[1]}) - e.value({x[0] - h, x[1]})) / (2.0 * h);
    const double gy = (e.value({x[0], x[1] + h}) - e.value({x[0], x[1] - h})) / (2.0 * h);
    worst = std::max(worst, std::abs(std::hypot(gx, gy) - 1.0));
  }
  return worst;
}

struct EvacResult {
  double H;
  std::vector<double> u;
};

/// H = |p|^2 / (4 c1(G)) - c2(G), attained at u = p / (2 c1(G)).
inline EvacResult evac_hamiltonian(const std::vector<double>& p, double G, const std::function<double(double)>& c1,
                                   const std::function<double(double)>& c2) {
  const double a = c1(G);
  require(a > 0.0 && std::isfinite(a), Errc::ZeroDenominator, "effort weight c1(G) must be positive");
  double pp = 0.0;
  for (double v : p) pp += v * v;
  EvacResult r{pp / (4.0 * a) - c2(G), std::vector<double>(p.size())};
  for (std::size_t i = 0; i < p.size(); ++i) r.u[i] = p[i] / (2.0 * a);
  return r;
}

/// -c1 |u|^2 - c2 + <p, u>, the quantity maximized by the Hamiltonian.
inline double evac_pre_hamiltonian(const std::vector<double>& p, const std::vector<double>& u, double c1v,
                                   double c2v) {
  double uu = 0.0, pu = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    uu += u[i] * u[i];
    pu += p[i] * u[i];
  }
  return -c1v * uu - c2v + pu;
}

}  // namespace mftg::spatial
