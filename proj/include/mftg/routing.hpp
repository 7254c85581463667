#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "mftg/core/error.hpp"
#include "mftg/core/simplex.hpp"

namespace mftg::routing {

/// Cost of one route as a function of the incident state x and the route load.
using RouteCost = std::function<double(std::size_t x, double load)>;

namespace costs {

inline RouteCost constant(double c) {
  return [c](std::size_t, double) { return c; };
}
inline RouteCost linear(double k) {
  return [k](std::size_t, double m) { return k * m; };
}
inline RouteCost affine(double c0, double k) {
  return [c0, k](std::size_t, double m) { return c0 + k * m; };
}
/// Free-flow time t0 scaled by (1 + alpha m^power).
inline RouteCost bpr(double t0, double alpha, double power) {
  return [t0, alpha, power](std::size_t, double m) { return t0 * (1.0 + alpha * std::pow(m, power)); };
}
/// One cost table entry per incident state, each an affine function of the load.
inline RouteCost state_table(std::vector<double> c0, std::vector<double> k) {
  return [c0 = std::move(c0), k = std::move(k)](std::size_t x, double m) {
    return c0.at(x) + k.at(x) * m;
  };
}

}  // namespace costs

struct RoutingGame {
  std::vector<RouteCost> routes;
  std::size_t states = 1;
  std::size_t n = 0;  // 0 encodes the continuum population

  std::size_t size() const { return routes.size(); }

  double cost(std::size_t x, std::size_t u, double load) const {
    require(u < routes.size(), Errc::OutOfRange, "route index out of range");
    require(x < states, Errc::OutOfRange, "incident state out of range");
    return routes[u](x, load);
  }

  std::vector<double> cost_vector(std::size_t x, const SimplexVector& m) const {
    require(m.size() == routes.size(), Errc::InvalidArgument, "profile size differs from route count");
    std::vector<double> c(routes.size());
    for (std::size_t u = 0; u < routes.size(); ++u) c[u] = cost(x, u, m[u]);
    return c;
  }

  void validate() const {
    require(routes.size() >= 2, Errc::InvalidArgument, "a routing game needs at least two routes");
    require(states >= 1, Errc::InvalidArgument, "a routing game needs at least one state");
  }

  /// c1(m) = 1, c2(m) = m.
  static RoutingGame pigou() { return RoutingGame{{costs::constant(1.0), costs::linear(1.0)}, 1, 0}; }
};

/// Multiplicative-weights imitative step with rate nu.
inline SimplexVector imitative_update(const SimplexVector& prev, const std::vector<double>& c,
                                      double nu) {
  require(nu > 0.0 && std::isfinite(nu), Errc::InvalidArgument, "learning rate must be positive");
  require(c.size() == prev.size(), Errc::InvalidArgument, "cost vector size differs from simplex");
  // Shift by the smallest finite cost; the common factor cancels in the normalization.
  double cmin = std::numeric_limits<double>::infinity();
  for (std::size_t u = 0; u < c.size(); ++u)
    if (prev[u] > 0.0 && std::isfinite(c[u])) cmin = std::min(cmin, c[u]);
  require(std::isfinite(cmin), Errc::DegenerateSupport, "no mass on a finite-cost route");
  const double log_base = std::log1p(nu);
  std::vector<double> w(c.size());
  for (std::size_t u = 0; u < c.size(); ++u)
    w[u] = (prev[u] > 0.0 && std::isfinite(c[u])) ? prev[u] * std::exp(-(c[u] - cmin) * log_base) : 0.0;
  return SimplexVector::from_mass(std::move(w));
}

/// m(u) [<m, c> - c(u)].
inline std::vector<double> replicator_rhs(const SimplexVector& m, const std::vector<double>& c) {
  require(c.size() == m.size(), Errc::InvalidArgument, "cost vector size differs from simplex");
  double avg = 0.0;
  for (std::size_t u = 0; u < c.size(); ++u) avg += m[u] * c[u];
  std::vector<double> out(c.size());
  for (std::size_t u = 0; u < c.size(); ++u) out[u] = m[u] * (avg - c[u]);
  return out;
}

/// Exact replicator flow for frozen costs: m0(u) exp(-t c(u)) normalized.
inline SimplexVector replicator_closed_form(const SimplexVector& m0, const std::vector<double>& cbar,
                                            double t) {
  require(t >= 0.0, Errc::InvalidArgument, "replicator time must be nonnegative");
  require(cbar.size() == m0.size(), Errc::InvalidArgument, "cost vector size differs from simplex");
  if (t == 0.0) return m0;
  double cmin = std::numeric_limits<double>::infinity();
  for (std::size_t u = 0; u < cbar.size(); ++u)
    if (m0[u] > 0.0) cmin = std::min(cmin, cbar[u]);
  std::vector<double> w(cbar.size());
  for (std::size_t u = 0; u < cbar.size(); ++u)
    w[u] = m0[u] > 0.0 ? m0[u] * std::exp(-t * (cbar[u] - cmin)) : 0.0;
  return SimplexVector::from_mass(std::move(w));
}

struct Violation {
  std::size_t route;
  double weight;
  double cost;
  double best;
};

struct EquilibriumReport {
  bool ok = true;
  std::vector<Violation> violations;
  explicit operator bool() const { return ok; }
};

/// Every route carrying more than tol mass costs at most min cost + tol.
inline EquilibriumReport wardrop_check(const RoutingGame& game, const SimplexVector& m, std::size_t x,
                                       double tol) {
  const auto c = game.cost_vector(x, m);
  const double best = *std::min_element(c.begin(), c.end());
  EquilibriumReport rep;
  for (std::size_t u = 0; u < c.size(); ++u) {
    if (m[u] > tol && c[u] > best + tol) {
      rep.ok = false;
      rep.violations.push_back({u, m[u], c[u], best});
    }
  }
  return rep;
}

/// Finite-population Nash check. A deviating agent adds its own 1/n to the target route.
inline EquilibriumReport finite_equilibrium_check(const RoutingGame& game,
                                                  const std::vector<std::size_t>& assignment,
                                                  std::size_t x, double tol) {
  const std::size_t n = assignment.size();
  require(n >= 1, Errc::InvalidArgument, "finite check needs at least one agent");
  std::vector<std::size_t> count(game.size(), 0);
  for (std::size_t u : assignment) {
    require(u < game.size(), Errc::OutOfRange, "assigned route out of range");
    ++count[u];
  }
  const double share = 1.0 / static_cast<double>(n);
  EquilibriumReport rep;
  for (std::size_t u = 0; u < game.size(); ++u) {
    if (count[u] == 0) continue;
    const double current = game.cost(x, u, count[u] * share);
    for (std::size_t v = 0; v < game.size(); ++v) {
      if (v == u) continue;
      const double deviation = game.cost(x, v, count[v] * share + share);
      if (deviation < current - tol) {
        rep.ok = false;
        rep.violations.push_back({u, count[u] * share, current, deviation});
      }
    }
  }
  return rep;
}

enum class LearningMode { Imitative, Replicator };
enum class CostSignal { Realized, TimeAverage };

struct StrategyState {
  std::vector<SimplexVector> strategies;  // one per agent
  std::vector<double> rates;              // nu per agent
  std::vector<std::vector<double>> cbar;  // running averages, filled by run_learning
};

struct LearningTrajectory {
  std::vector<std::vector<SimplexVector>> strategies;  // [round][agent]
  std::vector<SimplexVector> population;               // average profile per round
  std::vector<std::vector<double>> costs;              // realized route costs per round
};

/// Population profile induced by averaging all agents' mixed strategies.
inline SimplexVector population_profile(const std::vector<SimplexVector>& s) {
  require(!s.empty(), Errc::InvalidArgument, "empty strategy state");
  std::vector<double> acc(s.front().size(), 0.0);
  for (const auto& m : s)
    for (std::size_t u = 0; u < acc.size(); ++u) acc[u] += m[u];
  return SimplexVector::from_mass(std::move(acc));
}

/// Synchronous learning rounds. Costs come from the population profile in
/// incident state `state(round)`. Replicator mode applies the exact frozen-cost
/// flow over a duration equal to the agent's rate.
inline LearningTrajectory run_learning(const RoutingGame& game, StrategyState init,
                                       std::size_t horizon, LearningMode mode,
                                       CostSignal signal = CostSignal::Realized,
                                       const std::function<std::size_t(std::size_t)>& state =
                                           [](std::size_t) { return std::size_t{0}; }) {
  game.validate();
  require(horizon >= 1, Errc::InvalidArgument, "learning horizon must be >= 1");
  const std::size_t agents = init.strategies.size();
  require(agents >= 1 && init.rates.size() == agents, Errc::InvalidArgument,
          "one learning rate per agent required");
  for (const auto& m : init.strategies)
    require(m.size() == game.size(), Errc::InvalidArgument, "strategy size differs from route count");
  init.cbar.assign(agents, std::vector<double>(game.size(), 0.0));

  LearningTrajectory out;
  out.strategies.push_back(init.strategies);
  out.population.push_back(population_profile(init.strategies));
  for (std::size_t t = 1; t <= horizon; ++t) {
    const auto realized = game.cost_vector(state(t - 1), out.population.back());
    out.costs.push_back(realized);
    std::vector<SimplexVector> next(agents);
    for (std::size_t i = 0; i < agents; ++i) {
      auto& avg = init.cbar[i];
      for (std::size_t u = 0; u < avg.size(); ++u)
        avg[u] += (realized[u] - avg[u]) / static_cast<double>(t);
      const auto& signal_costs = signal == CostSignal::Realized ? realized : avg;
      next[i] = mode == LearningMode::Imitative
                    ? imitative_update(init.strategies[i], signal_costs, init.rates[i])
                    : replicator_closed_form(init.strategies[i], signal_costs, init.rates[i]);
    }
    init.strategies = std::move(next);
    out.strategies.push_back(init.strategies);
    out.population.push_back(population_profile(init.strategies));
  }
  return out;
}

/// Two routes c1 = 1 + 2m, c2 = 2 + m; the Wardrop split is m1 = 2/3.
inline RoutingGame congestion_instance() {
  return RoutingGame{{costs::affine(1.0, 2.0), costs::affine(2.0, 1.0)}, 1, 0};
}

/// Named catalog used by the config loader.
inline RouteCost make_cost(const std::string& kind, const std::vector<double>& p) {
  auto need = [&](std::size_t k) {
    require(p.size() == k, Errc::ConfigInvalid, "cost '" + kind + "' expects " + std::to_string(k) + " coefficients");
  };
  if (kind == "constant") return need(1), costs::constant(p[0]);
  if (kind == "linear") return need(1), costs::linear(p[0]);
  if (kind == "affine") return need(2), costs::affine(p[0], p[1]);
  if (kind == "bpr") return need(3), costs::bpr(p[0], p[1], p[2]);
  throw Error(Errc::ConfigInvalid, "unknown cost function '" + kind + "'");
}

}  // namespace mftg::routing
