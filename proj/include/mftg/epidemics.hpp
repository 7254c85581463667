#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "mftg/core/error.hpp"
#include "mftg/core/integrate.hpp"
#include "mftg/core/path.hpp"
#include "mftg/core/random.hpp"
#include "mftg/core/simplex.hpp"
#include "mftg/core/time_grid.hpp"

namespace mftg::epidemics {

/// Compartment order: dormant (type 1, type 2), corrupt (type 1, type 2), honest.
enum Compartment : std::size_t { D1 = 0, D2 = 1, C1 = 2, C2 = 3, H = 4 };
inline constexpr std::size_t kCompartments = 5;

struct VirusParams {
  double delta_D = 0.1;
  double delta_C = 0.1;
  double delta_H = 0.05;
  double delta_Sm = 0.2;
  double delta_e = 0.5;
  double delta_m = 0.5;
  double lambda = 0.3;
  double beta = 0.4;
  double eta = 0.3;
  double q1 = 0.2;
  double q2 = 0.2;

  void validate() const {
    for (double v : {delta_D, delta_C, delta_H, delta_Sm, delta_e, delta_m, lambda, beta, eta})
      require(v >= 0.0 && v <= 1.0, Errc::InvalidArgument, "virus probabilities must lie in [0, 1]");
    require(q1 > 0.0 && q1 <= 1.0 && q2 > 0.0 && q2 <= 1.0, Errc::InvalidArgument,
            "q must lie in (0, 1]");
  }

  VirusParams with_controls(double de, double dm) const {
    VirusParams p = *this;
    p.delta_e = de;
    p.delta_m = dm;
    return p;
  }
};

/// Population shares m = (d1, d2, c1, c2, h).
using PopulationState = SimplexVector;

namespace detail {

// Shared evaluation of the drift; `pair_offset` is 1/n for the finite population, 0 in the limit.
inline State drift_impl(const State& m, const VirusParams& p, double pair_offset) {
  const double d1 = m[D1], d2 = m[D2], c1 = m[C1], c2 = m[C2], h = m[H];
  const double d = d1 + d2, c = c1 + c2;
  const double meet = p.delta_e * p.delta_Sm + p.delta_m * p.eta * d;
  const double infect = p.delta_H + (1.0 - p.delta_H) * c;
  const double pair1 = 2.0 * d1 * p.delta_m * p.delta_m * p.lambda * (d1 - pair_offset);
  const double pair2 = 2.0 * d2 * p.delta_m * p.delta_m * p.lambda * (d2 - pair_offset);
  const double wake1 = c1 * p.beta * d1 / (p.q1 + d1);
  const double wake2 = c2 * p.beta * d2 / (p.q2 + d2);
  State f(kCompartments);
  f[D1] = -d1 * p.delta_D - pair1 - wake1 + h * meet;
  f[D2] = -d2 * p.delta_D - pair2 - wake2 + h * meet;
  f[C1] = pair1 - c1 * p.delta_C + wake1 + h * infect;
  f[C2] = pair2 - c2 * p.delta_C + wake2 + h * infect;
  f[H] = d * p.delta_D + c * p.delta_C - 2.0 * h * infect - 2.0 * h * meet;
  return f;
}

}  // namespace detail

/// Mean-field drift f(m).
inline State virus_drift(const State& m, const VirusParams& p) {
  require(m.size() == kCompartments, Errc::InvalidArgument, "population state has 5 components");
  return detail::drift_impl(m, p, 0.0);
}

inline State virus_drift(const PopulationState& m, const VirusParams& p) {
  return virus_drift(m.weights(), p);
}

/// Expected one-step change scaled by n for a population of n nodes.
inline State finite_drift(const State& m, const VirusParams& p, std::size_t n) {
  require(n >= 2, Errc::InvalidArgument, "finite drift needs n >= 2");
  require(m.size() == kCompartments, Errc::InvalidArgument, "population state has 5 components");
  return detail::drift_impl(m, p, 1.0 / static_cast<double>(n));
}

using Jacobian = Eigen::Matrix<double, 5, 5>;

/// Analytic df/dm; row i is the gradient of f_i.
inline Jacobian virus_jacobian(const State& m, const VirusParams& p) {
  const double d1 = m[D1], d2 = m[D2], c1 = m[C1], c2 = m[C2], h = m[H];
  const double d = d1 + d2, c = c1 + c2;
  const double meet = p.delta_e * p.delta_Sm + p.delta_m * p.eta * d;
  const double infect = p.delta_H + (1.0 - p.delta_H) * c;
  const double lm = p.lambda * p.delta_m * p.delta_m;
  const double g1 = d1 / (p.q1 + d1), g2 = d2 / (p.q2 + d2);
  const double g1p = p.q1 / ((p.q1 + d1) * (p.q1 + d1));
  const double g2p = p.q2 / ((p.q2 + d2) * (p.q2 + d2));
  const double hm = h * p.delta_m * p.eta;
  const double hc = h * (1.0 - p.delta_H);
  Jacobian J = Jacobian::Zero();
  J(D1, D1) = -p.delta_D - 4.0 * lm * d1 - c1 * p.beta * g1p + hm;
  J(D1, D2) = hm;
  J(D1, C1) = -p.beta * g1;
  J(D1, H) = meet;
  J(D2, D1) = hm;
  J(D2, D2) = -p.delta_D - 4.0 * lm * d2 - c2 * p.beta * g2p + hm;
  J(D2, C2) = -p.beta * g2;
  J(D2, H) = meet;
  J(C1, D1) = 4.0 * lm * d1 + c1 * p.beta * g1p;
  J(C1, C1) = -p.delta_C + p.beta * g1 + hc;
  J(C1, C2) = hc;
  J(C1, H) = infect;
  J(C2, D2) = 4.0 * lm * d2 + c2 * p.beta * g2p;
  J(C2, C1) = hc;
  J(C2, C2) = -p.delta_C + p.beta * g2 + hc;
  J(C2, H) = infect;
  J(H, D1) = p.delta_D - 2.0 * hm;
  J(H, D2) = p.delta_D - 2.0 * hm;
  J(H, C1) = p.delta_C - 2.0 * hc;
  J(H, C2) = p.delta_C - 2.0 * hc;
  J(H, H) = -2.0 * infect - 2.0 * meet;
  return J;
}

/// Costate dynamics for maximizing h(T) + int h dt: p' = -J^T p - e_h.
inline State adjoint_rhs(const State& m, const State& p, const VirusParams& params) {
  require(p.size() == kCompartments, Errc::InvalidArgument, "costate has 5 components");
  const Jacobian J = virus_jacobian(m, params);
  State out(kCompartments);
  for (std::size_t j = 0; j < kCompartments; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < kCompartments; ++i) s += J(i, j) * p[i];
    out[j] = -s;
  }
  out[H] -= 1.0;
  return out;
}

/// Time-varying (delta_e, delta_m); empty functions fall back to the params.
struct ControlSchedule {
  TimeFn delta_e;
  TimeFn delta_m;

  VirusParams at(const VirusParams& p, double t) const {
    return p.with_controls(delta_e ? delta_e(t) : p.delta_e, delta_m ? delta_m(t) : p.delta_m);
  }
};

/// Dormant and corrupt mass split evenly over the two types.
inline PopulationState from_aggregates(double d, double c) {
  require(d >= 0.0 && c >= 0.0 && d + c <= 1.0, Errc::InvalidArgument,
          "aggregate shares must be nonnegative and sum to at most one");
  return SimplexVector::from_mass({d / 2, d / 2, c / 2, c / 2, 1.0 - d - c});
}

inline Path simulate_population_ode(const VirusParams& p, const PopulationState& m0, const TimeGrid& grid,
                                    const ControlSchedule& controls = {}) {
  p.validate();
  require(m0.size() == kCompartments, Errc::InvalidArgument, "population state has 5 components");
  return rk4_integrate([&](double t, const State& m) { return virus_drift(m, controls.at(p, t)); },
                       m0.weights(), grid);
}

/// Time-averaged honest share (trapezoid) over a path.
inline double time_average_h(const Path& path) {
  const auto& g = path.grid;
  double acc = 0.0;
  for (std::size_t k = 0; k < g.steps(); ++k) acc += 0.5 * (path[k][H] + path[k + 1][H]) * g.step();
  return acc / (g.horizon() - g.t0());
}

/// Interior rest point: long RK4 run from `guess`, then Newton on f_1..f_4 plus sum(m) = 1.
inline PopulationState find_steady_state(const VirusParams& p, const PopulationState& guess,
                                         double settle_time = 200.0) {
  const Path warm = simulate_population_ode(p, guess, TimeGrid(0.0, settle_time, 4000));
  Eigen::Matrix<double, 5, 1> x;
  for (std::size_t j = 0; j < kCompartments; ++j) x(j) = warm.back()[j];
  for (int it = 0; it < 50; ++it) {
    State m(x.data(), x.data() + 5);
    const State f = virus_drift(m, p);
    Eigen::Matrix<double, 5, 1> F;
    for (std::size_t j = 0; j < 4; ++j) F(j) = f[j];
    F(4) = x.sum() - 1.0;
    if (F.cwiseAbs().maxCoeff() < 1e-15) break;
    Jacobian J = virus_jacobian(m, p);
    J.row(4).setOnes();
    const Eigen::Matrix<double, 5, 1> dx = J.fullPivLu().solve(F);
    require(dx.allFinite(), Errc::SingularStep, "steady-state Newton step is singular");
    x -= dx;
  }
  std::vector<double> w(5);
  for (std::size_t j = 0; j < 5; ++j) w[j] = std::max(0.0, x(j));
  return SimplexVector::from_mass(std::move(w));
}

namespace detail {

// Largest total event rate a single node can carry; used as the uniformization constant.
inline double max_node_rate(const VirusParams& p) {
  // Opportunity rates before the Bernoulli action draws.
  const double dormant = p.delta_D + p.lambda;
  const double corrupt = p.delta_C + p.beta;
  const double honest = 1.0 + p.delta_Sm + p.eta;
  return std::max({dormant, corrupt, honest, 1e-12});
}

inline std::array<std::int64_t, 5> round_counts(const PopulationState& m0, std::size_t n) {
  std::array<std::int64_t, 5> cnt{};
  std::int64_t total = 0;
  for (std::size_t j = 0; j < 4; ++j) {
    cnt[j] = std::llround(m0[j] * static_cast<double>(n));
    total += cnt[j];
  }
  cnt[H] = static_cast<std::int64_t>(n) - total;
  require(cnt[H] >= 0, Errc::InvalidArgument, "initial shares do not round to n nodes");
  return cnt;
}

}  // namespace detail

/// Well-mixed n-node Markov chain, uniformized: each micro-step picks one node
/// uniformly and lets it fire one of its events with probability rate / Lambda.
/// Micro-steps last 1/(n Lambda) time units. Meeting and sharing decisions are
/// Bernoulli draws with success probabilities delta_m and delta_e.
/// Returns the empirical shares at every grid point.
inline Path simulate_agents(const VirusParams& p, std::size_t n, const PopulationState& m0,
                            const TimeGrid& grid, StreamId stream) {
  p.validate();
  require(n >= 2, Errc::InvalidArgument, "agent simulation needs n >= 2");
  auto cnt = detail::round_counts(m0, n);
  RandomStream rng(stream);
  const double Lambda = detail::max_node_rate(p);
  const double nn = static_cast<double>(n);
  const double dt = 1.0 / (nn * Lambda);

  Path out(grid, kCompartments);
  auto record = [&](std::size_t k) {
    for (std::size_t j = 0; j < kCompartments; ++j) out[k][j] = static_cast<double>(cnt[j]) / nn;
  };
  record(0);
  std::size_t micro = 0;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double target = grid.time(k);
    while (grid.t0() + static_cast<double>(micro + 1) * dt <= target + 1e-12 * dt) {
      ++micro;
      std::int64_t pick = static_cast<std::int64_t>(rng.below(n));
      std::size_t cls = 0;
      while (pick >= cnt[cls]) pick -= cnt[cls++];
      const double u = rng.uniform() * Lambda;
      const double d1 = cnt[D1] / nn, d2 = cnt[D2] / nn;
      const double c = (cnt[C1] + cnt[C2]) / nn;
      if (cls == D1 || cls == D2) {
        const std::size_t self = cls, corrupt = cls + 2;
        const double own = cnt[self] / nn;
        const double meet = p.lambda * std::max(0.0, own - 1.0 / nn);
        if (u < p.delta_D) {
          --cnt[self];
          ++cnt[H];
        } else if (u < p.delta_D + meet && cnt[self] >= 2 && rng.bernoulli(p.delta_m) &&
                   rng.bernoulli(p.delta_m)) {
          cnt[self] -= 2;
          cnt[corrupt] += 2;
        }
      } else if (cls == C1 || cls == C2) {
        const std::size_t self = cls, dormant = cls - 2;
        const double dd = dormant == D1 ? d1 : d2;
        const double qq = dormant == D1 ? p.q1 : p.q2;
        if (u < p.delta_C) {
          --cnt[self];
          ++cnt[H];
        } else if (u < p.delta_C + p.beta * dd / (qq + dd) && cnt[dormant] > 0) {
          // The drift moves this mass from D to C: the corrupt node recruits a dormant one.
          --cnt[dormant];
          ++cnt[self];
        }
      } else {
        const double infect = p.delta_H + (1.0 - p.delta_H) * c;
        const double share = p.delta_Sm;
        const double meet = p.eta * (d1 + d2);
        std::size_t to = kCompartments;  // none
        if (u < infect) {
          to = C1;
        } else if (u < infect + share) {
          if (rng.bernoulli(p.delta_e)) to = D1;
        } else if (u < infect + share + meet) {
          if (rng.bernoulli(p.delta_m)) to = D1;
        }
        if (to != kCompartments) {
          if (cnt[H] >= 2) {
            cnt[H] -= 2;
            ++cnt[to];
            ++cnt[to + 1];
          } else {
            --cnt[H];
            ++cnt[to + rng.below(2)];
          }
        }
      }
    }
    record(k);
  }
  return out;
}

/// Symmetric 0/1 adjacency stored as neighbor lists.
struct Graph {
  std::vector<std::vector<std::size_t>> neighbors;

  std::size_t size() const { return neighbors.size(); }

  static Graph from_adjacency(const std::vector<std::vector<int>>& adj) {
    Graph g;
    const std::size_t n = adj.size();
    g.neighbors.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      require(adj[i].size() == n, Errc::InvalidArgument, "adjacency matrix must be square");
      require(adj[i][i] == 0, Errc::InvalidArgument, "adjacency diagonal must be zero");
      for (std::size_t j = 0; j < n; ++j) {
        require(adj[i][j] == 0 || adj[i][j] == 1, Errc::InvalidArgument, "adjacency entries must be 0/1");
        require(adj[i][j] == adj[j][i], Errc::InvalidArgument, "adjacency must be symmetric");
        if (adj[i][j]) g.neighbors[i].push_back(j);
      }
    }
    return g;
  }

  static Graph complete(std::size_t n) {
    Graph g;
    g.neighbors.resize(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) g.neighbors[i].push_back(j);
    return g;
  }

  static Graph empty(std::size_t n) {
    Graph g;
    g.neighbors.resize(n);
    return g;
  }

  /// Erdos-Renyi graph with the given expected degree.
  static Graph random(std::size_t n, double mean_degree, StreamId stream) {
    RandomStream rng(stream);
    const double prob = n > 1 ? mean_degree / static_cast<double>(n - 1) : 0.0;
    Graph g;
    g.neighbors.resize(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (rng.bernoulli(prob)) {
          g.neighbors[i].push_back(j);
          g.neighbors[j].push_back(i);
        }
    return g;
  }
};

struct GraphRun {
  std::vector<std::vector<int>> states;  // [grid point][node]
  Path shares;                           // compartment shares per grid point
  bool isolated_nodes = false;           // some node has degree 0
};

/// Same event rules as simulate_agents, with population shares replaced by the
/// shares among a node's neighbors and partners drawn from its neighbors.
inline GraphRun simulate_graph(const Graph& graph, const VirusParams& p, std::vector<int> state,
                               const TimeGrid& grid, StreamId stream) {
  p.validate();
  const std::size_t n = graph.size();
  require(n >= 2 && state.size() == n, Errc::InvalidArgument, "one initial state per node required");
  for (int s : state)
    require(s >= 0 && s < static_cast<int>(kCompartments), Errc::InvalidArgument, "node state out of range");
  GraphRun run{{}, Path(grid, kCompartments), false};
  for (const auto& nb : graph.neighbors)
    if (nb.empty()) run.isolated_nodes = true;

  RandomStream rng(stream);
  const double Lambda = detail::max_node_rate(p);
  const double dt = 1.0 / (static_cast<double>(n) * Lambda);
  auto record = [&](std::size_t k) {
    run.states.push_back(state);
    State share(kCompartments, 0.0);
    for (int s : state) share[static_cast<std::size_t>(s)] += 1.0 / static_cast<double>(n);
    run.shares[k] = share;
  };
  record(0);
  std::vector<std::size_t> pool;
  auto pick_neighbor = [&](std::size_t i, auto&& accept) -> std::ptrdiff_t {
    pool.clear();
    for (std::size_t j : graph.neighbors[i])
      if (accept(state[j])) pool.push_back(j);
    if (pool.empty()) return -1;
    return static_cast<std::ptrdiff_t>(pool[rng.below(pool.size())]);
  };

  std::size_t micro = 0;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double target = grid.time(k);
    while (grid.t0() + static_cast<double>(micro + 1) * dt <= target + 1e-12 * dt) {
      ++micro;
      const std::size_t i = rng.below(n);
      const double u = rng.uniform() * Lambda;
      const auto& nb = graph.neighbors[i];
      std::array<double, kCompartments> frac{};
      for (std::size_t j : nb) frac[static_cast<std::size_t>(state[j])] += 1.0;
      if (!nb.empty())
        for (double& f : frac) f /= static_cast<double>(nb.size());
      const int s = state[i];
      if (s == D1 || s == D2) {
        if (u < p.delta_D) {
          state[i] = H;
        } else if (u < p.delta_D + p.lambda * frac[s] && rng.bernoulli(p.delta_m) &&
                   rng.bernoulli(p.delta_m)) {
          const auto j = pick_neighbor(i, [s](int x) { return x == s; });
          if (j >= 0) {
            state[i] = s + 2;
            state[static_cast<std::size_t>(j)] = s + 2;
          }
        }
      } else if (s == C1 || s == C2) {
        const double dd = frac[s - 2];
        const double qq = s == C1 ? p.q1 : p.q2;
        if (u < p.delta_C) {
          state[i] = H;
        } else if (u < p.delta_C + p.beta * dd / (qq + dd)) {
          const auto j = pick_neighbor(i, [s](int x) { return x == s - 2; });
          if (j >= 0) state[static_cast<std::size_t>(j)] = s;
        }
      } else {
        const double infect = p.delta_H + (1.0 - p.delta_H) * (frac[C1] + frac[C2]);
        const double share = p.delta_Sm;
        const double meet = p.eta * (frac[D1] + frac[D2]);
        int to = -1;
        if (u < infect) {
          to = C1;
        } else if (u < infect + share) {
          if (rng.bernoulli(p.delta_e)) to = D1;
        } else if (u < infect + share + meet) {
          if (rng.bernoulli(p.delta_m)) to = D1;
        }
        if (to >= 0) {
          const auto j = pick_neighbor(i, [](int x) { return x == H; });
          if (j >= 0) {
            state[i] = to;
            state[static_cast<std::size_t>(j)] = to + 1;
          } else {
            state[i] = to + static_cast<int>(rng.below(2));
          }
        }
      }
    }
    record(k);
  }
  return run;
}

/// h(T) + int_0^T h dt (trapezoid).
inline double control_objective(const Path& m) {
  const auto& g = m.grid;
  double acc = m.back()[H];
  for (std::size_t k = 0; k < g.steps(); ++k) acc += 0.5 * (m[k][H] + m[k + 1][H]) * g.step();
  return acc;
}

struct ControlResult {
  std::vector<double> delta_e, delta_m;  // per grid point
  Path state;
  Path costate;
  double objective = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  bool indifferent = false;
};

namespace detail {

inline ControlSchedule schedule_from(const TimeGrid& g, const std::vector<double>& de,
                                     const std::vector<double>& dm) {
  auto interp = [g](const std::vector<double>& v) {
    return [g, v](double t) {
      const double s = (t - g.t0()) / g.step();
      const auto k = static_cast<std::size_t>(std::clamp(std::floor(s), 0.0, double(g.steps() - 1)));
      const double w = s - static_cast<double>(k);
      return (1.0 - w) * v[k] + w * v[k + 1];
    };
  };
  return {interp(de), interp(dm)};
}

inline State interp_state(const Path& path, double t) {
  const auto& g = path.grid;
  const double s = (t - g.t0()) / g.step();
  const auto k = static_cast<std::size_t>(std::clamp(std::floor(s), 0.0, double(g.steps() - 1)));
  const double w = s - static_cast<double>(k);
  State out(path.dim());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = (1.0 - w) * path[k][j] + w * path[k + 1][j];
  return out;
}

inline Path solve_costate(const VirusParams& p, const Path& m, const ControlSchedule& ctl) {
  const TimeGrid& g = m.grid;
  const double T = g.horizon();
  State terminal(kCompartments, 0.0);
  terminal[H] = 1.0;
  const Path rev = rk4_integrate(
      [&](double s, const State& y) {
        const double t = T - s;
        State d = adjoint_rhs(interp_state(m, t), y, ctl.at(p, t));
        for (double& v : d) v = -v;
        return d;
      },
      terminal, g.reversed());
  Path out(g, kCompartments);
  for (std::size_t k = 0; k < g.size(); ++k) out[k] = rev[g.steps() - k];
  return out;
}

// Hamiltonian h + <f, p>. It is affine in delta_e and quadratic in delta_m with
// no cross term, so four evaluations tabulate it exactly.
struct HamiltonianSlice {
  double c0, ce, cm, cmm;
  double operator()(double de, double dm) const { return c0 + ce * de + cm * dm + cmm * dm * dm; }
};

inline HamiltonianSlice hamiltonian_slice(const VirusParams& p, const State& m, const State& pc) {
  auto H = [&](double de, double dm) {
    const State f = virus_drift(m, p.with_controls(de, dm));
    double v = m[4];
    for (std::size_t j = 0; j < kCompartments; ++j) v += f[j] * pc[j];
    return v;
  };
  const double h00 = H(0, 0), h10 = H(1, 0), h01 = H(0, 1), h0half = H(0, 0.5);
  // h01 = c0 + cm + cmm, h0half = c0 + cm/2 + cmm/4.
  const double cmm = 2.0 * (h01 - 2.0 * h0half + h00);
  const double cm = h01 - h00 - cmm;
  return {h00, h10 - h00, cm, cmm};
}

// 101 x 101 grid on [0,1]^2, then three rounds of local refinement.
inline std::pair<double, double> maximize_on_square(const HamiltonianSlice& Hs) {
  double best_e = 0.0, best_m = 0.0, best = -INFINITY;
  auto scan = [&](double e_lo, double e_hi, double m_lo, double m_hi, int pts) {
    for (int a = 0; a < pts; ++a) {
      const double de = e_lo + (e_hi - e_lo) * a / (pts - 1);
      for (int b = 0; b < pts; ++b) {
        const double dm = m_lo + (m_hi - m_lo) * b / (pts - 1);
        const double v = Hs(de, dm);
        if (v > best + 1e-15) {
          best = v;
          best_e = de;
          best_m = dm;
        }
      }
    }
  };
  scan(0, 1, 0, 1, 101);
  double width = 0.01;
  for (int round = 0; round < 3; ++round) {
    scan(std::max(0.0, best_e - width), std::min(1.0, best_e + width), std::max(0.0, best_m - width),
         std::min(1.0, best_m + width), 21);
    width /= 10.0;
  }
  return {best_e, best_m};
}

}  // namespace detail

/// Forward-backward sweep for sup h(T) + int h dt over (delta_e, delta_m) in [0,1]^2.
/// Starts from the params' constant controls and relaxes each update with `relax`.
inline ControlResult optimize_control(const VirusParams& p, const PopulationState& m0,
                                      const TimeGrid& grid, std::size_t sweep_iters = 100,
                                      double relax = 0.5) {
  p.validate();
  require(relax > 0.0 && relax <= 1.0, Errc::InvalidArgument, "relaxation must lie in (0, 1]");
  const std::size_t N = grid.size();
  std::vector<double> de(N, p.delta_e), dm(N, p.delta_m);

  ControlResult best{{}, {}, Path(grid, kCompartments), Path(grid, kCompartments)};
  best.objective = -INFINITY;
  bool any_sensitivity = false;

  for (std::size_t it = 0; it <= sweep_iters; ++it) {
    const auto ctl = detail::schedule_from(grid, de, dm);
    const Path m = simulate_population_ode(p, m0, grid, ctl);
    const double J = control_objective(m);
    const Path pc = detail::solve_costate(p, m, ctl);
    if (J > best.objective) {
      best.objective = J;
      best.delta_e = de;
      best.delta_m = dm;
      best.state = m;
      best.costate = pc;
    }
    best.iterations = it;
    if (it == sweep_iters) break;

    double change = 0.0;
    std::vector<double> ne(N), nm(N), pe(N), pm(N);
    for (std::size_t k = 0; k < N; ++k) {
      const auto Hs = detail::hamiltonian_slice(p, m[k], pc[k]);
      if (std::abs(Hs.ce) + std::abs(Hs.cm) + std::abs(Hs.cmm) > 1e-13) any_sensitivity = true;
      const auto [e_star, m_star] = detail::maximize_on_square(Hs);
      pe[k] = e_star;
      pm[k] = m_star;
      ne[k] = (1.0 - relax) * de[k] + relax * e_star;
      nm[k] = (1.0 - relax) * dm[k] + relax * m_star;
      change = std::max({change, std::abs(ne[k] - de[k]), std::abs(nm[k] - dm[k])});
    }
    if (!any_sensitivity) {
      best.indifferent = true;
      best.converged = true;
      return best;
    }
    de = std::move(ne);
    dm = std::move(nm);
    if (change < 1e-4) {
      // Try both the relaxed iterate and the unrelaxed pointwise maximizer.
      for (const auto* cand : {&de, &pe}) {
        const auto& ce = *cand;
        const auto& cm = cand == &de ? dm : pm;
        const auto ctl2 = detail::schedule_from(grid, ce, cm);
        const Path m2 = simulate_population_ode(p, m0, grid, ctl2);
        const double J2 = control_objective(m2);
        if (J2 >= best.objective) {
          best.objective = J2;
          best.delta_e = ce;
          best.delta_m = cm;
          best.state = m2;
          best.costate = detail::solve_costate(p, m2, ctl2);
        }
      }
      best.converged = true;
      best.iterations = it + 1;
      return best;
    }
  }
  return best;
}

/// Objective of constant controls, for comparison with the optimizer.
inline double fixed_control_objective(const VirusParams& p, const PopulationState& m0,
                                      const TimeGrid& grid) {
  return control_objective(simulate_population_ode(p, m0, grid));
}

}  // namespace mftg::epidemics
