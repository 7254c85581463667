#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "mftg/core/error.hpp"
#include "mftg/core/parallel.hpp"
#include "mftg/core/random.hpp"
#include "mftg/core/root.hpp"

namespace mftg::cloud {

/// n tenants split a resource worth c in proportion to u^alpha and pay p per unit.
struct CloudGame {
  std::size_t n = 2;
  double alpha = 1.0;
  double c = 1.0;
  double p = 1.0;

  void validate() const {
    require(n >= 2, Errc::InvalidArgument, "cloud game needs n >= 2");
    require(c > 0.0 && p > 0.0, Errc::InvalidArgument, "value c and price p must be positive");
    require(alpha >= 0.0 && std::isfinite(alpha), Errc::InvalidArgument, "alpha must be nonnegative");
    require(alpha <= 1.0, Errc::AlphaOutOfRange, "alpha > 1: use participation_cap, no closed-form equilibrium");
  }
};

inline double share_weight(double u, double alpha) { return alpha == 0.0 ? 1.0 : std::pow(u, alpha); }

/// Payoff of one tenant playing u against others with aggregate weight G = sum_j u_j^alpha.
inline double payoff(const CloudGame& g, double u, double G) {
  const double w = share_weight(u, g.alpha);
  const double total = w + G;
  return (total > 0.0 ? g.c * w / total : 0.0) - g.p * u;
}

inline double equilibrium_demand(const CloudGame& g) {
  g.validate();
  const double n = static_cast<double>(g.n);
  return g.alpha * (n - 1.0) * g.c / (n * n * g.p);
}

inline double equilibrium_payoff(const CloudGame& g) {
  const double u = equilibrium_demand(g);
  const double v = g.c / static_cast<double>(g.n) - g.p * u;
  require(v >= 0.0, Errc::NonFinite, "negative equilibrium payoff");
  return v;
}

/// Best response to others' aggregate weight G > 0 via the first-order condition
/// alpha c u^(alpha-1) G = p (u^alpha + G)^2 on [0, c/p].
inline double best_response(const CloudGame& g, double G, double tol = 1e-14) {
  g.validate();
  require(G > 0.0 && std::isfinite(G), Errc::InvalidArgument, "aggregate of others must be positive");
  if (g.alpha == 0.0) return 0.0;
  const double hi = g.c / g.p;
  auto foc = [&](double u) {
    const double w = std::pow(u, g.alpha);
    return g.alpha * g.c * std::pow(u, g.alpha - 1.0) * G - g.p * (w + G) * (w + G);
  };
  const double lo = g.alpha == 1.0 ? 0.0 : 1e-15 * hi;
  if (foc(lo) <= 0.0) return 0.0;
  return bracketed_root(foc, lo, hi, tol * hi);
}

/// Brute-force maximizer of the payoff over `points` equally spaced demands in [0, c/p].
inline double best_response_grid(const CloudGame& g, double G, std::size_t points = 10000) {
  g.validate();
  const double hi = g.c / g.p;
  double best = 0.0, best_v = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points; ++i) {
    const double u = hi * static_cast<double>(i) / static_cast<double>(points - 1);
    const double v = payoff(g, u, G);
    if (v > best_v) {
      best_v = v;
      best = u;
    }
  }
  return best;
}

inline double optimal_price(std::size_t n, double alpha) {
  require(n >= 2, Errc::InvalidArgument, "need n >= 2");
  return alpha * static_cast<double>(n - 1) / static_cast<double>(n);
}

/// Total uptake relative to the resource, n u / c. Equals 1 at the optimal price with c = 1.
inline double efficiency_ratio(const CloudGame& g, double u) { return static_cast<double>(g.n) * u / g.c; }

/// Largest number of active tenants when alpha > 1.
inline double participation_cap(double alpha) {
  require(alpha > 0.0, Errc::InvalidArgument, "alpha must be positive");
  if (alpha <= 1.0) return std::numeric_limits<double>::infinity();
  return std::floor(alpha / (alpha - 1.0));
}

}  // namespace mftg::cloud

namespace mftg::sharing {

struct Edge {
  std::size_t from, to;
  double eps;
};

/// Altruistic throughput-sharing network with exponential utilities -exp(-theta z)/theta.
struct SharingNetwork {
  std::size_t nodes = 0;
  std::vector<Edge> edges;
  std::vector<double> thp;    // ex-ante throughput
  std::vector<double> theta;  // per-node risk aversion

  double capacity() const {
    double s = 0.0;
    for (double v : thp) s += v;
    return s;
  }

  void validate() const {
    require(nodes >= 1 && thp.size() == nodes && theta.size() == nodes, Errc::InvalidArgument,
            "throughput and theta must have one entry per node");
    for (std::size_t i = 0; i < nodes; ++i) {
      require(thp[i] >= 0.0 && std::isfinite(thp[i]), Errc::InvalidArgument, "throughput must be nonnegative");
      require(theta[i] > 0.0 && std::isfinite(theta[i]), Errc::InvalidArgument, "theta must be positive");
    }
    for (const auto& e : edges) {
      require(e.from < nodes && e.to < nodes, Errc::InvalidArgument, "edge endpoint out of range");
      require(e.from != e.to, Errc::InvalidArgument, "self loops are not allowed");
      require(e.eps >= 0.0 && std::isfinite(e.eps), Errc::InvalidArgument, "altruism weight must be nonnegative");
    }
  }

  double marginal(std::size_t i, double z) const { return std::exp(-theta[i] * z); }
  double utility(std::size_t i, double z) const { return -std::exp(-theta[i] * z) / theta[i]; }
};

/// Amount sent along each edge, same order as network.edges.
using Sharing = std::vector<double>;

inline void check_feasible(const SharingNetwork& net, const Sharing& s, double slack = 1e-12) {
  require(s.size() == net.edges.size(), Errc::InfeasibleSharing, "one amount per edge required");
  const double C = net.capacity();
  std::vector<double> out(net.nodes, 0.0);
  for (std::size_t e = 0; e < s.size(); ++e) {
    require(s[e] >= 0.0 && std::isfinite(s[e]), Errc::InfeasibleSharing, "shared amounts must be nonnegative");
    out[net.edges[e].from] += s[e];
  }
  for (double o : out) require(o <= C * (1.0 + slack) + slack, Errc::InfeasibleSharing, "row sum exceeds capacity");
}

/// Ex-post throughput. Each node total is formed with Neumaier summation.
inline std::vector<double> expost_throughput(const SharingNetwork& net, const Sharing& s) {
  net.validate();
  check_feasible(net, s);
  std::vector<std::vector<double>> terms(net.nodes);
  for (std::size_t i = 0; i < net.nodes; ++i) terms[i].push_back(net.thp[i]);
  for (std::size_t e = 0; e < s.size(); ++e) {
    terms[net.edges[e].to].push_back(s[e]);
    terms[net.edges[e].from].push_back(-s[e]);
  }
  std::vector<double> out(net.nodes);
  for (std::size_t i = 0; i < net.nodes; ++i) {
    double sum = 0.0, comp = 0.0;
    for (double x : terms[i]) {
      const double t = sum + x;
      comp += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
      sum = t;
    }
    out[i] = sum + comp;
  }
  return out;
}

/// Sender's payoff: own utility plus weighted utilities of its out-neighbors.
inline double node_payoff(const SharingNetwork& net, const std::vector<double>& post, std::size_t i) {
  double v = net.utility(i, post[i]);
  for (const auto& e : net.edges)
    if (e.from == i) v += e.eps * net.utility(e.to, post[e.to]);
  return v;
}

struct SharingResult {
  Sharing s;
  std::vector<double> throughput;
  std::size_t rounds = 0;
  bool converged = false;
  double kkt_residual = 0.0;
};

/// Largest violation of the first-order conditions. Active edges need
/// r'_i = eps r'_j; idle edges need r'_i >= eps r'_j. Edges whose sender is at
/// the capacity bound are skipped.
inline double kkt_residual(const SharingNetwork& net, const Sharing& s, double active_tol = 1e-12) {
  const auto post = expost_throughput(net, s);
  const double C = net.capacity();
  std::vector<double> out(net.nodes, 0.0);
  for (std::size_t e = 0; e < s.size(); ++e) out[net.edges[e].from] += s[e];
  double worst = 0.0;
  for (std::size_t e = 0; e < s.size(); ++e) {
    const auto& ed = net.edges[e];
    if (out[ed.from] >= C * (1.0 - 1e-12)) continue;
    const double gap = net.marginal(ed.from, post[ed.from]) - ed.eps * net.marginal(ed.to, post[ed.to]);
    worst = std::max(worst, s[e] > active_tol ? std::abs(gap) : std::max(0.0, -gap));
  }
  return worst;
}

/// Gauss-Seidel best responses. Each edge amount is set to the exact maximizer
/// of the sender's concave payoff with all other amounts fixed, projected onto
/// [0, C - other outflow of the sender].
inline SharingResult sharing_equilibrium(const SharingNetwork& net, std::size_t max_rounds = 100000,
                                         double tol = 1e-13, Sharing init = {}) {
  net.validate();
  const double C = net.capacity();
  SharingResult r;
  r.s = init.empty() ? Sharing(net.edges.size(), 0.0) : std::move(init);
  check_feasible(net, r.s);
  auto post = expost_throughput(net, r.s);
  std::vector<double> out(net.nodes, 0.0);
  for (std::size_t e = 0; e < r.s.size(); ++e) out[net.edges[e].from] += r.s[e];

  for (r.rounds = 1; r.rounds <= max_rounds; ++r.rounds) {
    double change = 0.0;
    for (std::size_t e = 0; e < r.s.size(); ++e) {
      const auto& ed = net.edges[e];
      const double old = r.s[e];
      const double A = post[ed.from] + old, B = post[ed.to] - old;
      const double ti = net.theta[ed.from], tj = net.theta[ed.to];
      double x = 0.0;
      if (ed.eps > 0.0) x = (std::log(ed.eps) - tj * B + ti * A) / (ti + tj);
      x = std::clamp(x, 0.0, std::max(0.0, C - (out[ed.from] - old)));
      r.s[e] = x;
      post[ed.from] = A - x;
      post[ed.to] = B + x;
      out[ed.from] += x - old;
      change = std::max(change, std::abs(x - old));
    }
    if (change < tol) {
      r.converged = true;
      break;
    }
  }
  r.rounds = std::min(r.rounds, max_rounds);
  r.throughput = expost_throughput(net, r.s);
  r.kkt_residual = kkt_residual(net, r.s);
  return r;
}

/// Random feasible starting point: each row gets a random split of a random fraction of C.
inline Sharing random_sharing(const SharingNetwork& net, StreamId stream) {
  RandomStream rng(stream);
  const double C = net.capacity();
  std::vector<std::vector<std::size_t>> rows(net.nodes);
  for (std::size_t e = 0; e < net.edges.size(); ++e) rows[net.edges[e].from].push_back(e);
  Sharing s(net.edges.size(), 0.0);
  for (const auto& row : rows) {
    if (row.empty()) continue;
    std::vector<double> w(row.size());
    double tot = 0.0;
    for (double& v : w) tot += (v = rng.uniform());
    const double budget = C * rng.uniform();
    for (std::size_t k = 0; k < row.size(); ++k) s[row[k]] = tot > 0.0 ? budget * w[k] / tot : 0.0;
  }
  return s;
}

struct RestartReport {
  std::vector<SharingResult> runs;
  double throughput_spread = 0.0;  // max over nodes of max - min across restarts
  bool all_converged = true;
};

inline RestartReport sharing_restarts(const SharingNetwork& net, std::size_t restarts, StreamId stream,
                                      std::size_t max_rounds = 100000, double tol = 1e-13) {
  require(restarts >= 1, Errc::InvalidArgument, "need at least one restart");
  RestartReport rep;
  rep.runs.resize(restarts);
  parallel_for(restarts, [&](std::size_t k) {
    rep.runs[k] = sharing_equilibrium(net, max_rounds, tol, random_sharing(net, stream.child(k)));
  });
  for (std::size_t i = 0; i < net.nodes; ++i) {
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& r : rep.runs) {
      lo = std::min(lo, r.throughput[i]);
      hi = std::max(hi, r.throughput[i]);
    }
    rep.throughput_spread = std::max(rep.throughput_spread, hi - lo);
  }
  for (const auto& r : rep.runs) rep.all_converged = rep.all_converged && r.converged;
  return rep;
}

inline double fairness_gap(const std::vector<double>& throughput) {
  const auto [lo, hi] = std::minmax_element(throughput.begin(), throughput.end());
  return *hi - *lo;
}

}  // namespace mftg::sharing
