#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "mftg/cli/config.hpp"
#include "mftg/cli/table.hpp"
#include "mftg/cloud_sharing.hpp"
#include "mftg/coupled.hpp"
#include "mftg/delayed.hpp"
#include "mftg/dispatch.hpp"
#include "mftg/epidemics.hpp"
#include "mftg/lq/mean_variance.hpp"
#include "mftg/lq/security.hpp"
#include "mftg/routing.hpp"
#include "mftg/spatial.hpp"

namespace mftg::cli {

/// Validated scenario, ready to run for a given seed. The first table is the
/// primary output.
using Job = std::function<std::vector<Table>(std::uint64_t seed)>;

struct Scenario {
  std::string name;
  std::string description;
  std::function<Job(const Params&)> prepare;  // parses and validates, no heavy work
};

inline std::string default_config_path(const std::string& name) {
#ifdef MFTG_CONFIG_DIR
  return std::string(MFTG_CONFIG_DIR) + "/" + name + ".json";
#else
  return "configs/" + name + ".json";
#endif
}

namespace scenarios {

inline std::int64_t idx(std::size_t k) { return static_cast<std::int64_t>(k); }

inline std::size_t stride_of(const Params& p, std::size_t steps) {
  const std::size_t s = p.count("stride", 1, 1);
  if (steps % s != 0) p.fail("stride", "must divide steps");
  return s;
}

inline Job security(const Params& p) {
  const std::size_t n = p.count("agents", 1, 1, 1000);
  auto m = lq::SecurityModel::symmetric(n, p.num("a", 0.5), p.num("abar", 0.1), p.num("c", 0.3), p.num("b", 5.0),
                                        p.nonneg("q", 1.0), p.nonneg("eps", 0.1), p.nonneg("rho", 1e-4),
                                        p.positive("r", 1.0), p.num("x0", 1.0));
  const TimeGrid grid(0.0, p.positive("horizon", 1.0), p.count("steps", 256, 1, 10000000));
  const std::size_t paths = p.count("paths", 1000, 1, 10000000);
  m.validate(grid);
  return [=](std::uint64_t seed) {
    const auto sol = lq::solve_security_riccati(m, grid);
    const auto st = lq::simulate_security(m, sol, paths, StreamId{seed, 0});
    Table main{"security", {"t", "cost", "mean", "variance"}, {}};
    Table ric{"riccati", {"t", "beta", "eta1", "eta2"}, {}};
    for (std::size_t k = 0; k < grid.size(); ++k) {
      main.add({grid.time(k), st.cost[k], st.mean[k], st.variance[k]});
      ric.add({grid.time(k), sol.beta[0][k], sol.eta1[0][k], sol.eta2[0][k]});
    }
    return std::vector<Table>{main, ric};
  };
}

inline Job meanvar(const Params& p) {
  auto m = lq::MeanVarianceModel::symmetric(
      p.count("horizon", 2, 1, 100000), p.count("agents", 1, 1, 1000), p.num("a", 1.0), p.num("abar", 0.2),
      p.nonneg("sigma", 0.5), p.num("b", 1.0), p.nonneg("q", 1.0), p.num("qbar", 0.5), p.positive("r", 1.0),
      p.nonneg("qT", 1.0), p.num("qbarT", 0.5), p.num("m0", 1.0), p.nonneg("v0", 0.5));
  m.validate();
  return [=](std::uint64_t) {
    const auto sol = lq::solve_mean_variance(m);
    const auto mom = lq::mean_variance_moments(m, sol);
    Table main{"meanvar", {"t", "mean", "variance"}, {}};
    for (std::size_t t = 0; t <= m.T; ++t) main.add({idx(t), mom.mean[t], mom.variance[t]});
    Table gains{"gains", {"t", "agent", "eta", "etabar", "beta", "gamma"}, {}};
    for (std::size_t t = 0; t < m.T; ++t)
      for (std::size_t i = 0; i < m.n; ++i)
        gains.add({idx(t), idx(i), sol.eta[i][t], sol.etabar[i][t], sol.beta[i][t], sol.gamma[i][t]});
    Table costs{"costs", {"agent", "cost"}, {}};
    for (std::size_t i = 0; i < m.n; ++i) costs.add({idx(i), lq::mean_variance_cost(sol, i, m.v0, m.m0, m.sigma)});
    return std::vector<Table>{main, gains, costs};
  };
}

inline Job routing_scenario(const Params& p) {
  routing::RoutingGame game = routing::congestion_instance();
  if (p.has("routes")) {
    game.routes.clear();
    for (const auto& r : p.objects("routes")) {
      try {
        game.routes.push_back(routing::make_cost(r.str("kind", "affine"), r.nums("coeffs", {})));
      } catch (const Error& e) {
        r.fail("kind", e.what());
      }
    }
  }
  game.validate();
  const std::size_t agents = p.count("agents", 50, 1, 1000000);
  const double nu = p.positive("nu", 0.05);
  const std::size_t horizon = p.count("horizon", 2000, 1, 10000000);
  const std::string mode = p.str("mode", "imitative");
  if (mode != "imitative" && mode != "replicator") p.fail("mode", "must be imitative or replicator");
  const double tol = p.positive("wardrop_tol", 1e-3);
  return [=](std::uint64_t seed) {
    RandomStream rng(StreamId{seed, 0});
    routing::StrategyState init;
    for (std::size_t i = 0; i < agents; ++i) {
      std::vector<double> w(game.size());
      for (double& x : w) x = -std::log(1.0 - rng.uniform());
      init.strategies.push_back(SimplexVector::from_mass(w));
      init.rates.push_back(nu);
    }
    const auto run = routing::run_learning(game, init, horizon,
                                           mode == "imitative" ? routing::LearningMode::Imitative
                                                               : routing::LearningMode::Replicator);
    std::vector<std::string> cols{"round"};
    for (std::size_t u = 0; u < game.size(); ++u) cols.push_back("m" + std::to_string(u));
    for (std::size_t u = 0; u < game.size(); ++u) cols.push_back("c" + std::to_string(u));
    Table main{"routing", cols, {}};
    for (std::size_t t = 0; t < run.population.size(); ++t) {
      std::vector<Cell> row{idx(t)};
      const auto c = game.cost_vector(0, run.population[t]);
      for (std::size_t u = 0; u < game.size(); ++u) row.push_back(run.population[t][u]);
      for (std::size_t u = 0; u < game.size(); ++u) row.push_back(c[u]);
      main.add(std::move(row));
    }
    const auto rep = routing::wardrop_check(game, run.population.back(), 0, tol);
    Table summary{"summary", {"wardrop_ok", "violations"}, {}};
    summary.add({idx(rep.ok ? 1 : 0), idx(rep.violations.size())});
    return std::vector<Table>{main, summary};
  };
}

inline epidemics::VirusParams virus_params(const Params& r) {
  epidemics::VirusParams v;
  v.delta_D = r.num("delta_D", v.delta_D);
  v.delta_C = r.num("delta_C", v.delta_C);
  v.delta_H = r.num("delta_H", v.delta_H);
  v.delta_Sm = r.num("delta_Sm", v.delta_Sm);
  v.delta_e = r.num("delta_e", v.delta_e);
  v.delta_m = r.num("delta_m", v.delta_m);
  v.lambda = r.num("lambda", v.lambda);
  v.beta = r.num("beta", v.beta);
  v.eta = r.num("eta", v.eta);
  v.q1 = r.num("q1", v.q1);
  v.q2 = r.num("q2", v.q2);
  v.validate();
  return v;
}

inline Job virus(const Params& p) {
  const auto v = virus_params(p.object("rates"));
  const auto m0 = epidemics::from_aggregates(p.nonneg("d0", 0.3), p.nonneg("c0", 0.2));
  const std::size_t steps = p.count("steps", 5000, 1, 100000000);
  const TimeGrid grid(0.0, p.positive("horizon", 50.0), steps);
  const std::size_t agents = p.count("agents", 1000, 0, 100000000);
  if (agents == 1) p.fail("agents", "must be 0 (skip) or at least 2");
  const std::size_t stride = stride_of(p, steps);
  return [=](std::uint64_t seed) {
    const auto ode = epidemics::simulate_population_ode(v, m0, grid);
    const char* names[5] = {"d1", "d2", "c1", "c2", "h"};
    std::vector<std::string> cols{"t"};
    for (auto n : names) cols.push_back(std::string("ode_") + n);
    if (agents) for (auto n : names) cols.push_back(std::string("agent_") + n);
    Table main{"virus", cols, {}};
    std::optional<Path> sim;
    if (agents) sim = epidemics::simulate_agents(v, agents, m0, grid, StreamId{seed, 0});
    for (std::size_t k = 0; k < grid.size(); k += stride) {
      std::vector<Cell> row{grid.time(k)};
      for (double x : ode[k]) row.push_back(x);
      if (sim)
        for (double x : (*sim)[k]) row.push_back(x);
      main.add(std::move(row));
    }
    Table summary{"summary", {"time_average_h"}, {}};
    summary.add({epidemics::time_average_h(ode)});
    return std::vector<Table>{main, summary};
  };
}

inline Job sync(const Params& p) {
  const std::size_t n = p.count("oscillators", 500, 2, 1000000);
  const double sigma = p.nonneg("sigma", 0.01), eta = p.nonneg("eta", 1.0), wsd = p.nonneg("omega_sd", 1.0);
  const double coupling = p.nonneg("coupling", 0.0);
  const std::string control = p.str("control", "consensus");
  if (control != "consensus" && control != "none") p.fail("control", "must be consensus or none");
  const std::size_t steps = p.count("steps", 5000, 1, 100000000);
  const TimeGrid grid(0.0, p.positive("horizon", 50.0), steps);
  const std::size_t stride = stride_of(p, steps);
  return [=](std::uint64_t seed) {
    coupled::OscillatorEnsemble ens;
    ens.theta0 = coupled::uniform_phases(n, StreamId{seed, 0});
    RandomStream rng(StreamId{seed, 1});
    for (std::size_t i = 0; i < n; ++i) ens.omega.push_back(wsd * rng.normal());
    ens.eta.assign(n, eta);
    ens.sigma = sigma;
    if (coupling > 0.0) ens.K = coupled::uniform_coupling(n, coupling);
    const auto run = coupled::simulate_kuramoto(
        ens, control == "consensus" ? coupled::PhaseControl::Consensus : coupled::PhaseControl::None, grid,
        StreamId{seed, 2});
    Table main{"sync", {"t", "order"}, {}};
    for (std::size_t k = 0; k < grid.size(); k += stride) main.add({grid.time(k), run.order[k]});
    Table phases{"phases", {"oscillator", "omega", "theta0", "thetaT"}, {}};
    for (std::size_t i = 0; i < n; ++i) phases.add({idx(i), ens.omega[i], ens.theta0[i], run.phases.back()[i]});
    return std::vector<Table>{main, phases};
  };
}

inline Job hvac(const Params& p) {
  coupled::ThermalNetwork net;
  const std::size_t rooms = p.count("rooms", 10, 1, 100000);
  net.T0 = p.nums("T0", {});
  if (net.T0.empty())
    for (std::size_t i = 0; i < rooms; ++i) net.T0.push_back(17.0 + 1.3 * static_cast<double>(i));
  if (net.T0.size() != rooms) p.fail("T0", "needs one temperature per room");
  net.eps1 = p.positive("eps1", 0.1);
  net.eps2 = Eigen::MatrixXd::Constant(Eigen::Index(rooms), Eigen::Index(rooms), p.nonneg("eps2", 0.02));
  net.eps2.diagonal().setZero();
  net.eps3 = p.positive("eps3", 1.0);
  net.sigma = p.nonneg("sigma", 0.1);
  net.T_ext = constant_fn(p.num("T_ext", 15.0));
  net.T_ref = p.num("T_ref", 35.0);
  net.price = constant_fn(p.nonneg("price", 1.0));
  net.validate();
  const auto law = coupled::price_sensitive_law(p.nonneg("gain", 2.0), p.nonneg("kappa", 0.5),
                                                p.nonneg("umax", 5.0), p.num("target", 24.0), net.T_ref);
  const std::size_t steps = p.count("steps", 5000, 1, 100000000);
  const TimeGrid grid(0.0, p.positive("horizon", 50.0), steps);
  const std::size_t paths = p.count("paths", 20, 1, 1000000);
  const std::size_t stride = stride_of(p, steps);
  return [=](std::uint64_t seed) {
    const auto run = coupled::simulate_rooms(net, law, grid, paths, StreamId{seed, 0});
    std::vector<std::string> cols{"t"};
    for (std::size_t i = 0; i < rooms; ++i) cols.push_back("mean" + std::to_string(i));
    Table main{"hvac", cols, {}};
    for (std::size_t k = 0; k < grid.size(); k += stride) {
      std::vector<Cell> row{grid.time(k)};
      for (double x : run.mean[k]) row.push_back(x);
      main.add(std::move(row));
    }
    Table rooms_t{"rooms", {"room", "cost", "effort", "in_band"}, {}};
    for (std::size_t i = 0; i < rooms; ++i) rooms_t.add({idx(i), run.cost[i], run.effort[i], run.in_band[i]});
    return std::vector<Table>{main, rooms_t};
  };
}

inline Job dispatch_scenario(const Params& p) {
  dispatch::ProducerModel m;
  m.caps = p.nums("caps", {10.0});
  m.rho = p.positive("rho", 1.0);
  const std::string loss = p.str("loss", "quadratic");
  const double k = p.positive("loss_k", 1.0);
  if (loss == "quadratic") m.loss = dispatch::Loss::quadratic(k);
  else if (loss == "huber") m.loss = dispatch::Loss::huber(k, p.positive("huber_delta", 1.0));
  else p.fail("loss", "must be quadratic or huber");
  if (m.caps.size() > 3) p.fail("caps", "at most three plants are supported by the value search");
  const auto c = p.nums("maintenance", std::vector<double>(m.caps.size(), 0.0));
  if (c.size() != m.caps.size()) p.fail("maintenance", "needs one rate per plant");
  for (double x : c) {
    if (x < 0.0) p.fail("maintenance", "rates must be nonnegative");
    m.maintenance.push_back(constant_fn(x));
  }
  const double w = p.nonneg("terminal_weight", 1.0);
  m.terminal = [w](const std::vector<double>& y) {
    double s = 0.0;
    for (double v : y) s += 0.5 * w * v * v;
    return s;
  };
  const double D = p.nonneg("demand", 2.0);
  const double T = p.positive("horizon", 1.0);
  m.validate(D);
  const auto times = p.nums("times", {0.0, 0.25, 0.5, 0.75});
  for (double t : times)
    if (t < 0.0 || t >= T) p.fail("times", "entries must lie in [0, horizon)");
  const double lo = p.num("stock_min", -1.0), hi = p.num("stock_max", 2.0);
  const std::size_t pts = p.count("stock_points", 31, 2, 100000);
  if (!(lo < hi)) p.fail("stock_max", "must exceed stock_min");
  return [=](std::uint64_t) {
    Table main{"dispatch", {"t", "stock", "value", "argmin0", "costate0"}, {}};
    for (double t : times)
      for (std::size_t i = 0; i < pts; ++i) {
        const double e = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(pts - 1);
        const std::vector<double> ev(m.plants(), e);
        const auto r = dispatch::hopf_lax_value(m, D, t, T, ev);
        const auto g = dispatch::costate(m, D, t, T, ev);
        main.add({t, e, r.value, r.argmin[0], g[0]});
      }
    Table supply{"supply", {"costate", "total_supply", "hamiltonian"}, {}};
    for (int i = 0; i <= 20; ++i) {
      const double y = -2.0 + 0.2 * i;
      const std::vector<double> yv(m.plants(), y);
      supply.add({y, dispatch::optimal_supply(m, D, yv).total, dispatch::hamiltonian(m, D, yv)});
    }
    return std::vector<Table>{main, supply};
  };
}

inline Job delay(const Params& p) {
  delayed::DelayedProsumerModel m;
  m.c1 = constant_fn(p.num("c1", 1.0));
  m.c2 = constant_fn(p.nonneg("c2", 0.1));
  m.c4 = p.nonneg("c4", 0.5);
  m.T = p.positive("horizon", 1.0);
  m.mu = p.positive("mu", 1.0);
  m.history = constant_fn(p.num("e0", 1.0));
  const auto taus = p.nums("taus", {1.0 / 3.0, 2.0 / 3.0});
  if (taus.empty()) p.fail("taus", "needs at least one delay");
  const std::size_t steps = p.count("steps", 300, 1, 10000000);
  const TimeGrid grid(0.0, m.T, steps);
  for (double tau : taus) {
    if (!(tau > 0.0) || tau > m.T) p.fail("taus", "delays must lie in (0, horizon]");
    try {
      (void)grid.steps_for(tau);
    } catch (const Error&) {
      p.fail("taus", "every delay must be a whole number of steps");
    }
  }
  m.tau = taus.front();
  m.validate();
  const std::size_t paths = p.count("paths", 200, 1, 10000000);
  return [=](std::uint64_t seed) {
    const auto rep = delayed::delay_monotonicity_report(m, taus, steps);
    std::vector<std::string> cols{"t"};
    for (const auto& pr : rep.profiles) cols.push_back("p_tau" + format_double(pr.tau));
    for (const auto& pr : rep.profiles) cols.push_back("u_tau" + format_double(pr.tau));
    Table main{"delay", cols, {}};
    for (std::size_t k = 0; k < grid.size(); ++k) {
      std::vector<Cell> row{grid.time(k)};
      for (const auto& pr : rep.profiles) row.push_back(pr.p[k][0]);
      for (const auto& pr : rep.profiles) row.push_back(pr.u[k]);
      main.add(std::move(row));
    }
    Table energy{"energy", {"tau", "t", "mean", "sd"}, {}};
    for (std::size_t j = 0; j < rep.profiles.size(); ++j) {
      const auto& prof = rep.profiles[j];
      auto mj = m;
      mj.tau = prof.tau;
      const double h = grid.step();
      const TimeFn u = [&prof, h, steps](double t) {
        const auto k = std::min<std::size_t>(steps, static_cast<std::size_t>(std::lround(t / h)));
        return prof.u[k];
      };
      const auto runs = delayed::simulate_prosumer(mj, u, steps, paths, StreamId{seed, j});
      for (std::size_t k = 0; k < grid.size(); ++k) {
        double s = 0.0, ss = 0.0;
        for (const auto& r : runs) {
          s += r[k][0];
          ss += r[k][0] * r[k][0];
        }
        const double mean = s / double(paths);
        const double var = paths > 1 ? std::max(0.0, (ss - s * mean) / double(paths - 1)) : 0.0;
        energy.add({prof.tau, grid.time(k), mean, std::sqrt(var)});
      }
    }
    Table summary{"summary", {"monotone", "degenerate", "worst_violation"}, {}};
    summary.add({idx(rep.monotone), idx(rep.degenerate), rep.worst});
    return std::vector<Table>{main, energy, summary};
  };
}

inline Job cloud_scenario(const Params& p) {
  std::vector<std::size_t> ns;
  for (double x : p.nums("tenants", {2, 3, 5, 10, 100, 1000})) {
    if (x < 2 || x != std::floor(x)) p.fail("tenants", "entries must be integers >= 2");
    ns.push_back(static_cast<std::size_t>(x));
  }
  const double alpha = p.in_range("alpha", 1.0, 0.0, 1.0);
  const double c = p.positive("value", 1.0), price = p.positive("price", 1.0);
  return [=](std::uint64_t) {
    Table main{"cloud",
               {"n", "u_star", "payoff", "best_response", "efficiency", "p_star", "u_at_p_star", "efficiency_at_p_star"},
               {}};
    for (std::size_t n : ns) {
      const cloud::CloudGame g{n, alpha, c, price};
      const double u = cloud::equilibrium_demand(g);
      const double G = static_cast<double>(n - 1) * cloud::share_weight(u, alpha);
      const double br = alpha > 0.0 ? cloud::best_response(g, G) : 0.0;
      const cloud::CloudGame gs{n, alpha, c, cloud::optimal_price(n, alpha)};
      const bool priced = gs.p > 0.0;
      const double us = priced ? cloud::equilibrium_demand(gs) : 0.0;
      main.add({idx(n), u, cloud::equilibrium_payoff(g), br, cloud::efficiency_ratio(g, u), gs.p, us,
                priced ? cloud::efficiency_ratio(gs, us) : 0.0});
    }
    return std::vector<Table>{main};
  };
}

inline Job sharing_scenario(const Params& p) {
  sharing::SharingNetwork net;
  net.thp = p.nums("throughput", {3.0, 0.5, 0.0});
  net.nodes = net.thp.size();
  net.theta = p.nums("theta", std::vector<double>(net.nodes, 1.0));
  if (p.has("edges")) {
    for (const auto& e : p.objects("edges")) {
      const double from = e.num("from"), to = e.num("to");
      if (from < 0 || to < 0 || from != std::floor(from) || to != std::floor(to))
        e.fail("from", "endpoints must be nonnegative integers");
      net.edges.push_back({static_cast<std::size_t>(from), static_cast<std::size_t>(to), e.nonneg("eps", 0.0)});
    }
  } else {
    const double eps = p.nonneg("eps", 0.75);
    for (std::size_t i = 0; i + 1 < net.nodes; ++i) {
      net.edges.push_back({i, i + 1, eps});
      net.edges.push_back({i + 1, i, eps});
    }
  }
  net.validate();
  const std::size_t restarts = p.count("restarts", 5, 1, 10000);
  const std::size_t rounds = p.count("max_rounds", 100000, 1, 100000000);
  const double tol = p.positive("tol", 1e-13);
  return [=](std::uint64_t seed) {
    const auto base = sharing::sharing_equilibrium(net, rounds, tol);
    const auto rep = sharing::sharing_restarts(net, restarts, StreamId{seed, 0}, rounds, tol);
    Table nodes{"sharing", {"node", "throughput", "expost"}, {}};
    for (std::size_t i = 0; i < net.nodes; ++i) nodes.add({idx(i), net.thp[i], base.throughput[i]});
    Table edges{"edges", {"from", "to", "eps", "share"}, {}};
    for (std::size_t e = 0; e < net.edges.size(); ++e)
      edges.add({idx(net.edges[e].from), idx(net.edges[e].to), net.edges[e].eps, base.s[e]});
    Table summary{"summary", {"converged", "rounds", "kkt_residual", "fairness_gap", "restart_spread"}, {}};
    summary.add({idx(base.converged && rep.all_converged), idx(base.rounds), base.kkt_residual,
                 sharing::fairness_gap(base.throughput), rep.throughput_spread});
    return std::vector<Table>{nodes, edges, summary};
  };
}

inline Job meeting(const Params& p) {
  spatial::MeetingModel m;
  const auto room = p.nums("room", {0.0, 0.0});
  if (room.size() != 2) p.fail("room", "needs two coordinates");
  m.room = {room[0], room[1]};
  m.c1 = p.nonneg("c1", 1.0);
  m.c2 = p.nonneg("c2", 2.0);
  m.c3 = p.nonneg("c3", 0.5);
  m.tbar = p.nonneg("tbar", 1.0);
  std::vector<spatial::Point> fixed;
  if (p.has("agents")) {
    for (const auto& a : p.objects("agents")) fixed.push_back({a.num("x"), a.num("y")});
  }
  const std::size_t random_agents = p.count("random_agents", fixed.empty() ? 20 : 0, 0, 1000000);
  const double radius = p.positive("radius", 3.0);
  const std::size_t total = fixed.size() + random_agents;
  m.quorum = p.count("quorum", std::max<std::size_t>(1, total / 2), 1, std::max<std::size_t>(1, total));
  m.agents.assign(total, m.room);  // placeholder positions, for validation only
  m.validate();
  const std::size_t iters = p.count("iterations", 200, 1, 1000000);
  return [=](std::uint64_t seed) mutable {
    m.agents = fixed;
    RandomStream rng(StreamId{seed, 0});
    for (std::size_t i = 0; i < random_agents; ++i) {
      const double r = radius * std::sqrt(rng.uniform()), a = 2.0 * std::numbers::pi * rng.uniform();
      m.agents.push_back({m.room[0] + r * std::cos(a), m.room[1] + r * std::sin(a)});
    }
    const auto fp = spatial::start_time_fixed_point(m, iters);
    Table agents{"meeting", {"agent", "x", "y", "distance", "arrival", "regime"}, {}};
    for (std::size_t i = 0; i < m.agents.size(); ++i)
      agents.add({idx(i), m.agents[i][0], m.agents[i][1], spatial::distance(m.agents[i], m.room), fp.arrivals[i],
                  std::string(spatial::regime_name(fp.regimes[i]))});
    Table trace{"trace", {"iteration", "T"}, {}};
    for (std::size_t k = 0; k < fp.trace.size(); ++k) trace.add({idx(k), fp.trace[k]});
    Table summary{"summary", {"T", "converged", "quorum"}, {}};
    summary.add({fp.T, idx(fp.converged), idx(m.quorum)});
    return std::vector<Table>{agents, trace, summary};
  };
}

}  // namespace scenarios

/// Fixed catalog order.
inline const std::vector<Scenario>& catalog() {
  static const std::vector<Scenario> list{
      {"security", "LQ network security game: Riccati coefficients and closed-loop cost, mean, variance",
       scenarios::security},
      {"meanvar", "Discrete-time mean-variance game: gains, moments and costs", scenarios::meanvar},
      {"routing", "Imitative route learning on a congestion game", scenarios::routing_scenario},
      {"virus", "Virus spread: mean-field ODE against the agent simulator", scenarios::virus},
      {"sync", "Kuramoto ensemble under consensus control: order parameter", scenarios::sync},
      {"hvac", "Coupled room temperatures under a price-sensitive heating law", scenarios::hvac},
      {"dispatch", "Power dispatch: Hopf-Lax value function and supply curve", scenarios::dispatch_scenario},
      {"delay", "Delayed prosumer: costate and consumption for several delays", scenarios::delay},
      {"cloud", "Cloud renting game: equilibrium demand, payoff and optimal price", scenarios::cloud_scenario},
      {"sharing", "Throughput sharing network: equilibrium shares and ex-post throughput",
       scenarios::sharing_scenario},
      {"meeting", "Online meeting: arrival times and self-consistent start time", scenarios::meeting},
  };
  return list;
}

inline const Scenario* find_scenario(const std::string& name) {
  for (const auto& s : catalog())
    if (s.name == name) return &s;
  return nullptr;
}

}  // namespace mftg::cli
