#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <vector>

#include "mftg/core/error.hpp"
#include "mftg/core/integrate.hpp"
#include "mftg/core/parallel.hpp"
#include "mftg/core/path.hpp"
#include "mftg/core/random.hpp"
#include "mftg/core/time_grid.hpp"

namespace mftg::coupled {

// ---------------------------------------------------------------- oscillators

struct OscillatorEnsemble {
  std::vector<double> theta0;  // unwrapped initial phases
  std::vector<double> omega;
  Eigen::MatrixXd K;           // n x n, or empty for no coupling
  double sigma = 0.0;
  std::vector<double> eta;     // consensus gains

  std::size_t size() const { return theta0.size(); }

  void validate() const {
    const std::size_t n = theta0.size();
    require(n >= 2, Errc::InvalidArgument, "an oscillator ensemble needs n >= 2");
    require(omega.size() == n && eta.size() == n, Errc::InvalidArgument,
            "omega and eta need one entry per oscillator");
    require(K.size() == 0 || (static_cast<std::size_t>(K.rows()) == n && static_cast<std::size_t>(K.cols()) == n),
            Errc::InvalidArgument, "coupling matrix must be n x n");
    require(K.size() == 0 || K.minCoeff() >= 0.0, Errc::InvalidArgument, "coupling must be nonnegative");
    require(sigma >= 0.0, Errc::InvalidArgument, "noise level must be nonnegative");
    for (double e : eta) require(e >= 0.0, Errc::InvalidArgument, "consensus gains must be nonnegative");
    require(all_finite(theta0) && all_finite(omega), Errc::NonFinite, "non-finite phases or frequencies");
  }
};

/// Block-diagonal coupling with strength k / block size inside each block.
inline Eigen::MatrixXd block_coupling(const std::vector<std::size_t>& sizes, double k) {
  std::size_t n = 0;
  for (std::size_t s : sizes) n += s;
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::size_t at = 0;
  for (std::size_t s : sizes) {
    const auto b = static_cast<Eigen::Index>(at), m = static_cast<Eigen::Index>(s);
    K.block(b, b, m, m).setConstant(k / static_cast<double>(s));
    for (Eigen::Index i = 0; i < m; ++i) K(b + i, b + i) = 0.0;
    at += s;
  }
  return K;
}

inline Eigen::MatrixXd uniform_coupling(std::size_t n, double k) {
  Eigen::MatrixXd K = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n),
                                                k / static_cast<double>(n));
  K.diagonal().setZero();
  return K;
}

/// Phases drawn uniformly from [0, 2 pi).
inline std::vector<double> uniform_phases(std::size_t n, StreamId stream) {
  RandomStream rng(stream);
  std::vector<double> th(n);
  for (double& t : th) t = 2.0 * std::numbers::pi * rng.uniform();
  return th;
}

/// u_i = -omega_i + eta_i sin(mean(theta) - theta_i).
inline std::vector<double> consensus_control(const std::vector<double>& theta, const std::vector<double>& omega,
                                             const std::vector<double>& eta) {
  const std::size_t n = theta.size();
  require(n >= 1 && omega.size() == n && eta.size() == n, Errc::InvalidArgument,
          "consensus control needs matching sizes");
  double mean = 0.0;
  for (double t : theta) mean += t;
  mean /= static_cast<double>(n);
  std::vector<double> u(n);
  for (std::size_t i = 0; i < n; ++i) u[i] = -omega[i] + eta[i] * std::sin(mean - theta[i]);
  return u;
}

/// |(1/n) sum exp(i theta_j)|.
inline double order_parameter(const std::vector<double>& theta) {
  require(!theta.empty(), Errc::InvalidArgument, "empty phase vector");
  std::complex<double> z{0.0, 0.0};
  for (double t : theta) z += std::polar(1.0, t);
  return std::min(1.0, std::abs(z) / static_cast<double>(theta.size()));
}

/// Distance on the circle, in [0, pi].
inline double circular_distance(double a, double b) {
  const double d = std::remainder(a - b, 2.0 * std::numbers::pi);
  return std::abs(d);
}

enum class PhaseControl { None, Consensus };

struct KuramotoRun {
  Path phases;
  std::vector<double> order;
};

inline KuramotoRun simulate_kuramoto(const OscillatorEnsemble& ens, PhaseControl control, const TimeGrid& grid,
                                     StreamId stream) {
  ens.validate();
  const std::size_t n = ens.size();
  const bool coupled = ens.K.size() != 0 && ens.K.maxCoeff() > 0.0;
  auto drift = [&](double, const State& th) {
    State f(ens.omega);
    if (coupled) {
      Eigen::VectorXd s(n), c(n);
      for (std::size_t i = 0; i < n; ++i) {
        s(static_cast<Eigen::Index>(i)) = std::sin(th[i]);
        c(static_cast<Eigen::Index>(i)) = std::cos(th[i]);
      }
      const Eigen::VectorXd Ks = ens.K * s, Kc = ens.K * c;
      // sum_j K_ij sin(th_j - th_i) = cos(th_i) (K sin)_i - sin(th_i) (K cos)_i
      for (std::size_t i = 0; i < n; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        f[i] += c(ii) * Ks(ii) - s(ii) * Kc(ii);
      }
    }
    if (control == PhaseControl::Consensus) {
      const auto u = consensus_control(th, ens.omega, ens.eta);
      for (std::size_t i = 0; i < n; ++i) f[i] += u[i];
    }
    return f;
  };
  auto diffusion = [&](double, const State& th) { return State(th.size(), ens.sigma); };
  KuramotoRun run{em_simulate(drift, diffusion, ens.theta0, grid, stream), {}};
  run.order.reserve(run.phases.size());
  for (const auto& th : run.phases.values) run.order.push_back(order_parameter(th));
  return run;
}

/// Every pair inside a block closer than `intra`, every pair across blocks farther than `inter`.
inline bool phase_clusters(const std::vector<double>& theta, const std::vector<std::size_t>& block_of,
                           double intra = 0.1, double inter = 0.5) {
  require(theta.size() == block_of.size(), Errc::InvalidArgument, "one block label per phase");
  for (std::size_t i = 0; i < theta.size(); ++i)
    for (std::size_t j = i + 1; j < theta.size(); ++j) {
      const double d = circular_distance(theta[i], theta[j]);
      if (block_of[i] == block_of[j] ? d >= intra : d <= inter) return false;
    }
  return true;
}

// -------------------------------------------------------------------- rooms

struct ThermalNetwork {
  std::vector<double> T0;
  TimeFn T_ext = constant_fn(15.0);
  double T_ref = 35.0;
  double eps1 = 0.1;
  Eigen::MatrixXd eps2;  // n x n, or empty
  double eps3 = 1.0;
  double sigma = 0.0;
  double comfort_lo = 23.0;
  double comfort_hi = 25.0;
  TimeFn price = constant_fn(1.0);

  std::size_t size() const { return T0.size(); }
  double comfort() const { return 0.5 * (comfort_lo + comfort_hi); }

  void validate() const {
    const std::size_t n = T0.size();
    require(n >= 1, Errc::InvalidArgument, "a thermal network needs at least one room");
    require(eps1 > 0.0 && eps3 > 0.0, Errc::InvalidArgument, "eps1 and eps3 must be positive");
    require(eps2.size() == 0 || (static_cast<std::size_t>(eps2.rows()) == n &&
                                 static_cast<std::size_t>(eps2.cols()) == n),
            Errc::InvalidArgument, "room coupling must be n x n");
    require(eps2.size() == 0 || eps2.minCoeff() >= 0.0, Errc::InvalidArgument, "room coupling must be nonnegative");
    require(sigma >= 0.0, Errc::InvalidArgument, "noise level must be nonnegative");
    require(comfort_lo < comfort_hi, Errc::InvalidArgument, "comfort band is empty");
    require(all_finite(T0), Errc::NonFinite, "non-finite initial temperature");
  }
};

/// u_i as a function of room index, temperature and current price.
using RoomLaw = std::function<double(std::size_t, double, double)>;

inline RoomLaw no_heating() {
  return [](std::size_t, double, double) { return 0.0; };
}

/// clamp(gain (target - T) sign(T_ref - T) / (1 + kappa price), 0, umax).
inline RoomLaw price_sensitive_law(double gain, double kappa, double umax, double target, double T_ref) {
  require(gain >= 0.0 && kappa >= 0.0 && umax >= 0.0, Errc::InvalidArgument,
          "room law gains must be nonnegative");
  return [=](std::size_t, double T, double p) {
    const double drive = gain * (target - T) * (T_ref >= T ? 1.0 : -1.0) / (1.0 + kappa * p);
    return std::clamp(drive, 0.0, umax);
  };
}

struct RoomRun {
  Path mean;                      // ensemble mean temperature per room
  Path sample;                    // first ensemble member
  std::vector<double> cost;       // int u p + (mean dev)^2 + var(dev) dt
  std::vector<double> effort;     // ensemble mean of int u dt
  std::vector<double> in_band;    // fraction of path-time in the comfort band
};

inline RoomRun simulate_rooms(const ThermalNetwork& net, const RoomLaw& law, const TimeGrid& grid,
                              std::size_t paths, StreamId stream) {
  net.validate();
  require(paths >= 1, Errc::InvalidArgument, "need at least one path");
  const std::size_t n = net.size();
  const double h = grid.step();
  const double target = net.comfort();

  std::vector<Path> runs(paths, Path(grid, n));
  std::vector<std::vector<double>> use(paths, std::vector<double>(n, 0.0));
  std::vector<std::vector<double>> price_cost(paths, std::vector<double>(n, 0.0));
  std::vector<std::vector<double>> band(paths, std::vector<double>(n, 0.0));
  parallel_for(paths, [&](std::size_t r) {
    RandomStream rng(stream.child(r));
    Path& x = runs[r];
    x[0] = net.T0;
    for (std::size_t k = 0; k < grid.steps(); ++k) {
      const double t = grid.time(k);
      const double ext = net.T_ext(t), p = net.price(t);
      const State& T = x[k];
      State next(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double u = law(i, T[i], p);
        double f = net.eps1 * (ext - T[i]) + net.eps3 * u * (net.T_ref - T[i]);
        if (net.eps2.size() != 0)
          for (std::size_t j = 0; j < n; ++j)
            f += net.eps2(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * (T[j] - T[i]);
        next[i] = T[i] + f * h + net.sigma * std::sqrt(h) * rng.normal();
        use[r][i] += u * h;
        price_cost[r][i] += u * p * h;
        if (T[i] >= net.comfort_lo && T[i] <= net.comfort_hi) band[r][i] += h;
      }
      ensure_finite(next, "simulate_rooms: temperature diverged");
      x[k + 1] = std::move(next);
    }
  });

  RoomRun out{Path(grid, n), runs.front(), std::vector<double>(n, 0.0), std::vector<double>(n, 0.0),
              std::vector<double>(n, 0.0)};
  const double P = static_cast<double>(paths);
  const double span = grid.horizon() - grid.t0();
  std::vector<double> dev_sq(n), dev_var(n);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      double m = 0.0, s = 0.0;
      for (std::size_t r = 0; r < paths; ++r) m += runs[r][k][i] / P;
      for (std::size_t r = 0; r < paths; ++r) s += (runs[r][k][i] - m) * (runs[r][k][i] - m) / P;
      out.mean[k][i] = m;
      // Left-point accumulation to match the control integral.
      if (k < grid.steps()) out.cost[i] += ((m - target) * (m - target) + s) * h;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t r = 0; r < paths; ++r) {
      out.cost[i] += price_cost[r][i] / P;
      out.effort[i] += use[r][i] / P;
      out.in_band[i] += band[r][i] / (P * span);
    }
  }
  return out;
}

/// Sum over rooms of |T_i - T_ext|; used as a dissipation monitor.
inline double total_deviation(const State& T, double ext) {
  double s = 0.0;
  for (double v : T) s += std::abs(v - ext);
  return s;
}

// ------------------------------------------------------------ moment checks

struct MomentEstimate {
  std::vector<double> mean;
  std::vector<double> se;
};

/// RK4 of de/dt = -u(t) + v(t).
inline Path energy_mean_check(const TimeFn& ubar, const TimeFn& vbar, double e0, const TimeGrid& grid) {
  return rk4_integrate([&](double t, const State&) { return State{-ubar(t) + vbar(t)}; }, State{e0}, grid);
}

namespace detail {

inline MomentEstimate ensemble_moments(const std::vector<Path>& runs) {
  const std::size_t N = runs.front().size();
  const double P = static_cast<double>(runs.size());
  MomentEstimate est{std::vector<double>(N, 0.0), std::vector<double>(N, 0.0)};
  for (std::size_t k = 0; k < N; ++k) {
    double m = 0.0, s = 0.0;
    for (const auto& r : runs) m += r[k][0];
    m /= P;
    for (const auto& r : runs) s += (r[k][0] - m) * (r[k][0] - m);
    est.mean[k] = m;
    est.se[k] = runs.size() > 1 ? std::sqrt(s / (P - 1.0) / P) : 0.0;
  }
  return est;
}

}  // namespace detail

/// Euler-Maruyama ensemble of de = (-u + v) dt + sigma dW.
inline MomentEstimate energy_monte_carlo(const TimeFn& ubar, const TimeFn& vbar, double e0, double sigma,
                                         const TimeGrid& grid, std::size_t paths, StreamId stream) {
  require(paths >= 2 && sigma >= 0.0, Errc::InvalidArgument, "need >= 2 paths and sigma >= 0");
  std::vector<Path> runs(paths, Path(grid, 1));
  parallel_for(paths, [&](std::size_t r) {
    runs[r] = em_simulate([&](double t, const State&) { return State{-ubar(t) + vbar(t)}; },
                          [&](double, const State&) { return State{sigma}; }, State{e0}, grid, stream.child(r));
  });
  return detail::ensemble_moments(runs);
}

/// Hhat + (H0 - Hhat) exp(-Gamma t).
inline Path ou_mean_check(double gamma, double hhat, double h0, const TimeGrid& grid) {
  require(gamma > 0.0, Errc::InvalidArgument, "mean-reversion rate must be positive");
  Path p(grid, 1);
  for (std::size_t k = 0; k < grid.size(); ++k)
    p[k][0] = hhat + (h0 - hhat) * std::exp(-gamma * (grid.time(k) - grid.t0()));
  return p;
}

/// Euler-Maruyama ensemble of dH = Gamma (Hhat - H) dt + sigma dW.
inline MomentEstimate ou_monte_carlo(double gamma, double hhat, double h0, double sigma, const TimeGrid& grid,
                                     std::size_t paths, StreamId stream) {
  require(gamma > 0.0, Errc::InvalidArgument, "mean-reversion rate must be positive");
  require(paths >= 2 && sigma >= 0.0, Errc::InvalidArgument, "need >= 2 paths and sigma >= 0");
  std::vector<Path> runs(paths, Path(grid, 1));
  parallel_for(paths, [&](std::size_t r) {
    runs[r] = em_simulate([&](double, const State& x) { return State{gamma * (hhat - x[0])}; },
                          [&](double, const State&) { return State{sigma}; }, State{h0}, grid, stream.child(r));
  });
  return detail::ensemble_moments(runs);
}

}  // namespace mftg::coupled
