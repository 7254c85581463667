#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <vector>

#include "mftg/core/error.hpp"

namespace mftg::lq {

/// Discrete-time distributed mean-variance problem
/// x_{t+1} = a x_t + abar E[x_t] + sum_i b_i u_it + sigma W_t.
/// Weight arrays are indexed [agent][t]; q and qbar have T+1 entries
/// (the last one is terminal), r has T entries.
struct MeanVarianceModel {
  std::size_t T = 1;
  std::size_t n = 1;
  double a = 0.0;
  double abar = 0.0;
  double sigma = 0.0;
  std::vector<double> b;
  std::vector<std::vector<double>> q, qbar, r;
  double m0 = 0.0;
  double v0 = 0.0;

  static MeanVarianceModel symmetric(std::size_t T, std::size_t n, double a, double abar,
                                     double sigma, double b, double q, double qbar, double r,
                                     double qT, double qbarT, double m0, double v0) {
    MeanVarianceModel m;
    m.T = T;
    m.n = n;
    m.a = a;
    m.abar = abar;
    m.sigma = sigma;
    m.b.assign(n, b);
    std::vector<double> qi(T + 1, q), qbi(T + 1, qbar);
    qi[T] = qT;
    qbi[T] = qbarT;
    m.q.assign(n, qi);
    m.qbar.assign(n, qbi);
    m.r.assign(n, std::vector<double>(T, r));
    m.m0 = m0;
    m.v0 = v0;
    return m;
  }

  void validate() const {
    require(T >= 1 && n >= 1, Errc::InvalidArgument, "mean-variance model needs T, n >= 1");
    require(b.size() == n && q.size() == n && qbar.size() == n && r.size() == n,
            Errc::InvalidArgument, "mean-variance arrays must have one row per agent");
    require(v0 >= 0.0, Errc::InvalidArgument, "initial variance must be nonnegative");
    for (std::size_t i = 0; i < n; ++i) {
      require(q[i].size() == T + 1 && qbar[i].size() == T + 1 && r[i].size() == T,
              Errc::InvalidArgument, "mean-variance weight rows have the wrong length");
      for (std::size_t t = 0; t <= T; ++t) {
        require(q[i][t] >= 0.0, Errc::InvalidArgument, "q_it must be nonnegative");
        require(q[i][t] + qbar[i][t] >= 0.0, Errc::InvalidArgument, "q_it + qbar_it must be nonnegative");
        if (t < T) require(r[i][t] > 0.0, Errc::InvalidArgument, "r_it must be positive");
      }
    }
  }
};

/// beta, gamma: [agent][0..T]; eta, etabar: [agent][0..T-1].
struct MeanVarianceSolution {
  std::vector<std::vector<double>> beta, gamma, eta, etabar;
};

namespace detail {

// Simultaneous best responses at one step: (r_i + b_i^2 w_i) g_i + b_i w_i sum_{j != i} b_j g_j = -b_i w_i s.
inline std::vector<double> coupled_gains(const MeanVarianceModel& m, const std::vector<double>& w,
                                         std::size_t t, double s) {
  const std::size_t n = m.n;
  Eigen::MatrixXd A(n, n);
  Eigen::VectorXd rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) A(i, j) = m.b[i] * w[i] * m.b[j];
    A(i, i) = m.r[i][t] + m.b[i] * m.b[i] * w[i];
    rhs(i) = -m.b[i] * w[i] * s;
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  require(lu.isInvertible(), Errc::SingularStep, "mean-variance gain system is singular");
  const Eigen::VectorXd g = lu.solve(rhs);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = g(i);
  return out;
}

// Riccati difference update given the total closed-loop coefficient seen by agent i.
inline double riccati_step(double weight, double next, double r, double b, double drift) {
  const double k = b * next * drift;
  return weight + next * drift * drift - k * k / (r + b * b * next);
}

}  // namespace detail

inline MeanVarianceSolution solve_mean_variance(const MeanVarianceModel& m) {
  m.validate();
  const std::size_t n = m.n, T = m.T;
  MeanVarianceSolution sol;
  sol.beta.assign(n, std::vector<double>(T + 1));
  sol.gamma.assign(n, std::vector<double>(T + 1));
  sol.eta.assign(n, std::vector<double>(T));
  sol.etabar.assign(n, std::vector<double>(T));
  for (std::size_t i = 0; i < n; ++i) {
    sol.beta[i][T] = m.q[i][T];
    sol.gamma[i][T] = m.q[i][T] + m.qbar[i][T];
  }
  std::vector<double> bn(n), gn(n);
  for (std::size_t step = T; step-- > 0;) {
    for (std::size_t i = 0; i < n; ++i) {
      bn[i] = sol.beta[i][step + 1];
      gn[i] = sol.gamma[i][step + 1];
    }
    const auto eta = detail::coupled_gains(m, bn, step, m.a);
    const auto etabar = detail::coupled_gains(m, gn, step, m.a + m.abar);
    double s = 0.0, sbar = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      s += m.b[j] * eta[j];
      sbar += m.b[j] * etabar[j];
    }
    for (std::size_t i = 0; i < n; ++i) {
      sol.eta[i][step] = eta[i];
      sol.etabar[i][step] = etabar[i];
      const double others = s - m.b[i] * eta[i];
      const double others_bar = sbar - m.b[i] * etabar[i];
      sol.beta[i][step] =
          detail::riccati_step(m.q[i][step], bn[i], m.r[i][step], m.b[i], m.a + others);
      sol.gamma[i][step] = detail::riccati_step(m.q[i][step] + m.qbar[i][step], gn[i],
                                                m.r[i][step], m.b[i], m.a + m.abar + others_bar);
    }
  }
  return sol;
}

/// Expected best-response cost of agent i: beta_i0 v0 + gamma_i0 m0^2 + sum_t beta_{i,t+1} sigma^2.
inline double mean_variance_cost(const MeanVarianceSolution& sol, std::size_t i, double v0,
                                 double m0, double sigma) {
  require(i < sol.beta.size(), Errc::OutOfRange, "agent index out of range");
  double cost = sol.beta[i][0] * v0 + sol.gamma[i][0] * m0 * m0;
  for (std::size_t t = 1; t < sol.beta[i].size(); ++t) cost += sol.beta[i][t] * sigma * sigma;
  return cost;
}

/// Mean and variance trajectories of the state under the solved feedback.
struct MomentPath {
  std::vector<double> mean, variance;
};

inline MomentPath mean_variance_moments(const MeanVarianceModel& m, const MeanVarianceSolution& sol) {
  MomentPath out{{m.m0}, {m.v0}};
  for (std::size_t t = 0; t < m.T; ++t) {
    double s = 0.0, sbar = 0.0;
    for (std::size_t j = 0; j < m.n; ++j) {
      s += m.b[j] * sol.eta[j][t];
      sbar += m.b[j] * sol.etabar[j][t];
    }
    const double v = out.variance.back();
    out.mean.push_back((m.a + m.abar + sbar) * out.mean.back());
    out.variance.push_back((m.a + s) * (m.a + s) * v + m.sigma * m.sigma);
  }
  return out;
}

}  // namespace mftg::lq
