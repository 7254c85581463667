#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "mftg/core/error.hpp"

namespace mftg {

using TimeFn = std::function<double(double)>;

inline TimeFn constant_fn(double v) {
  return [v](double) { return v; };
}

/// Uniform discretization t_k = t0 + k*h of [t0, T], k = 0..n_steps.
class TimeGrid {
 public:
  TimeGrid(double t0, double horizon, std::size_t n_steps)
      : t0_(t0), horizon_(horizon), n_steps_(n_steps) {
    require(std::isfinite(t0) && std::isfinite(horizon), Errc::InvalidArgument,
            "time grid bounds must be finite");
    require(horizon > t0, Errc::InvalidArgument, "time grid needs T > t0");
    require(n_steps > 0, Errc::InvalidArgument, "time grid needs n_steps >= 1");
  }

  double t0() const noexcept { return t0_; }
  double horizon() const noexcept { return horizon_; }
  std::size_t steps() const noexcept { return n_steps_; }
  std::size_t size() const noexcept { return n_steps_ + 1; }
  double step() const noexcept { return (horizon_ - t0_) / static_cast<double>(n_steps_); }

  double time(std::size_t k) const noexcept {
    // Last point is pinned to T so that reversed grids line up exactly.
    if (k == n_steps_) return horizon_;
    return t0_ + static_cast<double>(k) * step();
  }

  std::vector<double> times() const {
    std::vector<double> out(size());
    for (std::size_t k = 0; k < size(); ++k) out[k] = time(k);
    return out;
  }

  /// Number of steps spanning `duration`; throws DelayNotOnGrid unless it is
  /// an integer multiple of the step (relative tolerance 1e-9).
  std::size_t steps_for(double duration) const {
    const double ratio = duration / step();
    const double rounded = std::round(ratio);
    require(rounded >= 0.0 && std::abs(ratio - rounded) <= 1e-9 * std::max(1.0, ratio),
            Errc::DelayNotOnGrid, "duration is not an integer multiple of the grid step");
    return static_cast<std::size_t>(rounded);
  }

  /// Index of the grid point equal to t (snapped); throws OutOfRange if t is off-grid.
  std::size_t index_of(double t) const {
    const double ratio = (t - t0_) / step();
    const double rounded = std::round(ratio);
    require(rounded >= 0.0 && rounded <= static_cast<double>(n_steps_) &&
                std::abs(ratio - rounded) <= 1e-9 * std::max(1.0, std::abs(ratio)),
            Errc::OutOfRange, "time is not a grid point");
    return static_cast<std::size_t>(rounded);
  }

  /// Same step count over [0, T - t0]; used to integrate terminal-value problems.
  TimeGrid reversed() const { return TimeGrid(0.0, horizon_ - t0_, n_steps_); }

 private:
  double t0_;
  double horizon_;
  std::size_t n_steps_;
};

}  // namespace mftg
