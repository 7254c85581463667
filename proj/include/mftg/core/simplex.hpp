#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "mftg/core/error.hpp"

namespace mftg {

inline constexpr double kSimplexTol = 1e-12;

/// Probability vector: nonnegative weights summing to one.
class SimplexVector {
 public:
  SimplexVector() = default;

  /// Accepts weights whose sum is within 1e-12 of one and renormalizes them;
  /// negative entries or larger deviations are rejected.
  explicit SimplexVector(std::vector<double> weights) : w_(std::move(weights)) {
    require(!w_.empty(), Errc::InvalidArgument, "simplex vector must be non-empty");
    double sum = 0.0;
    for (double v : w_) {
      require(std::isfinite(v), Errc::InvalidArgument, "simplex weight is not finite");
      require(v >= 0.0, Errc::InvalidArgument, "simplex weight is negative");
      sum += v;
    }
    require(std::abs(sum - 1.0) <= kSimplexTol, Errc::InvalidArgument,
            "simplex weights do not sum to one");
    for (double& v : w_) v /= sum;
  }

  /// Normalizes arbitrary nonnegative mass; throws DegenerateSupport when it is all zero.
  static SimplexVector from_mass(std::vector<double> mass) {
    double sum = 0.0;
    for (double v : mass) {
      require(std::isfinite(v) && v >= 0.0, Errc::InvalidArgument, "mass must be finite and >= 0");
      sum += v;
    }
    require(sum > 0.0, Errc::DegenerateSupport, "zero total mass");
    for (double& v : mass) v /= sum;
    SimplexVector out;
    out.w_ = std::move(mass);
    return out;
  }

  static SimplexVector uniform(std::size_t n) {
    require(n > 0, Errc::InvalidArgument, "simplex dimension must be positive");
    return from_mass(std::vector<double>(n, 1.0));
  }

  static SimplexVector vertex(std::size_t n, std::size_t k) {
    std::vector<double> w(n, 0.0);
    w.at(k) = 1.0;
    return SimplexVector(std::move(w));
  }

  std::size_t size() const noexcept { return w_.size(); }
  double operator[](std::size_t k) const { return w_[k]; }
  const std::vector<double>& weights() const noexcept { return w_; }

 private:
  std::vector<double> w_;
};

}  // namespace mftg
