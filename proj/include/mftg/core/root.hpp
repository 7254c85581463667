#pragma once

#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <cstdint>

#include "mftg/core/error.hpp"

namespace mftg {

/// Root of a continuous scalar function on [lo, hi] (TOMS 748).
/// Stops when the bracket is narrower than tol or |f| <= tol.
template <class F>
double bracketed_root(F&& f, double lo, double hi, double tol = 1e-12) {
  require(std::isfinite(lo) && std::isfinite(hi) && lo <= hi, Errc::InvalidArgument,
          "bracketed_root: invalid interval");
  const double flo = f(lo);
  const double fhi = f(hi);
  require(std::isfinite(flo) && std::isfinite(fhi), Errc::NonFinite,
          "bracketed_root: non-finite endpoint value");
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo < 0.0) == (fhi < 0.0)) throw Error(Errc::NoBracket, "bracketed_root: no sign change");

  std::uintmax_t max_iter = 500;
  auto stop = [tol](double a, double b) { return std::abs(b - a) <= tol; };
  const auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, stop, max_iter);
  double best = r.first;
  double best_abs = std::abs(f(best));
  for (double z : {r.second, 0.5 * (r.first + r.second)}) {
    const double v = std::abs(f(z));
    if (v < best_abs) {
      best = z;
      best_abs = v;
    }
  }
  return best;
}

}  // namespace mftg
