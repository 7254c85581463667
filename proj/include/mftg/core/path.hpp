#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "mftg/core/error.hpp"
#include "mftg/core/time_grid.hpp"

namespace mftg {

using State = std::vector<double>;

inline bool all_finite(const State& x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

/// A trajectory sampled on every point of a TimeGrid.
struct Path {
  TimeGrid grid;
  std::vector<State> values;

  Path(TimeGrid g, std::size_t dim) : grid(g), values(g.size(), State(dim, 0.0)) {}

  std::size_t dim() const { return values.empty() ? 0 : values.front().size(); }
  std::size_t size() const { return values.size(); }

  State& operator[](std::size_t k) { return values[k]; }
  const State& operator[](std::size_t k) const { return values[k]; }
  const State& front() const { return values.front(); }
  const State& back() const { return values.back(); }

  std::vector<double> component(std::size_t j) const {
    std::vector<double> out(values.size());
    for (std::size_t k = 0; k < values.size(); ++k) out[k] = values[k].at(j);
    return out;
  }
};

inline void ensure_finite(const State& x, const char* where) {
  if (!all_finite(x)) throw Error(Errc::NonFinite, where);
}

}  // namespace mftg
