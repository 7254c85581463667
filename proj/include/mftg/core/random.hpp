#pragma once

#include <cstdint>
#include <random>

namespace mftg {

/// Identifies one reproducible random sequence. Ensembles give each member
/// its own child stream, so results do not depend on evaluation order.
struct StreamId {
  std::uint64_t seed = 0;
  std::uint64_t index = 0;

  /// Stream for the k-th member of an ensemble drawn from this stream.
  StreamId child(std::uint64_t k) const {
    return StreamId{seed ^ (0x9e3779b97f4a7c15ULL * (index + 1)), k};
  }
};

class RandomStream {
 public:
  explicit RandomStream(StreamId id) : id_(id) {
    std::seed_seq seq{static_cast<std::uint32_t>(id.seed), static_cast<std::uint32_t>(id.seed >> 32),
                      static_cast<std::uint32_t>(id.index),
                      static_cast<std::uint32_t>(id.index >> 32)};
    engine_.seed(seq);
  }

  StreamId id() const noexcept { return id_; }

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  bool bernoulli(double p) { return uniform() < p; }
  std::uint64_t below(std::uint64_t n) {
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
  }

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  StreamId id_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace mftg
