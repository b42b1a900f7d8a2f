// Seeded random streams. Distribution sampling is implemented on top of the
// raw mt19937_64 output so that results are identical across standard-library
// implementations, which the reproducibility contract relies on.
#pragma once

#include "deepsta/common.hpp"

#include <cmath>
#include <cstdint>
#include <random>

namespace deepsta {

// splitmix64; used to derive independent stream seeds from (seed, tags...).
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base) { return mix64(base); }

template <typename... Tags>
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag, Tags... rest) {
  return derive_seed(mix64(base ^ mix64(tag)), rest...);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1).
  Scalar uniform() { return static_cast<Scalar>(gen_() >> 11) * 0x1.0p-53; }

  Scalar uniform(Scalar lo, Scalar hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  int uniform_int(int n) {
    // Rejection sampling keeps the draw exactly uniform.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % static_cast<std::uint64_t>(n);
    std::uint64_t v;
    do {
      v = gen_();
    } while (v >= limit);
    return static_cast<int>(v % static_cast<std::uint64_t>(n));
  }

  // Standard normal via Box-Muller.
  Scalar normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    Scalar u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const Scalar u2 = uniform();
    const Scalar r = std::sqrt(-2.0 * std::log(u1));
    const Scalar theta = 2.0 * M_PI * u2;
    cached_ = r * std::sin(theta);
    has_cached_ = true;
    return r * std::cos(theta);
  }

  Scalar normal(Scalar mean, Scalar std) { return mean + std * normal(); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
      std::swap(v[static_cast<std::size_t>(i)], v[static_cast<std::size_t>(uniform_int(i + 1))]);
    }
  }

  // k distinct values from [0, n), order randomized.
  std::vector<int> sample_without_replacement(int n, int k) {
    std::vector<int> all(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
    shuffle(all);
    all.resize(static_cast<std::size_t>(std::min(n, k)));
    return all;
  }

 private:
  std::mt19937_64 gen_;
  Scalar cached_ = 0.0;
  bool has_cached_ = false;
};

// Walker alias table for O(1) draws from a fixed discrete distribution.
class AliasTable {
 public:
  AliasTable() = default;

  explicit AliasTable(const Vector& weights) {
    const int n = static_cast<int>(weights.size());
    if (n == 0) throw DimensionError("alias table requires at least one weight");
    const Scalar total = weights.sum();
    if (!(total > 0.0) || !weights.allFinite()) {
      throw NumericError("alias table weights must be finite with positive sum");
    }
    prob_.resize(static_cast<std::size_t>(n));
    alias_.assign(static_cast<std::size_t>(n), 0);
    std::vector<int> small, large;
    std::vector<Scalar> scaled(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      scaled[static_cast<std::size_t>(i)] = weights[i] * n / total;
      (scaled[static_cast<std::size_t>(i)] < 1.0 ? small : large).push_back(i);
    }
    while (!small.empty() && !large.empty()) {
      const int s = small.back();
      small.pop_back();
      const int l = large.back();
      prob_[static_cast<std::size_t>(s)] = scaled[static_cast<std::size_t>(s)];
      alias_[static_cast<std::size_t>(s)] = l;
      scaled[static_cast<std::size_t>(l)] -= 1.0 - scaled[static_cast<std::size_t>(s)];
      if (scaled[static_cast<std::size_t>(l)] < 1.0) {
        large.pop_back();
        small.push_back(l);
      }
    }
    for (int i : large) prob_[static_cast<std::size_t>(i)] = 1.0;
    for (int i : small) prob_[static_cast<std::size_t>(i)] = 1.0;
  }

  int sample(Rng& rng) const {
    const int i = rng.uniform_int(static_cast<int>(prob_.size()));
    return rng.uniform() < prob_[static_cast<std::size_t>(i)] ? i : alias_[static_cast<std::size_t>(i)];
  }

  bool empty() const { return prob_.empty(); }

 private:
  std::vector<Scalar> prob_;
  std::vector<int> alias_;
};

}  // namespace deepsta
