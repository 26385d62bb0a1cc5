#pragma once

// Internal numeric helpers shared across the solvers. Not installed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

namespace lcrasch::detail {

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// log(sigma(z)) without overflow for large |z|.
inline double log_sigmoid(double z) {
  if (z >= 0.0) return -std::log1p(std::exp(-z));
  return z - std::log1p(std::exp(z));
}

/// log(1 + exp(z)) without overflow.
inline double log1pexp(double z) {
  if (z > 35.0) return z + std::exp(-z);
  if (z < -35.0) return std::exp(z);
  return std::log1p(std::exp(z));
}

inline double logit(double p) { return std::log(p / (1.0 - p)); }

inline double logsumexp(std::span<const double> v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

/// Deterministic RNG with explicit substreams; all draws go through
/// uniform64 -> double so results do not depend on the standard library's
/// distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
    std::seed_seq seq{static_cast<std::uint64_t>(0x9e3779b97f4a7c15ULL), seed,
                      stream};
    gen_.seed(seq);
  }

  double uniform01() {  // in [0, 1)
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  bool bernoulli(double p) { return uniform01() < p; }

  /// Index draw by CDF inversion over (unnormalized) positive weights.
  int categorical(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double u = uniform01() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
      acc += weights[i];
      if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size()) - 1;
  }

  /// Symmetric Dirichlet(1) draw via normalized exponentials.
  std::vector<double> simplex(int n) {
    std::vector<double> v(n);
    double s = 0.0;
    for (auto& x : v) {
      x = -std::log(1.0 - uniform01());
      s += x;
    }
    for (auto& x : v) x /= s;
    return v;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace lcrasch::detail
