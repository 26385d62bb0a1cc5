#pragma once

#include <cstdint>

#include "lcrasch/types.hpp"

namespace lcrasch {

/// P(X_i = 1 | theta_d) = exp(theta_d - beta_i) / (1 + exp(theta_d - beta_i)).
/// Stable over the whole double range; throws std::invalid_argument on
/// non-finite input.
double item_response_prob(double theta_d, double beta_i);

/// Product over observed items of the Bernoulli factors given one support
/// point. Missing-by-design entries contribute a factor of 1.
double class_conditional_pattern_prob(const Pattern& x,
                                      const std::vector<double>& zeta_c,
                                      const ItemParameters& beta,
                                      const DimensionMap& dmap);
double log_class_conditional_pattern_prob(const Pattern& x,
                                          const std::vector<double>& zeta_c,
                                          const ItemParameters& beta,
                                          const DimensionMap& dmap);

/// Mixture over classes: sum_c pi_c * p(x | zeta_c).
double manifest_prob(const Pattern& x, const LatentStructure& latent,
                     const ItemParameters& beta, const DimensionMap& dmap);
double log_manifest_prob(const Pattern& x, const LatentStructure& latent,
                         const ItemParameters& beta, const DimensionMap& dmap);

struct SimulatedData {
  std::vector<Pattern> rows;     // one complete pattern per subject
  std::vector<int> true_class;   // generating class per subject
  PatternCounts data;            // rows merged into pattern counts
};

/// Draw n subjects: class from the weights, then each item independently.
/// Deterministic given the seed.
SimulatedData simulate_responses(const LatentStructure& latent,
                                 const ItemParameters& beta,
                                 const DimensionMap& dmap, long long n,
                                 std::uint64_t seed);

/// All 2^k complete patterns in lexicographic order (test/enumeration aid,
/// k <= 20).
std::vector<Pattern> enumerate_patterns(int item_count);

}  // namespace lcrasch
