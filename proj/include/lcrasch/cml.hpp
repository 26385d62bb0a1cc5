#pragma once

#include "lcrasch/types.hpp"

namespace lcrasch {

/// Elementary symmetric function values gamma_0..gamma_k of the epsilons.
struct EsfTable {
  std::vector<double> epsilons;  // eps_i = exp(-beta_i), all > 0
  std::vector<double> gammas;    // length k+1, gamma_0 = 1
};

/// Summation recursion, O(k^2). Throws on nonpositive epsilons.
EsfTable esf(const std::vector<double>& epsilons);

/// Conditional log-likelihood of the given (subset-restricted) data at beta.
/// Extreme-score subjects contribute exactly 0.
double conditional_loglik(const PatternCounts& subset_data,
                          const std::vector<double>& beta);

struct CmlFit {
  std::vector<double> difficulties;  // sum-to-zero normalized
  double loglik = 0.0;               // maximum conditional log-likelihood
  bool converged = false;
  int n_iterations = 0;
};

/// Conditional maximum likelihood on the given item subset via Newton-Raphson
/// with analytic ESF derivatives. Throws SeparationError when an item is
/// all-0 or all-1 among the non-extreme subjects.
CmlFit fit_cml(const PatternCounts& data, const std::vector<int>& items);

}  // namespace lcrasch
