#pragma once

#include "lcrasch/mml.hpp"
#include "lcrasch/types.hpp"

namespace lcrasch {

/// Gauss-Hermite rule for weight exp(-t^2): integral ~= sum w_i f(t_i).
struct GaussHermite {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussHermite gauss_hermite(int n);

/// Unidimensional Rasch fit with a N(0, sigma^2) latent trait.
struct NormalFit {
  std::vector<double> difficulties;  // all k free
  double latent_sd = 1.0;
  double loglik = 0.0;
  int n_parameters = 0;  // k + 1
  int quadrature_nodes = 21;
  bool converged = false;
  int n_iterations = 0;
};

/// sum_x n(x) log integral p(x|theta) phi(theta; 0, sigma^2) dtheta,
/// approximated with a node_count-point Gauss-Hermite rule.
double marginal_loglik_quadrature(const PatternCounts& data,
                                  const std::vector<double>& beta, double sigma,
                                  int node_count);

/// EM over the quadrature grid: nodes act as pseudo-classes with fixed
/// weights; difficulties by per-item Newton, sigma by a 1-d Newton.
NormalFit fit_normal_unidim(const PatternCounts& data, const FitConfig& config,
                            int node_count = 21);

}  // namespace lcrasch
