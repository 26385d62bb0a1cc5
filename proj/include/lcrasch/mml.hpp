#pragma once

#include <cstdint>
#include <utility>

#include "lcrasch/model.hpp"
#include "lcrasch/types.hpp"

namespace lcrasch {

struct FitConfig {
  int max_iterations = 5000;
  double loglik_tolerance = 1e-8;  // absolute increase threshold
  int n_random_starts = 20;
  bool deterministic_start = true;
  std::uint64_t seed = 0;
  int newton_max_steps = 50;
  double newton_tolerance = 1e-10;
  int threads = 1;  // 0 = hardware concurrency
};

struct FittedModel {
  LatentStructure latent;
  ItemParameters beta;
  DimensionMap dmap;
  double loglik = 0.0;
  int n_parameters = 0;  // (C-1) + D*C + (k-D)
  bool converged = false;
  int n_iterations = 0;
  int start_id = -1;  // which start won
  std::vector<std::string> warnings;
};

/// sum_x n(x) * log p(x), with the class mixture folded in log space.
double observed_loglik(const PatternCounts& data, const LatentStructure& latent,
                       const ItemParameters& beta, const DimensionMap& dmap);

/// Posterior class membership per pattern; each row sums to 1.
std::vector<std::vector<double>> e_step(const PatternCounts& data,
                                        const LatentStructure& latent,
                                        const ItemParameters& beta,
                                        const DimensionMap& dmap);

/// One maximization pass: closed-form weights, then a Newton update of the
/// supports and free difficulties per dimension (references held at 0).
std::pair<LatentStructure, ItemParameters> m_step(
    const PatternCounts& data, const std::vector<std::vector<double>>& posteriors,
    const LatentStructure& latent, const ItemParameters& beta,
    const DimensionMap& dmap, const FitConfig& config);

/// Multi-start EM; returns the best start with classes in canonical order.
FittedModel fit_mml(const PatternCounts& data, const ModelSpec& spec,
                    const FitConfig& config);

std::vector<double> posterior_class_probs(const FittedModel& model,
                                          const Pattern& x);

/// MAP class per pattern in data order; ties go to the lowest class index.
std::vector<int> map_assign(const FittedModel& model, const PatternCounts& data);

}  // namespace lcrasch
