#pragma once

#include "lcrasch/cml.hpp"
#include "lcrasch/mml.hpp"
#include "lcrasch/types.hpp"

namespace lcrasch {

/// Upper-tail probability of the chi-square distribution, via the
/// regularized incomplete gamma function (series / continued fraction).
double chi2_sf(double x, int df);

/// Joint and marginal score frequencies over two disjoint item subsets.
struct ScoreTable {
  std::vector<std::vector<long long>> joint;  // (k1+1) x (k2+1)
  std::vector<long long> marginal;            // length k1+k2+1
  long long total = 0;
};
ScoreTable score_tables(const PatternCounts& data,
                        const std::vector<int>& d1_items,
                        const std::vector<int>& d2_items);

enum class TestMethod { mml_lr, martin_lof };

struct TestResult {
  TestMethod method = TestMethod::mml_lr;
  double statistic = 0.0;
  int df = 0;
  double p_value = 1.0;
  double loglik_general = 0.0;
  double loglik_restricted = 0.0;
  std::vector<std::string> warnings;
};

/// LR test between the general model and the one with d1, d2 collapsed,
/// both fitted by discrete MML with the same class count. df = C - 1.
TestResult lr_mml_test(const PatternCounts& data, const ModelSpec& spec,
                       int d1, int d2, const FitConfig& config);

/// Martin-Lof test: CML fits on each subset and on the pooled subset plus
/// the multinomial score terms. df = k1 * k2 - 1.
struct MartinLofResult {
  TestResult result;
  double cml_d1 = 0.0;
  double cml_d2 = 0.0;
  double multinomial_joint = 0.0;
  double cml_pooled = 0.0;
  double multinomial_marginal = 0.0;
};
MartinLofResult martin_lof_test(const PatternCounts& data,
                                const std::vector<int>& d1_items,
                                const std::vector<int>& d2_items);
MartinLofResult martin_lof_test(const PatternCounts& data,
                                const DimensionMap& dmap, int d1, int d2);

}  // namespace lcrasch
