#include "lcrasch/dimtest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace lcrasch {

namespace {

// Regularized incomplete gamma, series branch: P(a, x).
double gamma_p_series(double a, double x) {
  double ap = a;
  double del = 1.0 / a;
  double sum = del;
  for (int i = 0; i < 10000; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-16)
      return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
  }
  throw NumericError("chi2_sf: series did not converge");
}

// Continued-fraction branch: Q(a, x), modified Lentz.
double gamma_q_cf(double a, double x) {
  constexpr double fpmin = std::numeric_limits<double>::min() / 1e-16;
  double b = x + 1.0 - a;
  double c = 1.0 / fpmin;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 10000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < fpmin) d = fpmin;
    c = b + an / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16)
      return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
  }
  throw NumericError("chi2_sf: continued fraction did not converge");
}

// -2 * (restricted - general), clipped only within numerical noise.
double lr_statistic(double general, double restricted) {
  double stat = -2.0 * (restricted - general);
  if (stat < 0.0) {
    if (stat < -1e-6)
      throw NumericError(
          "likelihood ratio is negative beyond numerical noise; "
          "the restricted fit beat the general one (add starts)");
    stat = 0.0;
  }
  return stat;
}

double multinomial_loglik(const std::vector<long long>& counts, long long n) {
  double ll = 0.0;
  for (long long c : counts) {
    if (c == 0) continue;  // 0 log 0 := 0
    ll += static_cast<double>(c) *
          std::log(static_cast<double>(c) / static_cast<double>(n));
  }
  return ll;
}

}  // namespace

double chi2_sf(double x, int df) {
  if (x < 0.0) throw std::invalid_argument("chi2_sf: x must be >= 0");
  if (df < 1) throw std::invalid_argument("chi2_sf: df must be >= 1");
  if (x == 0.0) return 1.0;
  const double a = 0.5 * df;
  const double t = 0.5 * x;
  if (t < a + 1.0) return 1.0 - gamma_p_series(a, t);
  return gamma_q_cf(a, t);
}

ScoreTable score_tables(const PatternCounts& data,
                        const std::vector<int>& d1_items,
                        const std::vector<int>& d2_items) {
  std::set<int> seen(d1_items.begin(), d1_items.end());
  for (int i : d2_items)
    if (!seen.insert(i).second)
      throw std::invalid_argument("score_tables: item subsets must be disjoint");

  const int k1 = static_cast<int>(d1_items.size());
  const int k2 = static_cast<int>(d2_items.size());
  ScoreTable table;
  table.joint.assign(k1 + 1, std::vector<long long>(k2 + 1, 0));
  table.marginal.assign(k1 + k2 + 1, 0);
  for (std::size_t p = 0; p < data.size(); ++p) {
    const Pattern& x = data.patterns[p];
    int r1 = 0, r2 = 0;
    for (int i : d1_items) {
      if (x.at(i) == kMissingResponse)
        throw ValidationError(
            "score_tables: missing responses on the tested subsets are unsupported");
      r1 += x[i];
    }
    for (int i : d2_items) {
      if (x.at(i) == kMissingResponse)
        throw ValidationError(
            "score_tables: missing responses on the tested subsets are unsupported");
      r2 += x[i];
    }
    table.joint[r1][r2] += data.counts[p];
    table.marginal[r1 + r2] += data.counts[p];
    table.total += data.counts[p];
  }
  return table;
}

TestResult lr_mml_test(const PatternCounts& data, const ModelSpec& spec,
                       int d1, int d2, const FitConfig& config) {
  const int D = spec.dimension_map.dimension_count;
  if (d1 == d2 || d1 < 0 || d2 < 0 || d1 >= D || d2 >= D)
    throw std::invalid_argument("lr_mml_test: invalid dimension pair");
  if (spec.class_count < 2)
    throw std::invalid_argument("lr_mml_test: needs at least two latent classes");

  const FittedModel general = fit_mml(data, spec, config);
  const ModelSpec restricted_spec{spec.class_count,
                                  spec.dimension_map.merged(d1, d2)};
  const FittedModel restricted = fit_mml(data, restricted_spec, config);

  TestResult res;
  res.method = TestMethod::mml_lr;
  res.loglik_general = general.loglik;
  res.loglik_restricted = restricted.loglik;
  res.statistic = lr_statistic(general.loglik, restricted.loglik);
  res.df = spec.class_count - 1;
  res.p_value = chi2_sf(res.statistic, res.df);
  if (!general.converged)
    res.warnings.push_back("general model fit did not converge");
  if (!restricted.converged)
    res.warnings.push_back("restricted model fit did not converge");
  return res;
}

MartinLofResult martin_lof_test(const PatternCounts& data,
                                const std::vector<int>& d1_items,
                                const std::vector<int>& d2_items) {
  const ScoreTable table = score_tables(data, d1_items, d2_items);
  const int k1 = static_cast<int>(d1_items.size());
  const int k2 = static_cast<int>(d2_items.size());
  if (k1 * k2 < 2)
    throw std::invalid_argument("martin_lof_test: subsets too small (df would be 0)");

  std::vector<int> pooled = d1_items;
  pooled.insert(pooled.end(), d2_items.begin(), d2_items.end());

  MartinLofResult out;
  try {
    out.cml_d1 = fit_cml(data, d1_items).loglik;
    out.cml_d2 = fit_cml(data, d2_items).loglik;
    out.cml_pooled = fit_cml(data, pooled).loglik;
  } catch (const SeparationError& e) {
    std::ostringstream msg;
    msg << "martin_lof_test: " << e.what();
    throw SeparationError(msg.str(), e.offending_items);
  }

  std::vector<long long> joint_flat;
  for (const auto& row : table.joint)
    joint_flat.insert(joint_flat.end(), row.begin(), row.end());
  out.multinomial_joint = multinomial_loglik(joint_flat, table.total);
  out.multinomial_marginal = multinomial_loglik(table.marginal, table.total);

  const double general = out.cml_d1 + out.cml_d2 + out.multinomial_joint;
  const double restricted = out.cml_pooled + out.multinomial_marginal;

  out.result.method = TestMethod::martin_lof;
  out.result.loglik_general = general;
  out.result.loglik_restricted = restricted;
  out.result.statistic = lr_statistic(general, restricted);
  out.result.df = k1 * k2 - 1;
  out.result.p_value = chi2_sf(out.result.statistic, out.result.df);
  return out;
}

MartinLofResult martin_lof_test(const PatternCounts& data,
                                const DimensionMap& dmap, int d1, int d2) {
  const int D = dmap.dimension_count;
  if (d1 == d2 || d1 < 0 || d2 < 0 || d1 >= D || d2 >= D)
    throw std::invalid_argument("martin_lof_test: invalid dimension pair");
  const auto by_dim = dmap.items_by_dimension();
  return martin_lof_test(data, by_dim[d1], by_dim[d2]);
}

}  // namespace lcrasch
