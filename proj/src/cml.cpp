#include "lcrasch/cml.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "math_util.hpp"

namespace lcrasch {

namespace {

// Plain summation recursion over the items not excluded by the mask.
std::vector<double> esf_masked(const std::vector<double>& eps,
                               unsigned long long exclude_mask) {
  std::vector<double> g{1.0};
  for (std::size_t j = 0; j < eps.size(); ++j) {
    if (exclude_mask & (1ULL << j)) continue;
    g.push_back(0.0);
    for (std::size_t r = g.size() - 1; r >= 1; --r)
      g[r] += eps[j] * g[r - 1];
  }
  return g;
}

// Score-wise sufficient statistics of the non-extreme subjects.
struct CmlStats {
  std::vector<double> item_totals;   // S_i
  std::vector<double> score_counts;  // n_r, r = 0..k (extremes kept at 0 use)
  double n_nonextreme = 0.0;
};

CmlStats cml_stats(const PatternCounts& data) {
  const int k = data.item_count();
  CmlStats st;
  st.item_totals.assign(k, 0.0);
  st.score_counts.assign(k + 1, 0.0);
  for (std::size_t p = 0; p < data.size(); ++p) {
    const Pattern& x = data.patterns[p];
    int r = 0;
    for (int i = 0; i < k; ++i) {
      if (x[i] == kMissingResponse)
        throw ValidationError(
            "conditional likelihood requires complete responses on the item subset");
      r += x[i];
    }
    if (r == 0 || r == k) continue;  // conditional probability 1
    const double n = static_cast<double>(data.counts[p]);
    st.n_nonextreme += n;
    st.score_counts[r] += n;
    for (int i = 0; i < k; ++i)
      if (x[i] == 1) st.item_totals[i] += n;
  }
  return st;
}

// Scaled ESF machinery: betas shifted so min(beta) = 0, i.e. all eps <= 1.
// log gamma_r = log g[r] - r * shift.
struct ScaledEsf {
  std::vector<double> eps;  // scaled
  double shift;             // min beta
  std::vector<double> g;    // scaled gammas
};

ScaledEsf scaled_esf(const std::vector<double>& beta) {
  ScaledEsf se;
  se.shift = *std::min_element(beta.begin(), beta.end());
  se.eps.resize(beta.size());
  for (std::size_t i = 0; i < beta.size(); ++i)
    se.eps[i] = std::exp(-(beta[i] - se.shift));
  se.g = esf_masked(se.eps, 0);
  return se;
}

double conditional_loglik_stats(const CmlStats& st,
                                const std::vector<double>& beta) {
  const int k = static_cast<int>(beta.size());
  const ScaledEsf se = scaled_esf(beta);
  double ll = 0.0;
  for (int i = 0; i < k; ++i) ll -= st.item_totals[i] * beta[i];
  for (int r = 1; r < k; ++r) {
    if (st.score_counts[r] == 0.0) continue;
    ll -= st.score_counts[r] * (std::log(se.g[r]) - r * se.shift);
  }
  return ll;
}

}  // namespace

EsfTable esf(const std::vector<double>& epsilons) {
  if (epsilons.empty())
    throw std::invalid_argument("esf: need at least one epsilon");
  for (double e : epsilons)
    if (!(e > 0.0) || !std::isfinite(e))
      throw std::invalid_argument("esf: epsilons must be positive and finite");
  EsfTable table;
  table.epsilons = epsilons;
  table.gammas = esf_masked(epsilons, 0);
  return table;
}

double conditional_loglik(const PatternCounts& subset_data,
                          const std::vector<double>& beta) {
  if (static_cast<int>(beta.size()) != subset_data.item_count())
    throw ValidationError("conditional_loglik: beta length mismatch");
  return conditional_loglik_stats(cml_stats(subset_data), beta);
}

CmlFit fit_cml(const PatternCounts& data, const std::vector<int>& items) {
  if (items.size() < 2)
    throw std::invalid_argument("fit_cml: need an item subset of size >= 2");
  if (items.size() > 63)
    throw std::invalid_argument("fit_cml: item subset too large");
  const PatternCounts sub = data.subset(items);
  const int k = sub.item_count();
  const CmlStats st = cml_stats(sub);
  if (st.n_nonextreme == 0.0)
    throw std::invalid_argument("fit_cml: no subject with a non-extreme score");

  {
    std::vector<int> offending;
    for (int i = 0; i < k; ++i)
      if (st.item_totals[i] == 0.0 || st.item_totals[i] == st.n_nonextreme)
        offending.push_back(items[i]);
    if (!offending.empty()) {
      std::ostringstream msg;
      msg << "fit_cml: separation, difficulty diverges for item(s)";
      for (int i : offending) msg << ' ' << i;
      throw SeparationError(msg.str(), offending);
    }
  }

  // Free parameterization: beta_k = -(beta_1 + ... + beta_{k-1}).
  std::vector<double> beta(k, 0.0);
  auto expand = [&](const Eigen::VectorXd& free) {
    double s = 0.0;
    for (int i = 0; i < k - 1; ++i) {
      beta[i] = free[i];
      s += free[i];
    }
    beta[k - 1] = -s;
  };

  Eigen::VectorXd free = Eigen::VectorXd::Zero(k - 1);
  expand(free);
  double ll = conditional_loglik_stats(st, beta);

  CmlFit fit;
  const int max_steps = 200;
  const double grad_tol = 1e-8;
  for (int step = 0; step < max_steps; ++step) {
    fit.n_iterations = step;
    const ScaledEsf se = scaled_esf(beta);

    // leave-one-out and leave-two-out scaled ESFs for the derivatives
    std::vector<std::vector<double>> g1(k);
    for (int i = 0; i < k; ++i) g1[i] = esf_masked(se.eps, 1ULL << i);

    // pi[r][i] = conditional P(X_i = 1 | score r)
    std::vector<std::vector<double>> pi(k + 1, std::vector<double>(k, 0.0));
    for (int r = 1; r < k; ++r) {
      if (st.score_counts[r] == 0.0) continue;
      for (int i = 0; i < k; ++i)
        pi[r][i] = se.eps[i] * g1[i][r - 1] / se.g[r];
    }

    Eigen::VectorXd grad_full = Eigen::VectorXd::Zero(k);
    for (int i = 0; i < k; ++i) {
      grad_full[i] = -st.item_totals[i];
      for (int r = 1; r < k; ++r)
        grad_full[i] += st.score_counts[r] * pi[r][i];
    }

    Eigen::MatrixXd hess_full = Eigen::MatrixXd::Zero(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = i; j < k; ++j) {
        std::vector<double> g2;
        if (j > i) g2 = esf_masked(se.eps, (1ULL << i) | (1ULL << j));
        double h = 0.0;
        for (int r = 1; r < k; ++r) {
          if (st.score_counts[r] == 0.0) continue;
          double cov;
          if (i == j) {
            cov = pi[r][i] * (1.0 - pi[r][i]);
          } else {
            const double pij =
                (r >= 2) ? se.eps[i] * se.eps[j] * g2[r - 2] / se.g[r] : 0.0;
            cov = pij - pi[r][i] * pi[r][j];
          }
          h -= st.score_counts[r] * cov;
        }
        hess_full(i, j) = h;
        hess_full(j, i) = h;
      }

    // project onto the sum-to-zero parameterization
    Eigen::VectorXd g(k - 1);
    Eigen::MatrixXd H(k - 1, k - 1);
    for (int i = 0; i < k - 1; ++i) {
      g[i] = grad_full[i] - grad_full[k - 1];
      for (int j = 0; j < k - 1; ++j)
        H(i, j) = hess_full(i, j) - hess_full(i, k - 1) -
                  hess_full(k - 1, j) + hess_full(k - 1, k - 1);
    }

    if (g.lpNorm<Eigen::Infinity>() < grad_tol) {
      fit.converged = true;
      break;
    }

    Eigen::VectorXd dir;
    bool ok = false;
    for (double ridge : {0.0, 1e-8, 1e-4, 1e-1, 1e2}) {
      Eigen::MatrixXd A = -H;
      if (ridge > 0) A.diagonal().array() += ridge;
      Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
      if (ldlt.info() != Eigen::Success) continue;
      dir = ldlt.solve(g);
      if (dir.allFinite() && g.dot(dir) > 0) {
        ok = true;
        break;
      }
    }
    if (!ok) break;

    // inside the quadratic basin the objective gain falls below double
    // resolution, so take small Newton steps as-is; halve only large ones
    if (dir.lpNorm<Eigen::Infinity>() <
        1e-5 * (1.0 + free.lpNorm<Eigen::Infinity>())) {
      free += dir;
      expand(free);
      ll = conditional_loglik_stats(st, beta);
      continue;
    }

    bool accepted = false;
    for (double t = 1.0; t > 1e-12; t *= 0.5) {
      const Eigen::VectorXd free_try = free + t * dir;
      std::vector<double> beta_save = beta;
      expand(free_try);
      const double ll_try = conditional_loglik_stats(st, beta);
      if (ll_try >= ll) {
        free = free_try;
        ll = ll_try;
        accepted = true;
        break;
      }
      beta = std::move(beta_save);
    }
    if (!accepted) break;
  }

  fit.difficulties = beta;
  fit.loglik = ll;
  return fit;
}

}  // namespace lcrasch
