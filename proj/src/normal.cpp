#include "lcrasch/normal.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "math_util.hpp"

namespace lcrasch {

namespace {

using detail::log1pexp;
using detail::log_sigmoid;
using detail::sigmoid;

constexpr double kSigmaMin = 1e-6;
constexpr double kSigmaMax = 100.0;

struct NodeStats {
  // expected 1-counts and exposures per (node, item)
  std::vector<double> r, m;
  int Q, k;
  NodeStats(int Q_, int k_) : r(Q_ * k_, 0.0), m(Q_ * k_, 0.0), Q(Q_), k(k_) {}
  double& rr(int q, int i) { return r[q * k + i]; }
  double& mm(int q, int i) { return m[q * k + i]; }
};

// log p(x | theta_q) for every pattern and node, plus the marginal loglik.
double node_posteriors(const PatternCounts& data, const std::vector<double>& beta,
                       const std::vector<double>& theta,
                       const std::vector<double>& logw,
                       std::vector<std::vector<double>>& post) {
  const int Q = static_cast<int>(theta.size());
  const int k = data.item_count();
  std::vector<double> lp1(Q * k), lp0(Q * k);
  for (int q = 0; q < Q; ++q)
    for (int i = 0; i < k; ++i) {
      const double eta = theta[q] - beta[i];
      lp1[q * k + i] = log_sigmoid(eta);
      lp0[q * k + i] = log_sigmoid(-eta);
    }
  post.assign(data.size(), std::vector<double>(Q));
  std::vector<double> terms(Q);
  double loglik = 0.0;
  for (std::size_t p = 0; p < data.size(); ++p) {
    const Pattern& x = data.patterns[p];
    for (int q = 0; q < Q; ++q) {
      double ll = logw[q];
      for (int i = 0; i < k; ++i) {
        if (x[i] == 1)
          ll += lp1[q * k + i];
        else if (x[i] == 0)
          ll += lp0[q * k + i];
      }
      terms[q] = ll;
    }
    const double norm = detail::logsumexp(terms);
    for (int q = 0; q < Q; ++q) post[p][q] = std::exp(terms[q] - norm);
    loglik += static_cast<double>(data.counts[p]) * norm;
  }
  return loglik;
}

// 1-d Newton with halving on a concave objective; returns the new value.
template <typename F, typename GH>
double newton_1d(double x, double lo, double hi, F objective, GH grad_hess,
                 int max_steps, double tol) {
  double f = objective(x);
  for (int step = 0; step < max_steps; ++step) {
    auto [g, h] = grad_hess(x);
    if ((x >= hi && g > 0) || (x <= lo && g < 0)) break;
    if (std::abs(g) < tol) break;
    double dir = (h < -1e-300) ? -g / h : (g > 0 ? 1.0 : -1.0);
    bool accepted = false;
    for (double t = 1.0; t > 1e-12; t *= 0.5) {
      const double x_try = std::clamp(x + t * dir, lo, hi);
      const double f_try = objective(x_try);
      if (f_try >= f) {
        if (std::abs(x_try - x) < tol) {
          x = x_try;
          return x;
        }
        x = x_try;
        f = f_try;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  return x;
}

}  // namespace

GaussHermite gauss_hermite(int n) {
  if (n < 1) throw std::invalid_argument("gauss_hermite: need at least one node");
  // Golub-Welsch on the symmetric tridiagonal Jacobi matrix
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int j = 1; j < n; ++j) {
    const double b = std::sqrt(j / 2.0);
    J(j - 1, j) = b;
    J(j, j - 1) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  if (es.info() != Eigen::Success)
    throw NumericError("gauss_hermite: eigensolver failed");
  GaussHermite gh;
  gh.nodes.resize(n);
  gh.weights.resize(n);
  const double mu0 = std::sqrt(std::numbers::pi);
  for (int i = 0; i < n; ++i) {
    gh.nodes[i] = es.eigenvalues()[i];
    const double v0 = es.eigenvectors()(0, i);
    gh.weights[i] = mu0 * v0 * v0;
  }
  return gh;
}

double marginal_loglik_quadrature(const PatternCounts& data,
                                  const std::vector<double>& beta, double sigma,
                                  int node_count) {
  if (sigma <= 0.0)
    throw std::invalid_argument("marginal_loglik_quadrature: sigma must be > 0");
  if (node_count < 5)
    throw std::invalid_argument("marginal_loglik_quadrature: need >= 5 nodes");
  if (static_cast<int>(beta.size()) != data.item_count())
    throw ValidationError("marginal_loglik_quadrature: beta length mismatch");

  const GaussHermite gh = gauss_hermite(node_count);
  const double root2 = std::numbers::sqrt2;
  std::vector<double> theta(node_count), logw(node_count);
  for (int q = 0; q < node_count; ++q) {
    theta[q] = root2 * sigma * gh.nodes[q];
    logw[q] = std::log(gh.weights[q]) - 0.5 * std::log(std::numbers::pi);
  }
  std::vector<std::vector<double>> post;
  return node_posteriors(data, beta, theta, logw, post);
}

NormalFit fit_normal_unidim(const PatternCounts& data, const FitConfig& config,
                            int node_count) {
  validate(data);
  if (data.size() == 0) throw std::invalid_argument("fit_normal_unidim: empty data");
  if (node_count < 5)
    throw std::invalid_argument("fit_normal_unidim: need >= 5 nodes");
  const int k = data.item_count();
  const int Q = node_count;

  const GaussHermite gh = gauss_hermite(Q);
  const double root2 = std::numbers::sqrt2;
  std::vector<double> a(Q), logw(Q);
  for (int q = 0; q < Q; ++q) {
    a[q] = root2 * gh.nodes[q];  // theta_q = a_q * sigma
    logw[q] = std::log(gh.weights[q]) - 0.5 * std::log(std::numbers::pi);
  }

  // start from the item logits, sigma = 1
  std::vector<double> ones(k, 0.0), seen(k, 0.0);
  for (std::size_t p = 0; p < data.size(); ++p)
    for (int i = 0; i < k; ++i) {
      if (data.patterns[p][i] == kMissingResponse) continue;
      seen[i] += static_cast<double>(data.counts[p]);
      if (data.patterns[p][i] == 1) ones[i] += static_cast<double>(data.counts[p]);
    }
  NormalFit fit;
  fit.quadrature_nodes = Q;
  fit.n_parameters = k + 1;
  fit.difficulties.resize(k);
  for (int i = 0; i < k; ++i) {
    const double mean = (ones[i] + 0.5) / (seen[i] + 1.0);
    fit.difficulties[i] = std::clamp(-detail::logit(mean), -kBetaMax, kBetaMax);
  }
  fit.latent_sd = 1.0;

  std::vector<std::vector<double>> post;
  std::vector<double> theta(Q);
  double prev = -std::numeric_limits<double>::infinity();
  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    for (int q = 0; q < Q; ++q) theta[q] = a[q] * fit.latent_sd;
    const double ll = node_posteriors(data, fit.difficulties, theta, logw, post);
    fit.n_iterations = iter;
    fit.loglik = ll;
    if (std::abs(ll - prev) < config.loglik_tolerance) {
      fit.converged = true;
      break;
    }
    prev = ll;

    NodeStats stats(Q, k);
    for (std::size_t p = 0; p < data.size(); ++p) {
      const double n = static_cast<double>(data.counts[p]);
      const Pattern& x = data.patterns[p];
      for (int q = 0; q < Q; ++q) {
        const double w = n * post[p][q];
        if (w == 0.0) continue;
        for (int i = 0; i < k; ++i) {
          if (x[i] == kMissingResponse) continue;
          stats.mm(q, i) += w;
          if (x[i] == 1) stats.rr(q, i) += w;
        }
      }
    }

    // per-item difficulty updates at fixed sigma
    const double sd = fit.latent_sd;
    for (int i = 0; i < k; ++i) {
      auto obj = [&](double b) {
        double f = 0.0;
        for (int q = 0; q < Q; ++q) {
          const double m = stats.mm(q, i);
          if (m == 0.0) continue;
          const double eta = a[q] * sd - b;
          f += stats.rr(q, i) * eta - m * log1pexp(eta);
        }
        return f;
      };
      auto gh2 = [&](double b) {
        double g = 0.0, h = 0.0;
        for (int q = 0; q < Q; ++q) {
          const double m = stats.mm(q, i);
          if (m == 0.0) continue;
          const double p = sigmoid(a[q] * sd - b);
          g -= stats.rr(q, i) - m * p;
          h -= m * p * (1.0 - p);
        }
        return std::pair{g, h};
      };
      fit.difficulties[i] = newton_1d(fit.difficulties[i], -kBetaMax, kBetaMax,
                                      obj, gh2, config.newton_max_steps,
                                      config.newton_tolerance);
    }

    // 1-d Newton for sigma at the fresh difficulties
    auto obj_s = [&](double s) {
      double f = 0.0;
      for (int q = 0; q < Q; ++q)
        for (int i = 0; i < k; ++i) {
          const double m = stats.mm(q, i);
          if (m == 0.0) continue;
          const double eta = a[q] * s - fit.difficulties[i];
          f += stats.rr(q, i) * eta - m * log1pexp(eta);
        }
      return f;
    };
    auto gh_s = [&](double s) {
      double g = 0.0, h = 0.0;
      for (int q = 0; q < Q; ++q)
        for (int i = 0; i < k; ++i) {
          const double m = stats.mm(q, i);
          if (m == 0.0) continue;
          const double p = sigmoid(a[q] * s - fit.difficulties[i]);
          g += a[q] * (stats.rr(q, i) - m * p);
          h -= a[q] * a[q] * m * p * (1.0 - p);
        }
      return std::pair{g, h};
    };
    fit.latent_sd = newton_1d(fit.latent_sd, kSigmaMin, kSigmaMax, obj_s, gh_s,
                              config.newton_max_steps, config.newton_tolerance);
  }
  if (!fit.converged) {
    for (int q = 0; q < Q; ++q) theta[q] = a[q] * fit.latent_sd;
    fit.loglik = node_posteriors(data, fit.difficulties, theta, logw, post);
  }
  return fit;
}

}  // namespace lcrasch
