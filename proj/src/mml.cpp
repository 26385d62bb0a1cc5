#include "lcrasch/mml.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <thread>

#include "math_util.hpp"

namespace lcrasch {

namespace {

using detail::log1pexp;
using detail::log_sigmoid;
using detail::sigmoid;

// Per-class per-item log response probabilities, refreshed after every
// parameter update. cell(c, i) holds (log p, log (1-p)).
struct LogProbTable {
  int C, k;
  std::vector<double> lp1, lp0;

  LogProbTable(const LatentStructure& latent, const ItemParameters& beta,
               const DimensionMap& dmap)
      : C(latent.class_count()), k(dmap.item_count), lp1(C * k), lp0(C * k) {
    for (int c = 0; c < C; ++c)
      for (int i = 0; i < k; ++i) {
        const double eta =
            latent.supports[c][dmap.assignment[i]] - beta.difficulties[i];
        lp1[c * k + i] = log_sigmoid(eta);
        lp0[c * k + i] = log_sigmoid(-eta);
      }
  }

  double log_pattern(const Pattern& x, int c) const {
    double ll = 0.0;
    const double* p1 = lp1.data() + c * k;
    const double* p0 = lp0.data() + c * k;
    for (int i = 0; i < k; ++i) {
      if (x[i] == 1)
        ll += p1[i];
      else if (x[i] == 0)
        ll += p0[i];
    }
    return ll;
  }
};

// E step with the log-likelihood as a by-product (the log normalizers).
double e_step_impl(const PatternCounts& data, const LatentStructure& latent,
                   const ItemParameters& beta, const DimensionMap& dmap,
                   std::vector<std::vector<double>>& post) {
  const int C = latent.class_count();
  const LogProbTable table(latent, beta, dmap);
  std::vector<double> logw(C);
  for (int c = 0; c < C; ++c) logw[c] = std::log(latent.weights[c]);

  post.assign(data.size(), std::vector<double>(C));
  double loglik = 0.0;
  std::vector<double> terms(C);
  for (std::size_t p = 0; p < data.size(); ++p) {
    for (int c = 0; c < C; ++c)
      terms[c] = logw[c] + table.log_pattern(data.patterns[p], c);
    const double norm = detail::logsumexp(terms);
    if (!std::isfinite(norm))
      throw NumericError("e_step: pattern with zero manifest probability");
    for (int c = 0; c < C; ++c) post[p][c] = std::exp(terms[c] - norm);
    loglik += static_cast<double>(data.counts[p]) * norm;
  }
  return loglik;
}

// Expected sufficient statistics for the weighted Rasch fit:
// r(c,i) = expected count of 1s, m(c,i) = expected exposure.
struct CellStats {
  int C, k;
  std::vector<double> r, m;
  CellStats(int C_, int k_) : C(C_), k(k_), r(C * k, 0.0), m(C * k, 0.0) {}
  double& rr(int c, int i) { return r[c * k + i]; }
  double& mm(int c, int i) { return m[c * k + i]; }
  double rr(int c, int i) const { return r[c * k + i]; }
  double mm(int c, int i) const { return m[c * k + i]; }
};

CellStats accumulate_stats(const PatternCounts& data,
                           const std::vector<std::vector<double>>& post, int C) {
  const int k = data.item_count();
  CellStats stats(C, k);
  for (std::size_t p = 0; p < data.size(); ++p) {
    const double n = static_cast<double>(data.counts[p]);
    const Pattern& x = data.patterns[p];
    for (int c = 0; c < C; ++c) {
      const double w = n * post[p][c];
      if (w == 0.0) continue;
      for (int i = 0; i < k; ++i) {
        if (x[i] == kMissingResponse) continue;
        stats.mm(c, i) += w;
        if (x[i] == 1) stats.rr(c, i) += w;
      }
    }
  }
  return stats;
}

// Weighted Bernoulli log-likelihood of one dimension block.
double block_objective(const std::vector<double>& zeta_col,
                       const std::vector<double>& beta,
                       const std::vector<int>& items, const CellStats& stats) {
  double f = 0.0;
  const int C = static_cast<int>(zeta_col.size());
  for (int c = 0; c < C; ++c)
    for (int i : items) {
      const double m = stats.mm(c, i);
      if (m == 0.0) continue;
      const double eta = zeta_col[c] - beta[i];
      f += stats.rr(c, i) * eta - m * log1pexp(eta);
    }
  return f;
}

// Newton-Raphson with step halving on the concave block objective
// F(zeta_col, beta_free). Supports are clamped to [-kZMax, kZMax] and
// difficulties to [-kBetaMax, kBetaMax]; the reference difficulty stays 0.
void newton_block(std::vector<double>& zeta_col, std::vector<double>& beta,
                  const std::vector<int>& items, int ref_item,
                  const CellStats& stats, int max_steps, double tol) {
  const int C = static_cast<int>(zeta_col.size());
  std::vector<int> free_items;
  for (int i : items)
    if (i != ref_item) free_items.push_back(i);
  const int np = C + static_cast<int>(free_items.size());

  Eigen::VectorXd g(np);
  Eigen::MatrixXd A(np, np);  // negated Hessian
  std::vector<int> slot(stats.k, -1);
  for (std::size_t j = 0; j < free_items.size(); ++j)
    slot[free_items[j]] = C + static_cast<int>(j);

  double f = block_objective(zeta_col, beta, items, stats);
  for (int step = 0; step < max_steps; ++step) {
    g.setZero();
    A.setZero();
    for (int c = 0; c < C; ++c)
      for (int i : items) {
        const double m = stats.mm(c, i);
        if (m == 0.0) continue;
        const double p = sigmoid(zeta_col[c] - beta[i]);
        const double resid = stats.rr(c, i) - m * p;
        const double w = m * p * (1.0 - p);
        g[c] += resid;
        A(c, c) += w;
        const int s = slot[i];
        if (s >= 0) {
          g[s] -= resid;
          A(s, s) += w;
          A(c, s) -= w;
          A(s, c) -= w;
        }
      }

    // ignore gradient components that only push against an active clamp
    double gmax = 0.0;
    for (int c = 0; c < C; ++c) {
      if ((zeta_col[c] >= kZMax && g[c] > 0) || (zeta_col[c] <= -kZMax && g[c] < 0))
        continue;
      gmax = std::max(gmax, std::abs(g[c]));
    }
    for (std::size_t j = 0; j < free_items.size(); ++j) {
      const double b = beta[free_items[j]];
      const double gj = g[C + j];
      if ((b >= kBetaMax && gj > 0) || (b <= -kBetaMax && gj < 0)) continue;
      gmax = std::max(gmax, std::abs(gj));
    }
    if (gmax < tol) break;

    Eigen::VectorXd dir;
    bool ok = false;
    for (double ridge : {0.0, 1e-8, 1e-4, 1e-1, 1e2}) {
      Eigen::MatrixXd Ar = A;
      if (ridge > 0) Ar.diagonal().array() += ridge;
      Eigen::LDLT<Eigen::MatrixXd> ldlt(Ar);
      if (ldlt.info() != Eigen::Success) continue;
      dir = ldlt.solve(g);
      if (dir.allFinite() && g.dot(dir) > 0) {
        ok = true;
        break;
      }
    }
    if (!ok) break;

    // backtracking with box projection; keep the old point on failure
    bool accepted = false;
    double max_move = 0.0;
    for (double t = 1.0; t > 1e-12; t *= 0.5) {
      std::vector<double> z_try = zeta_col;
      std::vector<double> b_try = beta;
      for (int c = 0; c < C; ++c)
        z_try[c] = std::clamp(zeta_col[c] + t * dir[c], -kZMax, kZMax);
      for (std::size_t j = 0; j < free_items.size(); ++j) {
        const int i = free_items[j];
        b_try[i] = std::clamp(beta[i] + t * dir[C + j], -kBetaMax, kBetaMax);
      }
      const double f_try = block_objective(z_try, b_try, items, stats);
      if (f_try >= f) {
        max_move = 0.0;
        for (int c = 0; c < C; ++c)
          max_move = std::max(max_move, std::abs(z_try[c] - zeta_col[c]));
        for (int i : free_items)
          max_move = std::max(max_move, std::abs(b_try[i] - beta[i]));
        zeta_col.swap(z_try);
        beta.swap(b_try);
        f = f_try;
        accepted = true;
        break;
      }
    }
    if (!accepted || max_move < tol) break;
  }
}

struct StartState {
  LatentStructure latent;
  ItemParameters beta;
};

// Smoothed per-item response means (observed entries only).
std::vector<double> item_means(const PatternCounts& data) {
  const int k = data.item_count();
  std::vector<double> ones(k, 0.0), seen(k, 0.0);
  for (std::size_t p = 0; p < data.size(); ++p)
    for (int i = 0; i < k; ++i) {
      if (data.patterns[p][i] == kMissingResponse) continue;
      seen[i] += static_cast<double>(data.counts[p]);
      if (data.patterns[p][i] == 1) ones[i] += static_cast<double>(data.counts[p]);
    }
  std::vector<double> means(k);
  for (int i = 0; i < k; ++i) means[i] = (ones[i] + 0.5) / (seen[i] + 1.0);
  return means;
}

std::vector<double> difficulty_from_means(const std::vector<double>& means) {
  std::vector<double> beta(means.size());
  for (std::size_t i = 0; i < means.size(); ++i)
    beta[i] = std::clamp(-detail::logit(means[i]), -kBetaMax, kBetaMax);
  return beta;
}

// Deterministic start: equispaced supports on [-2, 2], uniform weights,
// difficulties from the item logits anchored per dimension.
StartState deterministic_init(const PatternCounts& data, const ModelSpec& spec) {
  const int C = spec.class_count;
  const int D = spec.dimension_map.dimension_count;
  LatentStructure latent;
  latent.weights.assign(C, 1.0 / C);
  latent.supports.assign(C, std::vector<double>(D, 0.0));
  for (int c = 0; c < C && C > 1; ++c)
    for (int d = 0; d < D; ++d)
      latent.supports[c][d] = -2.0 + 4.0 * c / (C - 1);
  auto beta = ItemParameters::anchored(difficulty_from_means(item_means(data)),
                                       spec.dimension_map);
  return {std::move(latent), std::move(beta)};
}

StartState random_init(const PatternCounts& data, const ModelSpec& spec,
                       std::uint64_t seed, int start_id) {
  detail::Rng rng(seed, static_cast<std::uint64_t>(start_id));
  const int C = spec.class_count;
  const int D = spec.dimension_map.dimension_count;
  LatentStructure latent;
  latent.weights = rng.simplex(C);
  latent.supports.assign(C, std::vector<double>(D));
  for (int c = 0; c < C; ++c)
    for (int d = 0; d < D; ++d) latent.supports[c][d] = rng.uniform(-3.0, 3.0);
  auto base = difficulty_from_means(item_means(data));
  for (auto& b : base) b += rng.uniform(-1.0, 1.0);
  auto beta = ItemParameters::anchored(std::move(base), spec.dimension_map);
  return {std::move(latent), std::move(beta)};
}

struct StartResult {
  StartState state;
  double loglik = -std::numeric_limits<double>::infinity();
  bool converged = false;
  int iterations = 0;
};

StartResult run_em(const PatternCounts& data, const DimensionMap& dmap,
                   StartState state, const FitConfig& config) {
  StartResult res;
  std::vector<std::vector<double>> post;
  double prev = -std::numeric_limits<double>::infinity();
  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    const double ll = e_step_impl(data, state.latent, state.beta, dmap, post);
    res.iterations = iter;
    res.loglik = ll;
    if (std::abs(ll - prev) < config.loglik_tolerance) {
      res.converged = true;
      break;
    }
    prev = ll;
    auto [latent, beta] =
        m_step(data, post, state.latent, state.beta, dmap, config);
    state.latent = std::move(latent);
    state.beta = std::move(beta);
  }
  if (!res.converged)  // keep the reported value in sync with the final state
    res.loglik = e_step_impl(data, state.latent, state.beta, dmap, post);
  res.state = std::move(state);
  return res;
}

}  // namespace

double observed_loglik(const PatternCounts& data, const LatentStructure& latent,
                       const ItemParameters& beta, const DimensionMap& dmap) {
  validate(latent);
  double ll = 0.0;
  for (std::size_t p = 0; p < data.size(); ++p) {
    const double lp = log_manifest_prob(data.patterns[p], latent, beta, dmap);
    if (!std::isfinite(lp))
      throw NumericError("observed_loglik: pattern with zero manifest probability");
    ll += static_cast<double>(data.counts[p]) * lp;
  }
  return ll;
}

std::vector<std::vector<double>> e_step(const PatternCounts& data,
                                        const LatentStructure& latent,
                                        const ItemParameters& beta,
                                        const DimensionMap& dmap) {
  validate(latent);
  std::vector<std::vector<double>> post;
  e_step_impl(data, latent, beta, dmap, post);
  return post;
}

std::pair<LatentStructure, ItemParameters> m_step(
    const PatternCounts& data, const std::vector<std::vector<double>>& posteriors,
    const LatentStructure& latent, const ItemParameters& beta,
    const DimensionMap& dmap, const FitConfig& config) {
  const int C = latent.class_count();
  if (posteriors.size() != data.size())
    throw ValidationError("m_step: posterior row count mismatch");

  LatentStructure out_latent = latent;
  // closed-form weight update, floored so logs stay finite
  std::vector<double> w(C, 0.0);
  for (std::size_t p = 0; p < data.size(); ++p)
    for (int c = 0; c < C; ++c)
      w[c] += static_cast<double>(data.counts[p]) * posteriors[p][c];
  double wsum = 0.0;
  for (int c = 0; c < C; ++c) {
    w[c] = std::max(w[c] / static_cast<double>(data.total), 1e-100);
    wsum += w[c];
  }
  for (int c = 0; c < C; ++c) out_latent.weights[c] = w[c] / wsum;

  const CellStats stats = accumulate_stats(data, posteriors, C);
  ItemParameters out_beta = beta;
  const auto by_dim = dmap.items_by_dimension();
  for (int d = 0; d < dmap.dimension_count; ++d) {
    std::vector<double> zeta_col(C);
    for (int c = 0; c < C; ++c) zeta_col[c] = out_latent.supports[c][d];
    newton_block(zeta_col, out_beta.difficulties, by_dim[d],
                 out_beta.reference_items[d], stats, config.newton_max_steps,
                 config.newton_tolerance);
    for (int c = 0; c < C; ++c) out_latent.supports[c][d] = zeta_col[c];
  }
  return {std::move(out_latent), std::move(out_beta)};
}

FittedModel fit_mml(const PatternCounts& data, const ModelSpec& spec,
                    const FitConfig& config) {
  validate(spec.dimension_map);
  validate(data);
  if (data.size() == 0 || data.total == 0)
    throw std::invalid_argument("fit_mml: empty data");
  if (data.item_count() != spec.dimension_map.item_count)
    throw std::invalid_argument("fit_mml: pattern length does not match dimension map");
  if (spec.class_count < 1)
    throw std::invalid_argument("fit_mml: class count must be >= 1");

  const int n_starts = (config.deterministic_start ? 1 : 0) + config.n_random_starts;
  if (n_starts < 1)
    throw std::invalid_argument("fit_mml: at least one start required");

  std::vector<StartResult> results(n_starts);
  const int first_random = config.deterministic_start ? 1 : 0;
  auto run_one = [&](int s) {
    StartState init = (config.deterministic_start && s == 0)
                          ? deterministic_init(data, spec)
                          : random_init(data, spec, config.seed,
                                        s - first_random + 1);
    results[s] = run_em(data, spec.dimension_map, std::move(init), config);
  };

  int threads = config.threads;
  if (threads <= 0)
    threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<int>(threads, n_starts);
  if (threads <= 1) {
    for (int s = 0; s < n_starts; ++s) run_one(s);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (int s = next.fetch_add(1); s < n_starts; s = next.fetch_add(1))
          run_one(s);
      });
    for (auto& t : pool) t.join();
  }

  int best = 0;
  for (int s = 1; s < n_starts; ++s)
    if (results[s].loglik > results[best].loglik) best = s;

  FittedModel model;
  model.dmap = spec.dimension_map;
  model.latent = results[best].state.latent.canonical();
  model.beta = std::move(results[best].state.beta);
  model.loglik = results[best].loglik;
  model.converged = results[best].converged;
  model.n_iterations = results[best].iterations;
  model.start_id = best;
  const int C = spec.class_count;
  const int D = spec.dimension_map.dimension_count;
  const int k = spec.dimension_map.item_count;
  model.n_parameters = (C - 1) + D * C + (k - D);
  if (static_cast<long long>(C) > static_cast<long long>(data.size()))
    model.warnings.push_back(
        "class count exceeds the number of distinct response patterns; "
        "the model is not identifiable");
  if (!model.converged)
    model.warnings.push_back("EM did not converge within max_iterations");
  return model;
}

std::vector<double> posterior_class_probs(const FittedModel& model,
                                          const Pattern& x) {
  if (static_cast<int>(x.size()) != model.dmap.item_count)
    throw ValidationError("posterior_class_probs: pattern length mismatch");
  const int C = model.latent.class_count();
  std::vector<double> terms(C);
  for (int c = 0; c < C; ++c)
    terms[c] = std::log(model.latent.weights[c]) +
               log_class_conditional_pattern_prob(x, model.latent.supports[c],
                                                  model.beta, model.dmap);
  const double norm = detail::logsumexp(terms);
  std::vector<double> probs(C);
  for (int c = 0; c < C; ++c) probs[c] = std::exp(terms[c] - norm);
  return probs;
}

std::vector<int> map_assign(const FittedModel& model, const PatternCounts& data) {
  std::vector<int> out;
  out.reserve(data.size());
  for (const auto& x : data.patterns) {
    const auto probs = posterior_class_probs(model, x);
    int arg = 0;
    for (std::size_t c = 1; c < probs.size(); ++c)
      if (probs[c] > probs[arg]) arg = static_cast<int>(c);
    out.push_back(arg);
  }
  return out;
}

}  // namespace lcrasch
