#include "lcrasch/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "math_util.hpp"

namespace lcrasch {

namespace {

std::vector<std::string> default_labels(const std::string& stem, int n) {
  std::vector<std::string> out;
  out.reserve(n);
  for (int i = 1; i <= n; ++i) out.push_back(stem + std::to_string(i));
  return out;
}

}  // namespace

DimensionMap DimensionMap::from_assignment(std::vector<int> assignment,
                                           int dimension_count,
                                           std::vector<std::string> item_labels,
                                           std::vector<std::string> dim_names) {
  DimensionMap dmap;
  dmap.item_count = static_cast<int>(assignment.size());
  dmap.dimension_count = dimension_count;
  dmap.assignment = std::move(assignment);
  dmap.item_labels = item_labels.empty()
                         ? default_labels("item", dmap.item_count)
                         : std::move(item_labels);
  dmap.dim_names = dim_names.empty() ? default_labels("dim", dimension_count)
                                     : std::move(dim_names);
  validate(dmap);
  return dmap;
}

std::vector<std::vector<int>> DimensionMap::items_by_dimension() const {
  std::vector<std::vector<int>> out(dimension_count);
  for (int i = 0; i < item_count; ++i) out[assignment[i]].push_back(i);
  return out;
}

std::vector<int> DimensionMap::dimension_sizes() const {
  std::vector<int> out(dimension_count, 0);
  for (int d : assignment) ++out[d];
  return out;
}

DimensionMap DimensionMap::merged(int d1, int d2) const {
  if (d1 == d2 || d1 < 0 || d2 < 0 || d1 >= dimension_count ||
      d2 >= dimension_count)
    throw std::invalid_argument("merged: dimension indices out of range");
  std::vector<int> remap(dimension_count);
  int next = 0;
  for (int d = 0; d < dimension_count; ++d) {
    if (d == d2) continue;
    remap[d] = next++;
  }
  remap[d2] = remap[d1];
  std::vector<int> assign(item_count);
  for (int i = 0; i < item_count; ++i) assign[i] = remap[assignment[i]];
  std::vector<std::string> names;
  for (int d = 0; d < dimension_count; ++d) {
    if (d == d2) continue;
    names.push_back(d == d1 ? dim_names[d1] + "+" + dim_names[d2]
                            : dim_names[d]);
  }
  return from_assignment(std::move(assign), dimension_count - 1, item_labels,
                         std::move(names));
}

ItemParameters ItemParameters::anchored(std::vector<double> difficulties,
                                        const DimensionMap& dmap,
                                        std::vector<int> reference_items) {
  if (static_cast<int>(difficulties.size()) != dmap.item_count)
    throw ValidationError("anchored: difficulty vector length mismatch");
  if (reference_items.empty()) {
    reference_items.resize(dmap.dimension_count, -1);
    for (int i = 0; i < dmap.item_count; ++i) {
      int d = dmap.assignment[i];
      if (reference_items[d] < 0) reference_items[d] = i;
    }
  }
  for (int i = 0; i < dmap.item_count; ++i) {
    int ref = reference_items.at(dmap.assignment[i]);
    if (i != ref) difficulties[i] -= difficulties[ref];
  }
  for (int d = 0; d < dmap.dimension_count; ++d)
    difficulties[reference_items[d]] = 0.0;
  ItemParameters beta{std::move(difficulties), std::move(reference_items)};
  validate(beta, dmap);
  return beta;
}

LatentStructure LatentStructure::canonical() const {
  std::vector<int> order(weights.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return supports[a] < supports[b];  // lexicographic, dimension 1 first
  });
  LatentStructure out;
  out.supports.reserve(supports.size());
  out.weights.reserve(weights.size());
  for (int c : order) {
    out.supports.push_back(supports[c]);
    out.weights.push_back(weights[c]);
  }
  return out;
}

PatternCounts PatternCounts::from_rows(const std::vector<Pattern>& rows) {
  std::map<Pattern, long long> merged;
  for (const auto& r : rows) ++merged[r];
  PatternCounts out;
  for (auto& [pat, cnt] : merged) {
    out.patterns.push_back(pat);
    out.counts.push_back(cnt);
    out.total += cnt;
  }
  validate(out);
  return out;
}

PatternCounts PatternCounts::from_patterns(std::vector<Pattern> patterns,
                                           std::vector<long long> counts) {
  if (patterns.size() != counts.size())
    throw ValidationError("from_patterns: patterns/counts length mismatch");
  std::map<Pattern, long long> merged;
  for (std::size_t i = 0; i < patterns.size(); ++i) {
    if (counts[i] <= 0)
      throw ValidationError("from_patterns: counts must be positive");
    merged[std::move(patterns[i])] += counts[i];
  }
  PatternCounts out;
  for (auto& [pat, cnt] : merged) {
    out.patterns.push_back(pat);
    out.counts.push_back(cnt);
    out.total += cnt;
  }
  validate(out);
  return out;
}

PatternCounts PatternCounts::subset(const std::vector<int>& items) const {
  const int k = item_count();
  std::map<Pattern, long long> merged;
  for (std::size_t p = 0; p < patterns.size(); ++p) {
    Pattern sub;
    sub.reserve(items.size());
    for (int i : items) {
      if (i < 0 || i >= k) throw std::invalid_argument("subset: item index out of range");
      sub.push_back(patterns[p][i]);
    }
    merged[std::move(sub)] += counts[p];
  }
  PatternCounts out;
  for (auto& [pat, cnt] : merged) {
    out.patterns.push_back(pat);
    out.counts.push_back(cnt);
    out.total += cnt;
  }
  return out;
}

void validate(const DimensionMap& dmap) {
  if (dmap.item_count <= 0) throw ValidationError("dimension map: no items");
  if (dmap.dimension_count <= 0)
    throw ValidationError("dimension map: no dimensions");
  if (dmap.dimension_count > dmap.item_count)
    throw ValidationError("dimension map: more dimensions than items");
  if (static_cast<int>(dmap.assignment.size()) != dmap.item_count)
    throw ValidationError("dimension map: assignment length mismatch");
  std::vector<int> sizes(dmap.dimension_count, 0);
  for (int d : dmap.assignment) {
    if (d < 0 || d >= dmap.dimension_count)
      throw ValidationError("dimension map: dimension index out of range");
    ++sizes[d];
  }
  for (int d = 0; d < dmap.dimension_count; ++d)
    if (sizes[d] == 0)
      throw ValidationError("dimension map: dimension " + dmap.dim_names[d] +
                            " has no items");
  if (static_cast<int>(dmap.item_labels.size()) != dmap.item_count ||
      static_cast<int>(dmap.dim_names.size()) != dmap.dimension_count)
    throw ValidationError("dimension map: label count mismatch");
}

void validate(const ItemParameters& beta, const DimensionMap& dmap) {
  if (static_cast<int>(beta.difficulties.size()) != dmap.item_count)
    throw ValidationError("item parameters: difficulty length mismatch");
  if (static_cast<int>(beta.reference_items.size()) != dmap.dimension_count)
    throw ValidationError("item parameters: one reference item per dimension required");
  for (double b : beta.difficulties)
    if (!std::isfinite(b))
      throw ValidationError("item parameters: non-finite difficulty");
  for (int d = 0; d < dmap.dimension_count; ++d) {
    int ref = beta.reference_items[d];
    if (ref < 0 || ref >= dmap.item_count || dmap.assignment[ref] != d)
      throw ValidationError("item parameters: reference item not in its dimension");
    if (beta.difficulties[ref] != 0.0)
      throw ValidationError("item parameters: reference difficulty must be 0");
  }
}

void validate(const LatentStructure& latent) {
  const int C = latent.class_count();
  if (C == 0 || latent.supports.size() != latent.weights.size())
    throw ValidationError("latent structure: supports/weights size mismatch");
  const int D = latent.dimension_count();
  double sum = 0.0;
  for (double w : latent.weights) {
    if (!(w > 0.0)) throw ValidationError("latent structure: weights must be positive");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw ValidationError("latent structure: weights must sum to 1");
  for (const auto& row : latent.supports) {
    if (static_cast<int>(row.size()) != D)
      throw ValidationError("latent structure: ragged support matrix");
    for (double z : row)
      if (!std::isfinite(z) || std::abs(z) > kZMax + 1e-9)
        throw ValidationError("latent structure: support outside clamp bound");
  }
}

void validate(const PatternCounts& data) {
  long long total = 0;
  const int k = data.item_count();
  if (data.patterns.size() != data.counts.size())
    throw ValidationError("pattern counts: patterns/counts size mismatch");
  for (std::size_t i = 0; i < data.patterns.size(); ++i) {
    if (static_cast<int>(data.patterns[i].size()) != k)
      throw ValidationError("pattern counts: ragged patterns");
    for (auto v : data.patterns[i])
      if (v != 0 && v != 1 && v != kMissingResponse)
        throw ValidationError("pattern counts: entries must be 0, 1 or missing");
    if (data.counts[i] <= 0)
      throw ValidationError("pattern counts: counts must be positive");
    if (i > 0 && !(data.patterns[i - 1] < data.patterns[i]))
      throw ValidationError("pattern counts: patterns must be sorted and distinct");
    total += data.counts[i];
  }
  if (total != data.total)
    throw ValidationError("pattern counts: total does not match counts");
}

double item_response_prob(double theta_d, double beta_i) {
  if (!std::isfinite(theta_d) || !std::isfinite(beta_i))
    throw std::invalid_argument("item_response_prob: non-finite input");
  return detail::sigmoid(theta_d - beta_i);
}

double log_class_conditional_pattern_prob(const Pattern& x,
                                          const std::vector<double>& zeta_c,
                                          const ItemParameters& beta,
                                          const DimensionMap& dmap) {
  if (static_cast<int>(x.size()) != dmap.item_count)
    throw ValidationError("pattern length does not match item count");
  double ll = 0.0;
  for (int i = 0; i < dmap.item_count; ++i) {
    if (x[i] == kMissingResponse) continue;
    const double eta = zeta_c[dmap.assignment[i]] - beta.difficulties[i];
    ll += x[i] ? detail::log_sigmoid(eta) : detail::log_sigmoid(-eta);
  }
  return ll;
}

double class_conditional_pattern_prob(const Pattern& x,
                                      const std::vector<double>& zeta_c,
                                      const ItemParameters& beta,
                                      const DimensionMap& dmap) {
  return std::exp(log_class_conditional_pattern_prob(x, zeta_c, beta, dmap));
}

double log_manifest_prob(const Pattern& x, const LatentStructure& latent,
                         const ItemParameters& beta, const DimensionMap& dmap) {
  const int C = latent.class_count();
  std::vector<double> terms(C);
  for (int c = 0; c < C; ++c)
    terms[c] = std::log(latent.weights[c]) +
               log_class_conditional_pattern_prob(x, latent.supports[c], beta,
                                                  dmap);
  return detail::logsumexp(terms);
}

double manifest_prob(const Pattern& x, const LatentStructure& latent,
                     const ItemParameters& beta, const DimensionMap& dmap) {
  return std::exp(log_manifest_prob(x, latent, beta, dmap));
}

SimulatedData simulate_responses(const LatentStructure& latent,
                                 const ItemParameters& beta,
                                 const DimensionMap& dmap, long long n,
                                 std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("simulate_responses: n must be >= 1");
  validate(latent);
  validate(beta, dmap);

  const int k = dmap.item_count;
  const int C = latent.class_count();
  // per-class per-item response probabilities, computed once
  std::vector<std::vector<double>> prob(C, std::vector<double>(k));
  for (int c = 0; c < C; ++c)
    for (int i = 0; i < k; ++i)
      prob[c][i] = detail::sigmoid(latent.supports[c][dmap.assignment[i]] -
                                   beta.difficulties[i]);

  detail::Rng rng(seed);
  SimulatedData out;
  out.rows.reserve(n);
  out.true_class.reserve(n);
  for (long long s = 0; s < n; ++s) {
    const int c = rng.categorical(latent.weights);
    Pattern row(k);
    for (int i = 0; i < k; ++i) row[i] = rng.bernoulli(prob[c][i]) ? 1 : 0;
    out.rows.push_back(std::move(row));
    out.true_class.push_back(c);
  }
  out.data = PatternCounts::from_rows(out.rows);
  return out;
}

std::vector<Pattern> enumerate_patterns(int item_count) {
  if (item_count < 0 || item_count > 20)
    throw std::invalid_argument("enumerate_patterns: item count out of range");
  std::vector<Pattern> out;
  out.reserve(1u << item_count);
  for (std::uint32_t bits = 0; bits < (1u << item_count); ++bits) {
    Pattern p(item_count);
    for (int i = 0; i < item_count; ++i)
      p[i] = (bits >> (item_count - 1 - i)) & 1u;
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace lcrasch
