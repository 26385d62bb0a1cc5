#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace lcrasch {

/// Clamp bound for latent support points, in logit units. A support at the
/// bound drives the item response probability to ~2e-9 (or 1 - 2e-9), which
/// stands in for the degenerate "never/always responds 1" class.
inline constexpr double kZMax = 20.0;

/// Clamp bound for item difficulties inside the solvers.
inline constexpr double kBetaMax = 30.0;

/// Marker for an item skipped by design within a response pattern.
inline constexpr std::int8_t kMissingResponse = -1;

/// A binary response pattern; entries are 0, 1 or kMissingResponse.
using Pattern = std::vector<std::int8_t>;

/// Malformed input: files, shapes, codes, maps.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numeric procedure failed or the request is numerically degenerate.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Conditional ML cannot identify a difficulty (all-0 / all-1 item).
class SeparationError : public NumericError {
 public:
  SeparationError(const std::string& msg, std::vector<int> items)
      : NumericError(msg), offending_items(std::move(items)) {}
  std::vector<int> offending_items;
};

/// Partition of items into disjoint dimensions. assignment[i] is the
/// 0-based dimension of item i; every dimension must be non-empty.
struct DimensionMap {
  int item_count = 0;
  int dimension_count = 0;
  std::vector<int> assignment;
  std::vector<std::string> item_labels;  // size item_count
  std::vector<std::string> dim_names;    // size dimension_count

  static DimensionMap from_assignment(std::vector<int> assignment,
                                      int dimension_count,
                                      std::vector<std::string> item_labels = {},
                                      std::vector<std::string> dim_names = {});

  int dimension_of(int item) const { return assignment.at(item); }
  std::vector<std::vector<int>> items_by_dimension() const;
  std::vector<int> dimension_sizes() const;

  /// Map with d2 merged into d1; dimensions after d2 shift down by one.
  DimensionMap merged(int d1, int d2) const;
};

/// Item difficulties with one reference item per dimension fixed at 0.
struct ItemParameters {
  std::vector<double> difficulties;
  std::vector<int> reference_items;  // one item index per dimension

  /// Builds parameters from raw difficulties: picks the given references
  /// (default: first item of each dimension) and shifts each dimension so
  /// its reference sits exactly at 0.
  static ItemParameters anchored(std::vector<double> difficulties,
                                 const DimensionMap& dmap,
                                 std::vector<int> reference_items = {});
};

/// Discrete latent-trait distribution: C support points in R^D with weights.
struct LatentStructure {
  std::vector<std::vector<double>> supports;  // C rows of length D
  std::vector<double> weights;                // length C, positive, sums to 1

  int class_count() const { return static_cast<int>(weights.size()); }
  int dimension_count() const {
    return supports.empty() ? 0 : static_cast<int>(supports.front().size());
  }

  /// Classes reordered by ascending support in dimension 1, ties broken by
  /// the following dimensions.
  LatentStructure canonical() const;
};

/// Compressed response data: distinct patterns with positive frequencies.
struct PatternCounts {
  std::vector<Pattern> patterns;
  std::vector<long long> counts;
  long long total = 0;

  int item_count() const {
    return patterns.empty() ? 0 : static_cast<int>(patterns.front().size());
  }
  std::size_t size() const { return patterns.size(); }

  /// Merge per-subject rows into sorted distinct patterns.
  static PatternCounts from_rows(const std::vector<Pattern>& rows);
  static PatternCounts from_patterns(std::vector<Pattern> patterns,
                                     std::vector<long long> counts);

  /// Restriction to the given item columns (re-merged, re-sorted).
  PatternCounts subset(const std::vector<int>& items) const;
};

/// What to fit: number of latent classes plus the item-dimension map.
struct ModelSpec {
  int class_count = 1;
  DimensionMap dimension_map;
};

void validate(const DimensionMap& dmap);
void validate(const ItemParameters& beta, const DimensionMap& dmap);
void validate(const LatentStructure& latent);
void validate(const PatternCounts& data);

}  // namespace lcrasch
