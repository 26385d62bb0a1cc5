#pragma once

#include <limits>
#include <set>
#include <string>

#include "lcrasch/types.hpp"

namespace lcrasch {

/// Raw polytomous questionnaire table: integer category codes, NA allowed.
struct RawTable {
  static constexpr int kMissingCode = std::numeric_limits<int>::min();

  std::vector<std::string> labels;      // header row
  std::vector<std::vector<int>> rows;   // n x k

  long long row_count() const { return static_cast<long long>(rows.size()); }
  int column_count() const { return static_cast<int>(labels.size()); }
};

struct ItemSchema {
  std::string label;
  std::set<int> valid_codes;
  bool allow_missing = false;
};

struct TableSchema {
  std::vector<ItemSchema> items;
  const ItemSchema* find(const std::string& label) const;
};

/// Per-item dichotomization: which original codes map to 0 and to 1.
struct DichotomizationRule {
  std::string label;
  std::set<int> zero;
  std::set<int> one;
};
using RuleSet = std::vector<DichotomizationRule>;

/// Parse a delimiter-separated file (comma default, tab accepted) with a
/// header row; cells are integer codes or the literal NA.
RawTable load_responses(const std::string& path);
/// Parse and validate against the schema (codes in range, NA only where
/// allowed). Errors name the offending row and item.
RawTable load_responses(const std::string& path, const TableSchema& schema);
void validate_table(const RawTable& raw, const TableSchema& schema);

/// Rules file: one line per item, `label: zero={codes}; one={codes}`.
RuleSet load_rules(const std::string& path);
RuleSet parse_rules(const std::string& text, const std::string& origin);
TableSchema schema_from_rules(const RuleSet& rules, bool allow_missing = false);
/// Identity rules for already-binary data (zero={0}; one={1}).
RuleSet binary_rules(const std::vector<std::string>& labels);

/// Apply the rules and merge identical binary patterns.
PatternCounts dichotomize(const RawTable& raw, const RuleSet& rules);

/// Dimension map file: one line per dimension, `name: label, label, ...`.
struct DimensionMapConfig {
  std::vector<std::string> dim_names;
  std::vector<std::vector<std::string>> items;  // labels per dimension
};
DimensionMapConfig parse_dimension_map_file(const std::string& path);
/// Resolve against a concrete column order; every column must be assigned
/// to exactly one dimension and every mapped label must exist.
DimensionMap resolve_dimension_map(const DimensionMapConfig& config,
                                   const std::vector<std::string>& labels);
/// Resolve with the column order implied by the file itself.
DimensionMap load_dimension_map(const std::string& path);
DimensionMap load_dimension_map(const std::string& path,
                                const std::vector<std::string>& labels);

/// Keep only the named columns, in the given order.
RawTable select_columns(const RawTable& raw,
                        const std::vector<std::string>& labels);

void write_responses(const std::string& path,
                     const std::vector<std::string>& labels,
                     const std::vector<Pattern>& rows);

}  // namespace lcrasch
