#pragma once

#include <optional>

#include "lcrasch/mml.hpp"
#include "lcrasch/types.hpp"

namespace lcrasch {

/// BIC = -2 * loglik + g * ln(n).
double bic(double loglik, int g, long long n);

/// Non-redundant parameter count of the discrete multidimensional model:
/// (C-1) + D*C + (k-D).
int param_count(int class_count, int dimension_count, int item_count);

struct SelectionRow {
  std::string label;
  int class_count = 0;
  double loglik = 0.0;
  int g = 0;
  double bic = 0.0;
  bool converged = false;
  std::string error;  // non-empty when the candidate fit failed
};

struct SelectionReport {
  std::vector<SelectionRow> rows;
  int chosen = -1;  // index into rows; -1 when every candidate failed
  std::vector<std::string> notes;
};

/// Fill in BIC values and pick the minimal-BIC row (ties go to the earlier
/// row). Rows with a non-empty error are skipped.
SelectionReport build_selection_report(std::vector<SelectionRow> rows,
                                       long long n);

struct ClassSweepResult {
  SelectionReport report;
  std::vector<std::optional<FittedModel>> models;  // aligned with report.rows
};

/// Fit each candidate class count and choose by BIC; per-candidate failures
/// are recorded without aborting the sweep.
ClassSweepResult select_class_count(const PatternCounts& data,
                                    const DimensionMap& dmap,
                                    const std::vector<int>& class_counts,
                                    const FitConfig& config);

/// Weighted correlation of the latent traits over the class distribution.
struct CorrelationMatrix {
  std::vector<std::vector<double>> rho;                    // D x D
  std::vector<std::vector<double>> standardized_supports;  // C x D
};
CorrelationMatrix correlation_matrix(const FittedModel& model);

}  // namespace lcrasch
