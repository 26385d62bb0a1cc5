#include "lcrasch/selection.hpp"

#include <cmath>
#include <limits>

namespace lcrasch {

double bic(double loglik, int g, long long n) {
  if (n < 1) throw std::invalid_argument("bic: n must be >= 1");
  return -2.0 * loglik + g * std::log(static_cast<double>(n));
}

int param_count(int class_count, int dimension_count, int item_count) {
  if (class_count < 1 || dimension_count < 1 || item_count < dimension_count)
    throw std::invalid_argument("param_count: invalid model shape");
  return (class_count - 1) + dimension_count * class_count +
         (item_count - dimension_count);
}

SelectionReport build_selection_report(std::vector<SelectionRow> rows,
                                       long long n) {
  SelectionReport report;
  for (auto& row : rows)
    if (row.error.empty()) row.bic = bic(row.loglik, row.g, n);
  report.rows = std::move(rows);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const auto& row = report.rows[i];
    if (!row.error.empty()) continue;
    if (row.bic < best) {  // strict: ties keep the earlier (smaller) candidate
      best = row.bic;
      report.chosen = static_cast<int>(i);
    }
  }
  return report;
}

ClassSweepResult select_class_count(const PatternCounts& data,
                                    const DimensionMap& dmap,
                                    const std::vector<int>& class_counts,
                                    const FitConfig& config) {
  if (class_counts.empty())
    throw std::invalid_argument("select_class_count: empty candidate range");

  ClassSweepResult out;
  std::vector<SelectionRow> rows;
  for (int C : class_counts) {
    SelectionRow row;
    row.label = "C=" + std::to_string(C);
    row.class_count = C;
    try {
      FittedModel model = fit_mml(data, ModelSpec{C, dmap}, config);
      row.loglik = model.loglik;
      row.g = model.n_parameters;
      row.converged = model.converged;
      for (const auto& w : model.warnings)
        out.report.notes.push_back(row.label + ": " + w);
      out.models.push_back(std::move(model));
    } catch (const std::exception& e) {
      row.error = e.what();
      out.models.emplace_back();
    }
    rows.push_back(std::move(row));
  }
  auto notes = std::move(out.report.notes);
  out.report = build_selection_report(std::move(rows), data.total);
  for (auto& n : notes) out.report.notes.push_back(std::move(n));
  return out;
}

CorrelationMatrix correlation_matrix(const FittedModel& model) {
  const int C = model.latent.class_count();
  const int D = model.latent.dimension_count();
  if (C < 2)
    throw NumericError(
        "correlation_matrix: undefined for a single latent class");

  std::vector<double> mean(D, 0.0), sd(D, 0.0);
  for (int d = 0; d < D; ++d) {
    for (int c = 0; c < C; ++c)
      mean[d] += model.latent.weights[c] * model.latent.supports[c][d];
    double var = 0.0;
    for (int c = 0; c < C; ++c) {
      const double dev = model.latent.supports[c][d] - mean[d];
      var += model.latent.weights[c] * dev * dev;
    }
    if (var <= 0.0)
      throw NumericError("correlation_matrix: dimension " +
                         model.dmap.dim_names.at(d) +
                         " is degenerate (all supports equal)");
    sd[d] = std::sqrt(var);
  }

  CorrelationMatrix out;
  out.standardized_supports.assign(C, std::vector<double>(D));
  for (int c = 0; c < C; ++c)
    for (int d = 0; d < D; ++d)
      out.standardized_supports[c][d] =
          (model.latent.supports[c][d] - mean[d]) / sd[d];

  out.rho.assign(D, std::vector<double>(D, 0.0));
  for (int d1 = 0; d1 < D; ++d1)
    for (int d2 = 0; d2 < D; ++d2) {
      double r = 0.0;
      for (int c = 0; c < C; ++c)
        r += model.latent.weights[c] * out.standardized_supports[c][d1] *
             out.standardized_supports[c][d2];
      out.rho[d1][d2] = r;
    }
  for (int d = 0; d < D; ++d) out.rho[d][d] = 1.0;
  return out;
}

}  // namespace lcrasch
