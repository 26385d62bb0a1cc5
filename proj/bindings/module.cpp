// Python bindings for the latent-class Rasch toolkit.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lcrasch/cml.hpp"
#include "lcrasch/data_io.hpp"
#include "lcrasch/dimtest.hpp"
#include "lcrasch/mml.hpp"
#include "lcrasch/normal.hpp"
#include "lcrasch/selection.hpp"
#include "lcrasch/serialize.hpp"

namespace py = pybind11;
using namespace lcrasch;

PYBIND11_MODULE(_lcrasch, m) {
  m.doc() = "multidimensional latent-class Rasch model: estimation, "
            "selection and dimensionality tests";

  py::register_exception<ValidationError>(m, "ValidationError",
                                          PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_RuntimeError);

  py::class_<DimensionMap>(m, "DimensionMap")
      .def_static("from_assignment", &DimensionMap::from_assignment,
                  py::arg("assignment"), py::arg("dimension_count"),
                  py::arg("item_labels") = std::vector<std::string>{},
                  py::arg("dim_names") = std::vector<std::string>{})
      .def_readonly("item_count", &DimensionMap::item_count)
      .def_readonly("dimension_count", &DimensionMap::dimension_count)
      .def_readonly("assignment", &DimensionMap::assignment)
      .def_readonly("item_labels", &DimensionMap::item_labels)
      .def_readonly("dim_names", &DimensionMap::dim_names)
      .def("items_by_dimension", &DimensionMap::items_by_dimension)
      .def("dimension_sizes", &DimensionMap::dimension_sizes)
      .def("merged", &DimensionMap::merged, py::arg("d1"), py::arg("d2"));

  py::class_<ItemParameters>(m, "ItemParameters")
      .def_static("anchored", &ItemParameters::anchored, py::arg("difficulties"),
                  py::arg("dimension_map"),
                  py::arg("reference_items") = std::vector<int>{})
      .def_readonly("difficulties", &ItemParameters::difficulties)
      .def_readonly("reference_items", &ItemParameters::reference_items);

  py::class_<LatentStructure>(m, "LatentStructure")
      .def(py::init([](std::vector<std::vector<double>> supports,
                       std::vector<double> weights) {
             LatentStructure latent{std::move(supports), std::move(weights)};
             validate(latent);
             return latent;
           }),
           py::arg("supports"), py::arg("weights"))
      .def_readonly("supports", &LatentStructure::supports)
      .def_readonly("weights", &LatentStructure::weights)
      .def("class_count", &LatentStructure::class_count)
      .def("dimension_count", &LatentStructure::dimension_count)
      .def("canonical", &LatentStructure::canonical);

  py::class_<PatternCounts>(m, "PatternCounts")
      .def_static("from_rows", &PatternCounts::from_rows, py::arg("rows"))
      .def_static("from_patterns", &PatternCounts::from_patterns,
                  py::arg("patterns"), py::arg("counts"))
      .def_readonly("patterns", &PatternCounts::patterns)
      .def_readonly("counts", &PatternCounts::counts)
      .def_readonly("total", &PatternCounts::total)
      .def("item_count", &PatternCounts::item_count)
      .def("subset", &PatternCounts::subset, py::arg("items"));

  py::class_<ModelSpec>(m, "ModelSpec")
      .def(py::init<int, DimensionMap>(), py::arg("class_count"),
           py::arg("dimension_map"))
      .def_readonly("class_count", &ModelSpec::class_count)
      .def_readonly("dimension_map", &ModelSpec::dimension_map);

  py::class_<FitConfig>(m, "FitConfig")
      .def(py::init<>())
      .def_readwrite("max_iterations", &FitConfig::max_iterations)
      .def_readwrite("loglik_tolerance", &FitConfig::loglik_tolerance)
      .def_readwrite("n_random_starts", &FitConfig::n_random_starts)
      .def_readwrite("deterministic_start", &FitConfig::deterministic_start)
      .def_readwrite("seed", &FitConfig::seed)
      .def_readwrite("newton_max_steps", &FitConfig::newton_max_steps)
      .def_readwrite("newton_tolerance", &FitConfig::newton_tolerance)
      .def_readwrite("threads", &FitConfig::threads);

  py::class_<FittedModel>(m, "FittedModel")
      .def_readonly("latent", &FittedModel::latent)
      .def_readonly("beta", &FittedModel::beta)
      .def_readonly("dmap", &FittedModel::dmap)
      .def_readonly("loglik", &FittedModel::loglik)
      .def_readonly("n_parameters", &FittedModel::n_parameters)
      .def_readonly("converged", &FittedModel::converged)
      .def_readonly("n_iterations", &FittedModel::n_iterations)
      .def_readonly("start_id", &FittedModel::start_id)
      .def_readonly("warnings", &FittedModel::warnings);

  py::class_<SimulatedData>(m, "SimulatedData")
      .def_readonly("rows", &SimulatedData::rows)
      .def_readonly("true_class", &SimulatedData::true_class)
      .def_readonly("data", &SimulatedData::data);

  py::class_<NormalFit>(m, "NormalFit")
      .def_readonly("difficulties", &NormalFit::difficulties)
      .def_readonly("latent_sd", &NormalFit::latent_sd)
      .def_readonly("loglik", &NormalFit::loglik)
      .def_readonly("n_parameters", &NormalFit::n_parameters)
      .def_readonly("quadrature_nodes", &NormalFit::quadrature_nodes)
      .def_readonly("converged", &NormalFit::converged);

  py::class_<EsfTable>(m, "EsfTable")
      .def_readonly("epsilons", &EsfTable::epsilons)
      .def_readonly("gammas", &EsfTable::gammas);

  py::class_<CmlFit>(m, "CmlFit")
      .def_readonly("difficulties", &CmlFit::difficulties)
      .def_readonly("loglik", &CmlFit::loglik)
      .def_readonly("converged", &CmlFit::converged);

  py::enum_<TestMethod>(m, "TestMethod")
      .value("mml_lr", TestMethod::mml_lr)
      .value("martin_lof", TestMethod::martin_lof);

  py::class_<TestResult>(m, "TestResult")
      .def_readonly("method", &TestResult::method)
      .def_readonly("statistic", &TestResult::statistic)
      .def_readonly("df", &TestResult::df)
      .def_readonly("p_value", &TestResult::p_value)
      .def_readonly("loglik_general", &TestResult::loglik_general)
      .def_readonly("loglik_restricted", &TestResult::loglik_restricted)
      .def_readonly("warnings", &TestResult::warnings);

  py::class_<MartinLofResult>(m, "MartinLofResult")
      .def_readonly("result", &MartinLofResult::result)
      .def_readonly("cml_d1", &MartinLofResult::cml_d1)
      .def_readonly("cml_d2", &MartinLofResult::cml_d2)
      .def_readonly("multinomial_joint", &MartinLofResult::multinomial_joint)
      .def_readonly("cml_pooled", &MartinLofResult::cml_pooled)
      .def_readonly("multinomial_marginal",
                    &MartinLofResult::multinomial_marginal);

  py::class_<ScoreTable>(m, "ScoreTable")
      .def_readonly("joint", &ScoreTable::joint)
      .def_readonly("marginal", &ScoreTable::marginal)
      .def_readonly("total", &ScoreTable::total);

  py::class_<SelectionRow>(m, "SelectionRow")
      .def_readonly("label", &SelectionRow::label)
      .def_readonly("class_count", &SelectionRow::class_count)
      .def_readonly("loglik", &SelectionRow::loglik)
      .def_readonly("g", &SelectionRow::g)
      .def_readonly("bic", &SelectionRow::bic)
      .def_readonly("converged", &SelectionRow::converged)
      .def_readonly("error", &SelectionRow::error);

  py::class_<SelectionReport>(m, "SelectionReport")
      .def_readonly("rows", &SelectionReport::rows)
      .def_readonly("chosen", &SelectionReport::chosen)
      .def_readonly("notes", &SelectionReport::notes);

  py::class_<ClassSweepResult>(m, "ClassSweepResult")
      .def_readonly("report", &ClassSweepResult::report)
      .def_readonly("models", &ClassSweepResult::models);

  py::class_<CorrelationMatrix>(m, "CorrelationMatrix")
      .def_readonly("rho", &CorrelationMatrix::rho)
      .def_readonly("standardized_supports",
                    &CorrelationMatrix::standardized_supports);

  py::class_<LoadedModel>(m, "LoadedModel")
      .def_readonly("model", &LoadedModel::model)
      .def_readonly("n_observations", &LoadedModel::n_observations);

  m.def("item_response_prob", &item_response_prob, py::arg("theta_d"),
        py::arg("beta_i"));
  m.def("class_conditional_pattern_prob", &class_conditional_pattern_prob,
        py::arg("pattern"), py::arg("zeta_c"), py::arg("beta"), py::arg("dmap"));
  m.def("manifest_prob", &manifest_prob, py::arg("pattern"), py::arg("latent"),
        py::arg("beta"), py::arg("dmap"));
  m.def("simulate_responses", &simulate_responses, py::arg("latent"),
        py::arg("beta"), py::arg("dmap"), py::arg("n"), py::arg("seed"));
  m.def("observed_loglik", &observed_loglik, py::arg("data"), py::arg("latent"),
        py::arg("beta"), py::arg("dmap"));
  m.def("e_step", &e_step, py::arg("data"), py::arg("latent"), py::arg("beta"),
        py::arg("dmap"));
  m.def("fit_mml", &fit_mml, py::arg("data"), py::arg("spec"),
        py::arg("config") = FitConfig{},
        py::call_guard<py::gil_scoped_release>());
  m.def("posterior_class_probs", &posterior_class_probs, py::arg("model"),
        py::arg("pattern"));
  m.def("map_assign", &map_assign, py::arg("model"), py::arg("data"));
  m.def("marginal_loglik_quadrature", &marginal_loglik_quadrature,
        py::arg("data"), py::arg("beta"), py::arg("sigma"),
        py::arg("node_count"));
  m.def("fit_normal_unidim", &fit_normal_unidim, py::arg("data"),
        py::arg("config") = FitConfig{}, py::arg("node_count") = 21,
        py::call_guard<py::gil_scoped_release>());
  m.def("esf", &esf, py::arg("epsilons"));
  m.def("conditional_loglik", &conditional_loglik, py::arg("subset_data"),
        py::arg("beta"));
  m.def("fit_cml", &fit_cml, py::arg("data"), py::arg("items"));
  m.def("chi2_sf", &chi2_sf, py::arg("x"), py::arg("df"));
  m.def("score_tables", &score_tables, py::arg("data"), py::arg("d1_items"),
        py::arg("d2_items"));
  m.def("lr_mml_test", &lr_mml_test, py::arg("data"), py::arg("spec"),
        py::arg("d1"), py::arg("d2"), py::arg("config") = FitConfig{},
        py::call_guard<py::gil_scoped_release>());
  m.def("martin_lof_test",
        py::overload_cast<const PatternCounts&, const DimensionMap&, int, int>(
            &martin_lof_test),
        py::arg("data"), py::arg("dmap"), py::arg("d1"), py::arg("d2"));
  m.def("martin_lof_test",
        py::overload_cast<const PatternCounts&, const std::vector<int>&,
                          const std::vector<int>&>(&martin_lof_test),
        py::arg("data"), py::arg("d1_items"), py::arg("d2_items"));
  m.def("bic", &bic, py::arg("loglik"), py::arg("g"), py::arg("n"));
  m.def("param_count", &param_count, py::arg("class_count"),
        py::arg("dimension_count"), py::arg("item_count"));
  m.def("select_class_count", &select_class_count, py::arg("data"),
        py::arg("dmap"), py::arg("class_counts"),
        py::arg("config") = FitConfig{},
        py::call_guard<py::gil_scoped_release>());
  m.def("correlation_matrix", &correlation_matrix, py::arg("model"));
  m.def("load_dimension_map",
        py::overload_cast<const std::string&>(&load_dimension_map),
        py::arg("path"));
  m.def("load_model_file", &load_model_file, py::arg("path"));

  m.attr("Z_MAX") = kZMax;
  m.attr("MISSING") = static_cast<int>(kMissingResponse);
  m.attr("__version__") = "0.1.0";
}
