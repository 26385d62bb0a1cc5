#include <doctest.h>

#include <fstream>

#include "lcrasch/serialize.hpp"

using namespace lcrasch;

TEST_CASE("pattern strings") {
  const Pattern x{1, 0, kMissingResponse, 1};
  CHECK(pattern_to_string(x) == "10.1");
  CHECK(pattern_from_string("10.1") == x);
  CHECK_THROWS_AS(pattern_from_string("102"), ValidationError);
}

TEST_CASE("model files round-trip") {
  auto dmap = DimensionMap::from_assignment({0, 0, 1}, 2, {"a", "b", "c"},
                                            {"first", "second"});
  FittedModel model;
  model.dmap = dmap;
  model.beta = ItemParameters::anchored({0.0, 0.731, 0.0}, dmap);
  model.latent.weights = {0.25, 0.75};
  model.latent.supports = {{-1.25, 0.5}, {0.75, -0.125}};
  model.loglik = -123.456789012345;
  model.n_parameters = 6;
  model.converged = true;
  model.n_iterations = 42;
  model.start_id = 3;

  RunManifest manifest;
  manifest.command = "fit";
  manifest.inputs["data"] = "x.csv";
  manifest.config["seed"] = "7";
  manifest.artifact_version = "0.1.0";
  manifest.timestamp = "2000-01-01T00:00:00Z";

  auto data = PatternCounts::from_rows({{1, 0, 1}, {0, 0, 0}});
  const std::string text = model_to_json(model, manifest, data.total, &data);

  auto loaded = model_from_json_text(text);
  CHECK(loaded.model.latent.weights == model.latent.weights);
  CHECK(loaded.model.latent.supports == model.latent.supports);
  CHECK(loaded.model.beta.difficulties == model.beta.difficulties);
  CHECK(loaded.model.beta.reference_items == model.beta.reference_items);
  CHECK(loaded.model.loglik == model.loglik);
  CHECK(loaded.model.dmap.assignment == dmap.assignment);
  CHECK(loaded.model.dmap.dim_names == dmap.dim_names);
  CHECK(loaded.n_observations == 2);

  SUBCASE("bundled example model file loads") {
    auto example = load_model_file(std::string(LCRASCH_DATA_DIR) +
                                   "/example_model.json");
    CHECK(example.model.latent.class_count() == 3);
    CHECK(example.model.dmap.dimension_count == 2);
    CHECK(example.model.dmap.item_labels[4] == "m1");
  }
  SUBCASE("malformed text is rejected") {
    CHECK_THROWS_AS(model_from_json_text("{\"format\": \"other\"}"),
                    ValidationError);
  }
}

TEST_CASE("timestamp honors SOURCE_DATE_EPOCH") {
  setenv("SOURCE_DATE_EPOCH", "0", 1);
  CHECK(current_timestamp() == "1970-01-01T00:00:00Z");
  unsetenv("SOURCE_DATE_EPOCH");
}
