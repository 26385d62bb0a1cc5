#pragma once

#include <map>
#include <string>

#include "lcrasch/dimtest.hpp"
#include "lcrasch/mml.hpp"
#include "lcrasch/selection.hpp"

namespace lcrasch {

/// Provenance block embedded in every output file.
struct RunManifest {
  std::string command;
  std::map<std::string, std::string> inputs;   // role -> path
  std::map<std::string, std::string> config;   // echoed settings
  std::string artifact_version;
  std::string timestamp;  // honors SOURCE_DATE_EPOCH for reproducible runs
};

/// ISO-8601 UTC; SOURCE_DATE_EPOCH overrides the wall clock when set.
std::string current_timestamp();

/// JSON text of the model file (format "lcrasch/model", version 1):
/// weights, supports, difficulties, per-class item response probabilities,
/// loglik/BIC, and per-pattern posteriors with MAP classes.
std::string model_to_json(const FittedModel& model, const RunManifest& manifest,
                          long long n_observations,
                          const PatternCounts* data = nullptr);

struct LoadedModel {
  FittedModel model;
  long long n_observations = 0;
};
LoadedModel model_from_json_text(const std::string& text);
LoadedModel load_model_file(const std::string& path);

std::string pattern_to_string(const Pattern& x);
Pattern pattern_from_string(const std::string& s);

std::string manifest_to_json(const RunManifest& manifest);

}  // namespace lcrasch
