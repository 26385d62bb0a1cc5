#include "lcrasch/serialize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace lcrasch {

using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json manifest_block(const RunManifest& manifest) {
  ordered_json j;
  j["command"] = manifest.command;
  j["inputs"] = manifest.inputs;
  j["config"] = manifest.config;
  j["artifact_version"] = manifest.artifact_version;
  j["timestamp"] = manifest.timestamp;
  return j;
}

}  // namespace

std::string current_timestamp() {
  std::time_t t = 0;
  if (const char* sde = std::getenv("SOURCE_DATE_EPOCH")) {
    t = static_cast<std::time_t>(std::strtoll(sde, nullptr, 10));
  } else {
    t = std::time(nullptr);
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string pattern_to_string(const Pattern& x) {
  std::string s;
  s.reserve(x.size());
  for (auto v : x) s.push_back(v == kMissingResponse ? '.' : ('0' + v));
  return s;
}

Pattern pattern_from_string(const std::string& s) {
  Pattern x;
  x.reserve(s.size());
  for (char ch : s) {
    if (ch == '.')
      x.push_back(kMissingResponse);
    else if (ch == '0' || ch == '1')
      x.push_back(ch - '0');
    else
      throw ValidationError("pattern string must contain only 0, 1 or '.'");
  }
  return x;
}

std::string manifest_to_json(const RunManifest& manifest) {
  return manifest_block(manifest).dump(2) + "\n";
}

std::string model_to_json(const FittedModel& model, const RunManifest& manifest,
                          long long n_observations, const PatternCounts* data) {
  const int C = model.latent.class_count();
  const int D = model.dmap.dimension_count;
  const int k = model.dmap.item_count;

  ordered_json j;
  j["format"] = "lcrasch/model";
  j["version"] = 1;
  j["manifest"] = manifest_block(manifest);

  ordered_json m;
  m["class_count"] = C;
  m["dimension_count"] = D;
  m["item_count"] = k;
  ordered_json dims = ordered_json::array();
  const auto by_dim = model.dmap.items_by_dimension();
  for (int d = 0; d < D; ++d) {
    ordered_json dim;
    dim["name"] = model.dmap.dim_names[d];
    ordered_json items = ordered_json::array();
    for (int i : by_dim[d]) items.push_back(model.dmap.item_labels[i]);
    dim["items"] = items;
    dims.push_back(dim);
  }
  m["dimensions"] = dims;
  m["item_labels"] = model.dmap.item_labels;
  m["weights"] = model.latent.weights;
  m["supports"] = model.latent.supports;
  m["difficulties"] = model.beta.difficulties;
  ordered_json refs = ordered_json::array();
  for (int r : model.beta.reference_items)
    refs.push_back(model.dmap.item_labels[r]);
  m["reference_items"] = refs;
  m["loglik"] = model.loglik;
  m["n_parameters"] = model.n_parameters;
  m["n_observations"] = n_observations;
  if (n_observations > 0)
    m["bic"] = -2.0 * model.loglik +
               model.n_parameters * std::log(static_cast<double>(n_observations));
  m["converged"] = model.converged;
  m["n_iterations"] = model.n_iterations;
  m["start_id"] = model.start_id;
  m["warnings"] = model.warnings;
  j["model"] = m;

  // conditional probability of response 1 per class and item
  ordered_json cw = ordered_json::array();
  for (int c = 0; c < C; ++c) {
    ordered_json row = ordered_json::array();
    for (int i = 0; i < k; ++i)
      row.push_back(item_response_prob(
          model.latent.supports[c][model.dmap.assignment[i]],
          model.beta.difficulties[i]));
    cw.push_back(row);
  }
  j["class_item_probs"] = cw;

  if (data != nullptr) {
    ordered_json post;
    ordered_json pats = ordered_json::array();
    ordered_json counts = ordered_json::array();
    ordered_json probs = ordered_json::array();
    ordered_json map_cls = ordered_json::array();
    for (std::size_t p = 0; p < data->size(); ++p) {
      pats.push_back(pattern_to_string(data->patterns[p]));
      counts.push_back(data->counts[p]);
      const auto pp = posterior_class_probs(model, data->patterns[p]);
      probs.push_back(pp);
      int arg = 0;
      for (std::size_t c = 1; c < pp.size(); ++c)
        if (pp[c] > pp[arg]) arg = static_cast<int>(c);
      map_cls.push_back(arg + 1);  // classes are reported 1-based
    }
    post["patterns"] = pats;
    post["counts"] = counts;
    post["probs"] = probs;
    post["map_class"] = map_cls;
    j["posteriors"] = post;
  }
  return j.dump(2) + "\n";
}

LoadedModel model_from_json_text(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  if (!j.contains("model"))
    throw ValidationError("model file: missing 'model' block");
  if (j.value("format", std::string{}) != "lcrasch/model")
    throw ValidationError("model file: unexpected format tag");
  const auto& m = j.at("model");

  const int D = m.at("dimension_count").get<int>();
  std::vector<std::string> item_labels =
      m.at("item_labels").get<std::vector<std::string>>();
  const int k = static_cast<int>(item_labels.size());

  std::vector<int> assignment(k, -1);
  std::vector<std::string> dim_names;
  const auto& dims = m.at("dimensions");
  for (int d = 0; d < D; ++d) {
    dim_names.push_back(dims.at(d).at("name").get<std::string>());
    for (const auto& label : dims.at(d).at("items")) {
      const auto it = std::find(item_labels.begin(), item_labels.end(),
                                label.get<std::string>());
      if (it == item_labels.end())
        throw ValidationError("model file: dimension item not in item_labels");
      assignment[it - item_labels.begin()] = d;
    }
  }
  LoadedModel out;
  out.model.dmap = DimensionMap::from_assignment(std::move(assignment), D,
                                                 item_labels, dim_names);

  out.model.latent.weights = m.at("weights").get<std::vector<double>>();
  out.model.latent.supports =
      m.at("supports").get<std::vector<std::vector<double>>>();
  validate(out.model.latent);

  std::vector<double> difficulties =
      m.at("difficulties").get<std::vector<double>>();
  std::vector<int> refs;
  for (const auto& label : m.at("reference_items")) {
    const auto it = std::find(item_labels.begin(), item_labels.end(),
                              label.get<std::string>());
    if (it == item_labels.end())
      throw ValidationError("model file: unknown reference item");
    refs.push_back(static_cast<int>(it - item_labels.begin()));
  }
  out.model.beta = ItemParameters{std::move(difficulties), std::move(refs)};
  validate(out.model.beta, out.model.dmap);

  out.model.loglik = m.value("loglik", 0.0);
  out.model.n_parameters =
      m.value("n_parameters", param_count(out.model.latent.class_count(), D, k));
  out.model.converged = m.value("converged", true);
  out.model.n_iterations = m.value("n_iterations", 0);
  out.model.start_id = m.value("start_id", -1);
  out.n_observations = m.value("n_observations", 0LL);
  return out;
}

LoadedModel load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open model file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_json_text(buf.str());
}

}  // namespace lcrasch
