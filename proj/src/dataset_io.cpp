#include "siglasso/dataset_io.hpp"

#include <fstream>
#include <stdexcept>

namespace siglasso {

namespace {

using nlohmann::json;

json matrix_to_json(const TimeSeries& ts) {
  json rows = json::array();
  for (std::size_t r = 0; r < ts.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < ts.channels; ++c) row.push_back(ts.value(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

TimeSeries series_from_json(const json& times, const json& values) {
  TimeSeries ts;
  ts.grid.times = times.get<std::vector<double>>();
  if (!values.is_array() || values.size() != ts.grid.times.size())
    throw std::invalid_argument("dataset: times/values length mismatch");
  ts.channels = values.empty() ? 0 : static_cast<int>(values.front().size());
  for (const auto& row : values) {
    if (static_cast<int>(row.size()) != ts.channels)
      throw std::invalid_argument("dataset: ragged value rows");
    for (const auto& v : row) ts.values.push_back(v.get<double>());
  }
  return ts;
}

}  // namespace

json record_to_json(const IndividualRecord& rec) {
  json j;
  j["id"] = rec.id;
  j["feature_times"] = rec.features.grid.times;
  j["feature_values"] = matrix_to_json(rec.features);
  j["target_times"] = rec.targets.grid.times;
  j["target_values"] = matrix_to_json(rec.targets);
  return j;
}

IndividualRecord record_from_json(const json& j) {
  IndividualRecord rec;
  rec.id = j.at("id").get<std::string>();
  rec.features = series_from_json(j.at("feature_times"),
                                  j.at("feature_values"));
  rec.targets = series_from_json(j.at("target_times"),
                                 j.at("target_values"));
  return rec;
}

Dataset load_dataset_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset: " + path);
  Dataset ds;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      ds.individuals.push_back(record_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " +
                               e.what());
    }
  }
  if (ds.individuals.empty())
    throw std::runtime_error("empty dataset: " + path);
  return ds;
}

void save_dataset_jsonl(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset: " + path);
  for (const auto& rec : ds.individuals) out << record_to_json(rec) << '\n';
}

json model_to_json(const SigLassoModel& model) {
  json j;
  j["d"] = model.path_channels;
  j["N"] = model.depth;
  j["p"] = model.responses;
  j["weights"] = model.weights.lambda;
  j["time_augmented"] = model.time_augmented;
  j["tv_normalized"] = model.tv_normalized;
  j["penalty"] = model.penalty;
  json intercept = json::array();
  for (Eigen::Index c = 0; c < model.intercept.size(); ++c)
    intercept.push_back(model.intercept[c]);
  j["intercept"] = intercept;
  json coefficients = json::object();
  DesignMatrix shape;
  shape.channels = model.path_channels;
  shape.depth = model.depth;
  for (int k = 1; k <= model.depth; ++k) {
    const auto start = shape.layer_start(k);
    const auto size = shape.layer_size(k);
    for (std::int64_t idx = 0; idx < size; ++idx) {
      const auto row = model.theta.row(start + idx);
      if (row.isZero(0.0)) continue;
      json values = json::array();
      for (Eigen::Index c = 0; c < row.size(); ++c) values.push_back(row[c]);
      coefficients[Word::from_index(model.path_channels, k, idx).to_string()] =
          std::move(values);
    }
  }
  j["coefficients"] = coefficients;
  json diag;
  diag["cv_error"] = model.cv_error;
  diag["design_rows"] = model.design_rows;
  diag["skipped_rows"] = model.skipped_rows;
  j["diagnostics"] = diag;
  return j;
}

SigLassoModel model_from_json(const json& j) {
  SigLassoModel model;
  model.path_channels = j.at("d").get<int>();
  model.depth = j.at("N").get<int>();
  model.responses = j.at("p").get<int>();
  model.weights.lambda = j.at("weights").get<std::vector<double>>();
  model.time_augmented = j.value("time_augmented", true);
  model.tv_normalized = j.value("tv_normalized", true);
  model.penalty = j.value("penalty", 0.0);
  const auto intercept = j.at("intercept").get<std::vector<double>>();
  model.intercept = Eigen::Map<const Eigen::VectorXd>(intercept.data(),
                                                      intercept.size());
  model.theta = Eigen::MatrixXd::Zero(
      sig_dim(model.path_channels, model.depth), model.responses);
  DesignMatrix shape;
  shape.channels = model.path_channels;
  shape.depth = model.depth;
  for (const auto& [key, values] : j.at("coefficients").items()) {
    const Word word = Word::parse(key);
    const auto row = shape.layer_start(word.length()) +
                     word.index(model.path_channels);
    const auto vec = values.get<std::vector<double>>();
    if (static_cast<int>(vec.size()) != model.responses)
      throw std::invalid_argument("model: coefficient width mismatch");
    for (int c = 0; c < model.responses; ++c) model.theta(row, c) = vec[c];
  }
  if (j.contains("diagnostics")) {
    const auto& diag = j.at("diagnostics");
    model.cv_error = diag.value("cv_error", 0.0);
    model.design_rows = diag.value("design_rows", std::int64_t{0});
    model.skipped_rows = diag.value("skipped_rows", 0);
  }
  return model;
}

SigLassoModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model: " + path);
  return model_from_json(json::parse(in));
}

void save_model(const SigLassoModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model: " + path);
  out << model_to_json(model).dump(2) << '\n';
}

json signature_to_json(const TruncatedSignature& sig) {
  json layers = json::array();
  for (int k = 0; k <= sig.depth(); ++k) {
    auto layer = sig.layer(k);
    layers.push_back(std::vector<double>(layer.begin(), layer.end()));
  }
  return json{{"d", sig.channels()}, {"N", sig.depth()}, {"layers", layers}};
}

json signature_to_word_map(const TruncatedSignature& sig) {
  json out = json::object();
  for (int k = 0; k <= sig.depth(); ++k) {
    auto layer = sig.layer(k);
    for (std::size_t idx = 0; idx < layer.size(); ++idx)
      out[Word::from_index(sig.channels(), k, idx).to_string()] = layer[idx];
  }
  return out;
}

json config_to_json(const SimulationConfig& config) {
  json j;
  j["setting"] = to_string(config.setting);
  j["n"] = config.n;
  j["dense_resolution"] = config.dense_resolution;
  j["feature_samples"] = {config.feature_samples_min,
                          config.feature_samples_max};
  j["target_samples"] = {config.target_samples_min,
                         config.target_samples_max};
  j["noise_x"] = config.noise_x;
  j["noise_y"] = config.noise_y;
  j["seed"] = config.seed;
  j["downsample"] = config.downsample;
  j["driver_dims"] = config.driver_dims;
  j["target_dims"] = config.target_dims;
  j["spline_knots"] = config.spline_knots;
  j["cde_substeps"] = config.cde_substeps;
  j["cde_y0"] = config.cde_y0;
  if (config.setting == Setting::ill_specified)
    j["ill_lags"] = config.ill_lags;
  if (config.setting == Setting::ou)
    j["ou"] = {{"theta", config.ou.theta},
               {"mu", config.ou.mu},
               {"sigma2", config.ou.sigma2},
               {"y0", config.ou.y0}};
  if (config.setting == Setting::tumor)
    j["tumor"] = {{"k1", config.tumor.k1},
                  {"k2", config.tumor.k2},
                  {"lambda0", config.tumor.lambda0},
                  {"lambda1", config.tumor.lambda1},
                  {"psi", config.tumor.psi},
                  {"u0", config.tumor.u0}};
  return j;
}

SimulationConfig config_from_json(const json& j) {
  SimulationConfig config;
  config.setting = setting_from_string(j.at("setting").get<std::string>());
  config.n = j.value("n", config.n);
  config.dense_resolution =
      j.value("dense_resolution", config.dense_resolution);
  if (j.contains("feature_samples")) {
    config.feature_samples_min = j["feature_samples"][0].get<int>();
    config.feature_samples_max = j["feature_samples"][1].get<int>();
  }
  if (j.contains("target_samples")) {
    config.target_samples_min = j["target_samples"][0].get<int>();
    config.target_samples_max = j["target_samples"][1].get<int>();
  }
  config.noise_x = j.value("noise_x", config.noise_x);
  config.noise_y = j.value("noise_y", config.noise_y);
  config.seed = j.value("seed", config.seed);
  config.downsample = j.value("downsample", config.downsample);
  config.driver_dims = j.value("driver_dims", config.driver_dims);
  config.target_dims = j.value("target_dims", config.target_dims);
  config.spline_knots = j.value("spline_knots", config.spline_knots);
  config.cde_substeps = j.value("cde_substeps", config.cde_substeps);
  config.cde_y0 = j.value("cde_y0", config.cde_y0);
  config.ill_lags = j.value("ill_lags", config.ill_lags);
  if (j.contains("ou")) {
    config.ou.theta = j["ou"].value("theta", config.ou.theta);
    config.ou.mu = j["ou"].value("mu", config.ou.mu);
    config.ou.sigma2 = j["ou"].value("sigma2", config.ou.sigma2);
    config.ou.y0 = j["ou"].value("y0", config.ou.y0);
  }
  if (j.contains("tumor")) {
    config.tumor.k1 = j["tumor"].value("k1", config.tumor.k1);
    config.tumor.k2 = j["tumor"].value("k2", config.tumor.k2);
    config.tumor.lambda0 = j["tumor"].value("lambda0", config.tumor.lambda0);
    config.tumor.lambda1 = j["tumor"].value("lambda1", config.tumor.lambda1);
    config.tumor.psi = j["tumor"].value("psi", config.tumor.psi);
    if (j["tumor"].contains("u0"))
      config.tumor.u0 = j["tumor"]["u0"].get<std::array<double, 4>>();
  }
  return config;
}

json truth_to_json(const SimulationOutput& out,
                   const SimulationConfig& config) {
  json j;
  j["config"] = config_to_json(config);
  j["dense_times"] = out.dense_times;
  json individuals = json::array();
  for (const auto& sample : out.samples) {
    json ind;
    ind["id"] = sample.record.id;
    ind["feature_times"] = sample.dense_features.grid.times;
    ind["feature_values"] = matrix_to_json(sample.dense_features);
    ind["target_times"] = sample.dense_targets.grid.times;
    ind["target_values"] = matrix_to_json(sample.dense_targets);
    individuals.push_back(std::move(ind));
  }
  j["individuals"] = individuals;
  return j;
}

}  // namespace siglasso
