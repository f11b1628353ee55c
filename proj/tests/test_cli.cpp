#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "siglasso/cli.hpp"
#include "siglasso/dataset_io.hpp"
#include "siglasso/signature.hpp"

using namespace siglasso;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("siglasso_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_series_csv(const std::string& path, const TimeSeries& ts,
                      const std::string& prefix) {
  std::ofstream out(path);
  out << "t";
  for (int c = 1; c <= ts.channels; ++c) out << ',' << prefix << c;
  out << '\n';
  for (std::size_t r = 0; r < ts.rows(); ++r) {
    out << ts.grid.times[r];
    for (int c = 0; c < ts.channels; ++c) out << ',' << ts.value(r, c);
    out << '\n';
  }
}

}  // namespace

TEST_CASE("dataset JSONL round trip") {
  TempDir tmp;
  SimulationConfig config;
  config.setting = Setting::ou;
  config.n = 5;
  config.seed = 31;
  config.dense_resolution = 201;
  const auto out = generate(config);
  Dataset ds;
  for (const auto& s : out.samples) ds.individuals.push_back(s.record);
  const auto path = tmp.file("ds.jsonl");
  save_dataset_jsonl(ds, path);
  const auto loaded = load_dataset_jsonl(path);
  REQUIRE(loaded.individuals.size() == ds.individuals.size());
  for (std::size_t i = 0; i < ds.individuals.size(); ++i) {
    CHECK(loaded.individuals[i].id == ds.individuals[i].id);
    CHECK(loaded.individuals[i].features.values ==
          ds.individuals[i].features.values);
    CHECK(loaded.individuals[i].targets.grid.times ==
          ds.individuals[i].targets.grid.times);
  }
}

TEST_CASE("model JSON round trip omits zero rows") {
  SigLassoModel model;
  model.depth = 2;
  model.path_channels = 2;
  model.responses = 2;
  model.weights = layer_weights(2);
  model.theta = Eigen::MatrixXd::Zero(sig_dim(2, 2), 2);
  model.theta(1, 0) = 0.5;
  model.theta(4, 1) = -2.0;
  model.intercept = Eigen::VectorXd::Zero(2);
  model.intercept << 0.1, -0.2;
  model.penalty = 0.05;

  const auto j = model_to_json(model);
  CHECK(j.at("coefficients").size() == 2);  // only nonzero rows
  CHECK(j.at("d") == 2);
  const auto back = model_from_json(j);
  CHECK((back.theta - model.theta).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.intercept == model.intercept);
  CHECK(back.weights.lambda == model.weights.lambda);
}

TEST_CASE("signature JSON dumps") {
  const auto sig = segment_signature(std::vector<double>{1.0, 2.0}, 2);
  const auto j = signature_to_json(sig);
  CHECK(j.at("d") == 2);
  CHECK(j.at("N") == 2);
  CHECK(j.at("layers").size() == 3);
  const auto words = signature_to_word_map(sig);
  CHECK(words.at("") == 1.0);
  CHECK(words.at("1,2") == doctest::Approx(1.0));
}

TEST_CASE("simulate command is byte-reproducible and counts measurements") {
  TempDir tmp;
  cli::SimulateArgs args;
  args.config.setting = Setting::ou;
  args.config.n = 50;
  args.config.target_samples_min = 5;
  args.config.target_samples_max = 5;
  args.config.dense_resolution = 501;
  args.config.seed = 7;
  args.out = tmp.file("a.jsonl");
  args.truth_out = tmp.file("a.truth.json");
  CHECK(cli::cmd_simulate(args) == 0);

  const auto ds = load_dataset_jsonl(args.out);
  CHECK(ds.individuals.size() == 50);
  CHECK(ds.total_measurements() == 250);  // n = 50, 5 targets each

  cli::SimulateArgs again = args;
  again.out = tmp.file("b.jsonl");
  again.truth_out = tmp.file("b.truth.json");
  CHECK(cli::cmd_simulate(again) == 0);
  CHECK(slurp(args.out) == slurp(again.out));
  CHECK(slurp(args.truth_out) == slurp(again.truth_out));

  // Manifest exists and carries the resolved config.
  const auto manifest = nlohmann::json::parse(
      std::ifstream(args.out + ".manifest.json"));
  CHECK(manifest.at("command") == "simulate");
  CHECK(manifest.at("config").at("setting") == "ou");
  CHECK(manifest.at("outputs").size() == 2);
}

TEST_CASE("tumor default parameters are recorded in the manifest") {
  TempDir tmp;
  cli::SimulateArgs args;
  args.config.setting = Setting::tumor;
  args.config.n = 2;
  args.config.dense_resolution = 301;
  args.config.seed = 3;
  args.out = tmp.file("tumor.jsonl");
  CHECK(cli::cmd_simulate(args) == 0);
  const auto manifest = nlohmann::json::parse(
      std::ifstream(args.out + ".manifest.json"));
  const auto& tumor = manifest.at("config").at("tumor");
  CHECK(tumor.at("k1") == 10.0);
  CHECK(tumor.at("k2") == 0.5);
  CHECK(tumor.at("lambda0") == 0.9);
  CHECK(tumor.at("lambda1") == 0.7);
  CHECK(tumor.at("psi") == 20.0);
}

TEST_CASE("fit / reconstruct / evaluate round trip") {
  TempDir tmp;
  cli::SimulateArgs sim;
  sim.config.setting = Setting::ou;
  sim.config.n = 20;
  sim.config.dense_resolution = 201;
  sim.config.feature_samples_min = 10;
  sim.config.feature_samples_max = 15;
  sim.config.target_samples_min = 3;
  sim.config.target_samples_max = 3;
  sim.config.seed = 11;
  sim.out = tmp.file("train.jsonl");
  REQUIRE(cli::cmd_simulate(sim) == 0);

  cli::FitArgs fit_args;
  fit_args.data = sim.out;
  fit_args.out = tmp.file("model.json");
  fit_args.options.depth_grid = {1, 2};
  fit_args.options.n_lambdas = 20;
  fit_args.options.seed = 5;
  REQUIRE(cli::cmd_fit(fit_args) == 0);
  CHECK(fs::exists(fit_args.out + ".cv.csv"));

  // Identical invocation produces an identical model file.
  cli::FitArgs fit2 = fit_args;
  fit2.out = tmp.file("model2.json");
  REQUIRE(cli::cmd_fit(fit2) == 0);
  CHECK(slurp(fit_args.out) == slurp(fit2.out));

  // Test set: dense, noise-free, with truth sidecar.
  cli::SimulateArgs test_sim = sim;
  test_sim.config.n = 5;
  test_sim.config.seed = 12;
  test_sim.config.downsample = false;
  test_sim.out = tmp.file("test.jsonl");
  test_sim.truth_out = tmp.file("test.truth.json");
  REQUIRE(cli::cmd_simulate(test_sim) == 0);

  cli::ReconstructArgs rec;
  rec.model = fit_args.out;
  rec.data = test_sim.out;
  rec.t_grid = "dense:101";
  rec.out = tmp.file("pred.csv");
  REQUIRE(cli::cmd_reconstruct(rec) == 0);

  cli::ReconstructArgs rec2 = rec;
  rec2.out = tmp.file("pred2.csv");
  REQUIRE(cli::cmd_reconstruct(rec2) == 0);
  CHECK(slurp(rec.out) == slurp(rec2.out));

  cli::EvaluateArgs ev;
  ev.pred = rec.out;
  ev.truth = test_sim.truth_out;
  ev.out = tmp.file("report.json");
  REQUIRE(cli::cmd_evaluate(ev) == 0);
  const auto report = nlohmann::json::parse(std::ifstream(ev.out));
  CHECK(report.at("individuals") == 5);
  CHECK(report.at("l2_error").get<double>() >= 0.0);
  CHECK(fs::exists(ev.out + ".csv"));

  // Perfect predictions score zero on both metrics.
  const auto truth = nlohmann::json::parse(std::ifstream(test_sim.truth_out));
  std::ofstream perfect(tmp.file("perfect.csv"));
  perfect << "id,t,pred_1\n";
  for (const auto& ind : truth.at("individuals")) {
    const auto times = ind.at("target_times").get<std::vector<double>>();
    const auto& values = ind.at("target_values");
    for (std::size_t j = 0; j < times.size(); ++j)
      perfect << ind.at("id").get<std::string>() << ',' << times[j] << ','
              << values[j][0].get<double>() << '\n';
  }
  perfect.close();
  cli::EvaluateArgs exact;
  exact.pred = tmp.file("perfect.csv");
  exact.truth = test_sim.truth_out;
  exact.out = tmp.file("perfect_report.json");
  REQUIRE(cli::cmd_evaluate(exact) == 0);
  const auto perfect_report =
      nlohmann::json::parse(std::ifstream(exact.out));
  CHECK(perfect_report.at("l2_error").get<double>() == doctest::Approx(0.0));
  CHECK(perfect_report.at("mse_last_point").get<double>() ==
        doctest::Approx(0.0));

  // A prediction id absent from the truth is an explicit error.
  std::ofstream bad(tmp.file("bad.csv"));
  bad << "id,t,pred_1\nghost,0.5,1.0\n";
  bad.close();
  cli::EvaluateArgs broken;
  broken.pred = tmp.file("bad.csv");
  broken.truth = test_sim.truth_out;
  broken.out = tmp.file("bad_report.json");
  CHECK_THROWS_WITH_AS(cli::cmd_evaluate(broken),
                       doctest::Contains("ghost"), std::runtime_error);
  CHECK_FALSE(fs::exists(broken.out));  // partial outputs removed
}

TEST_CASE("reconstruct rejects mismatched dimensions") {
  TempDir tmp;
  cli::SimulateArgs sim;
  sim.config.setting = Setting::well_specified;  // 2 feature channels
  sim.config.n = 3;
  sim.config.dense_resolution = 201;
  sim.config.seed = 2;
  sim.out = tmp.file("ws.jsonl");
  REQUIRE(cli::cmd_simulate(sim) == 0);

  SigLassoModel model;  // expects 1 original channel
  model.depth = 1;
  model.path_channels = 2;
  model.responses = 1;
  model.weights = layer_weights(1);
  model.theta = Eigen::MatrixXd::Zero(3, 1);
  model.intercept = Eigen::VectorXd::Zero(1);
  save_model(model, tmp.file("model.json"));

  cli::ReconstructArgs rec;
  rec.model = tmp.file("model.json");
  rec.data = sim.out;
  rec.out = tmp.file("pred.csv");
  CHECK_THROWS_AS(cli::cmd_reconstruct(rec), std::invalid_argument);
  CHECK_FALSE(fs::exists(rec.out));
}

TEST_CASE("sigcheck command writes the convergence table") {
  TempDir tmp;
  cli::SigcheckArgs args;
  args.params.sample_counts = {10, 50};
  args.params.noise_variances = {0.0, 0.25};
  args.params.reps = 5;
  args.params.depth = 3;
  args.params.dense_resolution = 301;
  args.params.seed = 9;
  args.out = tmp.file("sigcheck.csv");
  CHECK(cli::cmd_sigcheck(args) == 0);
  const auto text = slurp(args.out);
  CHECK(text.find("noise_variance") != std::string::npos);
  // 2 noises x 2 sample counts x 3 layers = 12 data rows.
  CHECK(std::count(text.begin(), text.end(), '\n') == 13);
}

TEST_CASE("forecast command on a lagged moving-average target") {
  TempDir tmp;
  // Features: two stationary AR(1) channels; target: lagged moving average
  // of both, so train and test windows share one distribution.
  const int length = 80;
  TimeSeries features, target;
  features.channels = 2;
  target.channels = 1;
  std::mt19937_64 rng(13);
  std::normal_distribution<double> gauss(0.0, 0.05);
  std::normal_distribution<double> step(0.0, 0.3);
  double x1 = 0.0, x2 = 0.0;
  for (int j = 0; j < length; ++j) {
    features.grid.times.push_back(double(j));
    x1 = 0.9 * x1 + step(rng);
    x2 = 0.9 * x2 + step(rng);
    features.values.push_back(x1);
    features.values.push_back(x2);
    target.grid.times.push_back(double(j));
  }
  const int window = 8, horizon = 2;
  for (int j = 0; j < length; ++j) {
    double acc = 0.0;
    int count = 0;
    for (int h = horizon; h <= horizon + window && j - h >= 0; ++h) {
      acc += features.value(j - h, 0) + 0.5 * features.value(j - h, 1);
      ++count;
    }
    target.values.push_back(count ? acc / count + gauss(rng) : 0.0);
  }
  write_series_csv(tmp.file("features.csv"), features, "x");
  write_series_csv(tmp.file("target.csv"), target, "y");

  cli::ForecastArgs args;
  args.features = tmp.file("features.csv");
  args.target = tmp.file("target.csv");
  args.window = window;
  args.horizon_min = horizon;
  args.horizon_max = horizon + 1;
  args.train_end = 60;
  args.out_prefix = tmp.file("fc");
  args.options.depth_grid = {1, 2};
  args.options.n_lambdas = 25;
  args.options.seed = 3;
  CHECK(cli::cmd_forecast(args) == 0);
  CHECK(fs::exists(tmp.file("fc_predictions.csv")));
  CHECK(fs::exists(tmp.file("fc_h2.model.json")));

  cli::EvaluateArgs ev;
  ev.pred = tmp.file("fc_predictions.csv");
  ev.out = tmp.file("fc_report.json");
  ev.forecast_mode = true;
  CHECK(cli::cmd_evaluate(ev) == 0);
  const auto report = nlohmann::json::parse(std::ifstream(ev.out));
  REQUIRE(report.at("horizons").size() == 2);

  // The fitted model must beat the trivial constant predictor on the
  // held-out tail.
  double truth_mean = 0.0;
  std::vector<double> test_truth, test_pred;
  {
    std::ifstream in(tmp.file("fc_predictions.csv"));
    std::string line;
    std::getline(in, line);  // header
    std::vector<std::pair<double, double>> rows;
    while (std::getline(in, line)) {
      std::stringstream ss(line);
      std::string h, idx, t, split, truth_s, pred_s;
      std::getline(ss, h, ',');
      std::getline(ss, idx, ',');
      std::getline(ss, t, ',');
      std::getline(ss, split, ',');
      std::getline(ss, truth_s, ',');
      std::getline(ss, pred_s, ',');
      if (h != "2") continue;
      if (split == "train") {
        truth_mean += std::stod(truth_s);
      } else {
        test_truth.push_back(std::stod(truth_s));
        test_pred.push_back(std::stod(pred_s));
      }
    }
  }
  REQUIRE(!test_truth.empty());
  const double n_train =
      double(args.train_end - window - horizon + 1);
  truth_mean /= n_train;
  double model_rmse = 0.0, baseline_rmse = 0.0;
  for (std::size_t i = 0; i < test_truth.size(); ++i) {
    model_rmse += std::pow(test_pred[i] - test_truth[i], 2);
    baseline_rmse += std::pow(truth_mean - test_truth[i], 2);
  }
  CHECK(model_rmse < baseline_rmse);

  // Window larger than the training span is an explicit error.
  cli::ForecastArgs bad = args;
  bad.window = 70;
  CHECK_THROWS(cli::cmd_forecast(bad));
}
