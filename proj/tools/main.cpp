#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "siglasso/cli.hpp"

namespace {

// "a:b" or a single integer.
std::pair<int, int> parse_range(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    const int v = std::stoi(text);
    return {v, v};
  }
  return {std::stoi(text.substr(0, colon)), std::stoi(text.substr(colon + 1))};
}

std::vector<int> parse_int_list(const std::string& text) {
  const auto colon = text.find(':');
  if (colon != std::string::npos) {
    const int lo = std::stoi(text.substr(0, colon));
    const int hi = std::stoi(text.substr(colon + 1));
    std::vector<int> out;
    for (int v = lo; v <= hi; ++v) out.push_back(v);
    return out;
  }
  std::vector<int> out;
  std::string token;
  std::stringstream ss(text);
  while (std::getline(ss, token, ',')) out.push_back(std::stoi(token));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Signature-based learning of sparsely observed dynamics"};
  app.require_subcommand(1);

  using namespace siglasso;

  // simulate
  cli::SimulateArgs sim;
  std::string sim_setting = "well_specified";
  std::string sim_feature_samples = "20:50";
  std::string sim_target_samples = "5";
  bool no_downsample = false;
  auto* simulate = app.add_subcommand("simulate", "generate a dataset");
  simulate->add_option("--setting", sim_setting,
                       "well_specified | ill_specified | ou | tumor");
  simulate->add_option("--n", sim.config.n, "number of individuals");
  simulate->add_option("--feature-samples", sim_feature_samples,
                       "count or min:max");
  simulate->add_option("--target-samples", sim_target_samples,
                       "count or min:max");
  simulate->add_option("--noise-x", sim.config.noise_x,
                       "feature noise variance");
  simulate->add_option("--noise-y", sim.config.noise_y,
                       "target noise variance");
  simulate->add_option("--seed", sim.config.seed, "master seed");
  simulate->add_option("--resolution", sim.config.dense_resolution,
                       "dense grid points");
  simulate->add_option("--dims", sim.config.driver_dims,
                       "feature dimensions (well/ill-specified)");
  simulate->add_flag("--no-downsample", no_downsample,
                     "emit dense records (test data)");
  simulate->add_option("--out", sim.out, "dataset JSONL path")->required();
  simulate->add_option("--emit-truth", sim.truth_out,
                       "ground-truth sidecar path");
  simulate->add_option("--threads", sim.threads, "worker threads");

  // fit
  cli::FitArgs fit_args;
  std::string fit_depth_grid = "2:6";
  auto* fit_cmd = app.add_subcommand("fit", "fit a model on a dataset");
  fit_cmd->add_option("--data", fit_args.data, "dataset JSONL")->required();
  fit_cmd->add_option("--depth-grid", fit_depth_grid,
                      "depths to cross-validate (a:b or list)");
  fit_cmd->add_option("--folds", fit_args.options.cv_folds, "CV folds");
  fit_cmd->add_option("--seed", fit_args.options.seed, "CV seed");
  fit_cmd->add_option("--n-lambdas", fit_args.options.n_lambdas,
                      "penalty grid size");
  fit_cmd->add_option("--lambda-ratio", fit_args.options.lambda_ratio,
                      "smallest/largest penalty");
  fit_cmd->add_option("--out", fit_args.out, "model JSON path")->required();
  fit_cmd->add_option("--threads", fit_args.options.threads, "worker threads");

  // reconstruct
  cli::ReconstructArgs rec_args;
  auto* rec_cmd = app.add_subcommand("reconstruct",
                                     "predict target trajectories");
  rec_cmd->add_option("--model", rec_args.model, "model JSON")->required();
  rec_cmd->add_option("--data", rec_args.data, "dataset JSONL")->required();
  rec_cmd->add_option("--t-grid", rec_args.t_grid,
                      "train | dense:K | list:t1;t2;...");
  rec_cmd->add_option("--out", rec_args.out, "predictions CSV")->required();
  rec_cmd->add_option("--threads", rec_args.threads, "worker threads");

  // evaluate
  cli::EvaluateArgs eval_args;
  auto* eval_cmd = app.add_subcommand("evaluate", "score predictions");
  eval_cmd->add_option("--pred", eval_args.pred, "predictions CSV")
      ->required();
  eval_cmd->add_option("--truth", eval_args.truth, "ground-truth sidecar");
  eval_cmd->add_option("--out", eval_args.out, "report JSON")->required();
  eval_cmd->add_flag("--forecast", eval_args.forecast_mode,
                     "score a forecast CSV (RMSE per horizon)");

  // sigcheck
  cli::SigcheckArgs check_args;
  std::string check_samples = "10,20,50,100,200,500";
  std::vector<double> check_noise;
  auto* check_cmd = app.add_subcommand(
      "sigcheck", "signature discretization convergence curves");
  check_cmd->add_option("--noise", check_noise,
                        "noise variances (repeatable)");
  check_cmd->add_option("--depth", check_args.params.depth,
                        "max signature layer");
  check_cmd->add_option("--samples-list", check_samples,
                        "discretization sizes");
  check_cmd->add_option("--reps", check_args.params.reps,
                        "repetitions per point");
  check_cmd->add_option("--seed", check_args.params.seed, "seed");
  check_cmd->add_option("--dims", check_args.params.dims, "path dimensions");
  check_cmd->add_option("--out", check_args.out, "output CSV")->required();
  check_cmd->add_option("--threads", check_args.threads, "worker threads");

  // forecast
  cli::ForecastArgs fc_args;
  std::string fc_horizons = "1";
  std::string fc_depth_grid = "2,3";
  auto* fc_cmd = app.add_subcommand(
      "forecast", "lagged-window forecasting on a single series");
  fc_cmd->add_option("--features", fc_args.features, "features CSV")
      ->required();
  fc_cmd->add_option("--target", fc_args.target, "target CSV")->required();
  fc_cmd->add_option("--window", fc_args.window, "history window length");
  fc_cmd->add_option("--horizons", fc_horizons, "horizon or a:b range");
  fc_cmd->add_option("--train-end", fc_args.train_end,
                     "last index used for training")->required();
  fc_cmd->add_option("--depth-grid", fc_depth_grid, "depths");
  fc_cmd->add_option("--folds", fc_args.options.cv_folds, "CV folds");
  fc_cmd->add_option("--seed", fc_args.options.seed, "CV seed");
  fc_cmd->add_option("--out", fc_args.out_prefix, "output prefix")
      ->required();
  fc_cmd->add_option("--threads", fc_args.options.threads, "worker threads");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      sim.config.setting = setting_from_string(sim_setting);
      auto [fmin, fmax] = parse_range(sim_feature_samples);
      sim.config.feature_samples_min = fmin;
      sim.config.feature_samples_max = fmax;
      auto [tmin, tmax] = parse_range(sim_target_samples);
      sim.config.target_samples_min = tmin;
      sim.config.target_samples_max = tmax;
      sim.config.downsample = !no_downsample;
      return cli::cmd_simulate(sim);
    }
    if (fit_cmd->parsed()) {
      fit_args.options.depth_grid = parse_int_list(fit_depth_grid);
      fit_args.options.threads =
          cli::resolve_threads(fit_args.options.threads);
      return cli::cmd_fit(fit_args);
    }
    if (rec_cmd->parsed()) return cli::cmd_reconstruct(rec_args);
    if (eval_cmd->parsed()) return cli::cmd_evaluate(eval_args);
    if (check_cmd->parsed()) {
      if (!check_noise.empty()) check_args.params.noise_variances = check_noise;
      check_args.params.sample_counts = parse_int_list(check_samples);
      return cli::cmd_sigcheck(check_args);
    }
    if (fc_cmd->parsed()) {
      auto [hmin, hmax] = parse_range(fc_horizons);
      fc_args.horizon_min = hmin;
      fc_args.horizon_max = hmax;
      fc_args.options.depth_grid = parse_int_list(fc_depth_grid);
      fc_args.options.threads =
          cli::resolve_threads(fc_args.options.threads);
      return cli::cmd_forecast(fc_args);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
