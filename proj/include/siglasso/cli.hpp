#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "siglasso/pipeline.hpp"
#include "siglasso/sigcheck.hpp"
#include "siglasso/simulate.hpp"

namespace siglasso::cli {

// Thread count resolution: explicit flag > SIGLASSO_THREADS > 1.
int resolve_threads(int flag_value);

struct SimulateArgs {
  SimulationConfig config;
  std::string out;           // JSON-Lines dataset
  std::string truth_out;     // optional ground-truth sidecar
  int threads = 0;
};

struct FitArgs {
  std::string data;
  std::string out;  // model JSON; CV curves go to out + ".cv.csv"
  FitOptions options;
};

struct ReconstructArgs {
  std::string model;
  std::string data;
  std::string t_grid = "train";  // train | dense:K | list:t1,t2,...
  std::string out;               // predictions CSV
  int threads = 0;
};

struct EvaluateArgs {
  std::string pred;   // predictions CSV (trajectory) or forecast CSV
  std::string truth;  // ground-truth sidecar (trajectory mode)
  std::string out;    // report JSON; per-individual CSV at out + ".csv"
  bool forecast_mode = false;
};

struct SigcheckArgs {
  SigcheckParams params;
  std::string out;  // long-form CSV
  int threads = 0;
};

struct ForecastArgs {
  std::string features;  // CSV: t, x1..xd on a regular grid
  std::string target;    // CSV: t, y1..yp on the same grid
  int window = 10;
  int horizon_min = 1;
  int horizon_max = 1;
  std::int64_t train_end = -1;  // last index used for fitting
  std::string out_prefix;
  FitOptions options;
  bool emit_models = true;
};

// Each command writes its outputs plus a manifest <first output>.manifest.json
// and returns 0 on success. On failure partial outputs are removed and the
// error is rethrown.
int cmd_simulate(const SimulateArgs& args);
int cmd_fit(const FitArgs& args);
int cmd_reconstruct(const ReconstructArgs& args);
int cmd_evaluate(const EvaluateArgs& args);
int cmd_sigcheck(const SigcheckArgs& args);
int cmd_forecast(const ForecastArgs& args);

// Least-squares slope of log(y) against log(x); used by the convergence
// checks on sigcheck output.
double loglog_slope(const std::vector<double>& x,
                    const std::vector<double>& y);

}  // namespace siglasso::cli
