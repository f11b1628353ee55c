#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "siglasso/paths.hpp"
#include "siglasso/regression.hpp"

namespace siglasso {

struct Dataset {
  std::vector<IndividualRecord> individuals;

  int feature_channels() const;
  int target_channels() const;
  std::int64_t total_measurements() const;  // M = sum of target grid sizes

  // Checks grid assumptions, channel consistency, and that every target
  // grid is contained in the corresponding feature grid.
  void validate(double eta = 0.0) const;
};

// Stacked-signature design built from a dataset: one row per
// (individual, target time) pair, ordered by individual then time. Rows
// with a degenerate (zero total variation) prefix are dropped and counted.
struct DesignBuild {
  struct RowKey {
    std::size_t individual;
    double time;
  };
  DesignMatrix design;
  Eigen::MatrixXd targets;  // M x p
  std::vector<RowKey> rows;
  int skipped = 0;
};

// Each row is the depth-N signature of the prefix [0, t] of the
// time-augmented feature interpolation, normalized by the record's total
// variation. One normalization constant per individual keeps the time
// dimension observable in the features; rows at the very start of a record
// (empty prefix) are dropped.
DesignBuild build_design(const Dataset& ds, int depth, int threads = 1,
                         bool time_augmented = true, bool tv_normalized = true);

struct DepthCvCurve {
  int depth = 0;
  CrossValidationResult cv;
};

// Fitted model: prediction at time t is intercept + theta' S_N(prefix) with
// the same preprocessing as training. theta is stored in unweighted
// signature coordinates (row 0 is zero; the intercept is separate).
struct SigLassoModel {
  int depth = 0;
  int path_channels = 0;  // channels after preprocessing (d + 1 if augmented)
  int responses = 0;
  bool time_augmented = true;
  bool tv_normalized = true;
  PenaltyWeights weights;
  Eigen::MatrixXd theta;
  Eigen::VectorXd intercept;
  double penalty = 0.0;

  // training diagnostics
  double cv_error = 0.0;
  std::vector<DepthCvCurve> cv_curves;
  std::int64_t design_rows = 0;
  int skipped_rows = 0;

  int original_channels() const {
    return time_augmented ? path_channels - 1 : path_channels;
  }
};

struct FitOptions {
  std::vector<int> depth_grid = {2, 3, 4, 5, 6};
  int cv_folds = 5;
  std::uint64_t seed = 0;
  int n_lambdas = 100;
  double lambda_ratio = 1e-3;
  LassoOptions lasso;
  bool time_augmented = true;
  bool tv_normalized = true;
  int threads = 1;
};

// Learn phase: for every depth in the grid, build the design, apply the
// layer weights through the change of variable, and cross-validate the
// penalty strength; the (depth, penalty) pair with the smallest CV error
// wins (ties: larger penalty, then smaller depth) and is refit on the full
// data.
SigLassoModel fit(const Dataset& ds, const FitOptions& opts);

// Prediction at a single prefix time. t at the start of the record is
// defined as the intercept (signature of an empty prefix); a zero-variation
// record throws DegeneratePathError. The normalization constant is the
// given record's total variation, so the caller chooses the available
// history: pass the prefix itself for strictly online prediction.
Eigen::VectorXd predict_at(const SigLassoModel& model,
                           const TimeSeries& features, double t);

// Vectorized predict_at over an increasing time list, sharing the running
// signature across prefixes. Degenerate prefixes give NaN rows.
Eigen::MatrixXd reconstruct(const SigLassoModel& model,
                            const TimeSeries& features,
                            std::span<const double> t_list);

// Pure feature importance of an original channel (1-based): mean over
// k = 1..N of the coefficient norm at the pure word (i, ..., i). Channel 0
// addresses the time channel of a time-augmented model.
double pfi(const SigLassoModel& model, int channel);

// Cross feature importance: normalized sum of coefficient norms over all
// words containing the channel's letter.
double cfi(const SigLassoModel& model, int channel);

struct FeatureImportance {
  int channel = 0;  // 0 = time channel
  double pfi = 0.0;
  double cfi = 0.0;
};

std::vector<FeatureImportance> feature_importance(const SigLassoModel& model,
                                                  bool include_time = false);

// One synthetic individual per admissible target index t: its features are
// the window + 1 samples ending at index t - horizon with times rescaled
// affinely to [0, 1], its single target measurement is target[t].
Dataset build_lagged_dataset(const TimeSeries& features,
                             const TimeSeries& target, int window,
                             int horizon);

}  // namespace siglasso
