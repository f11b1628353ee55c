#include "siglasso/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "siglasso/signature.hpp"
#include "siglasso/util.hpp"

namespace siglasso {

namespace {

// Prefix signature of the record normalized by its total variation: scaling
// the path by 1/tv scales layer k of every prefix signature by tv^-k.
TruncatedSignature normalize_prefix(const TruncatedSignature& raw_prefix,
                                    double tv) {
  return scale_path_values(raw_prefix, 1.0 / tv);
}

Eigen::VectorXd signature_row(const TruncatedSignature& sig) {
  auto flat = sig.flat();
  return Eigen::Map<const Eigen::VectorXd>(flat.data(), flat.size());
}

}  // namespace

int Dataset::feature_channels() const {
  return individuals.empty() ? 0 : individuals.front().features.channels;
}

int Dataset::target_channels() const {
  return individuals.empty() ? 0 : individuals.front().targets.channels;
}

std::int64_t Dataset::total_measurements() const {
  std::int64_t m = 0;
  for (const auto& rec : individuals) m += rec.targets.grid.size();
  return m;
}

void Dataset::validate(double eta) const {
  if (individuals.empty())
    throw std::invalid_argument("dataset: no individuals");
  const int d = feature_channels();
  const int p = target_channels();
  for (const auto& rec : individuals) {
    const auto check = validate_grid(rec.features.grid, eta);
    if (!check.ok)
      throw std::invalid_argument("dataset: individual " + rec.id + ": " +
                                  check.violation);
    if (rec.features.channels != d || rec.targets.channels != p)
      throw std::invalid_argument("dataset: individual " + rec.id +
                                  ": inconsistent channel counts");
    if (rec.targets.grid.size() < 1)
      throw std::invalid_argument("dataset: individual " + rec.id +
                                  ": no target measurements");
    if (!target_grid_subset_of_features(rec))
      throw std::invalid_argument("dataset: individual " + rec.id +
                                  ": target grid not within feature grid");
    for (double v : rec.features.values)
      if (!std::isfinite(v))
        throw std::invalid_argument("dataset: individual " + rec.id +
                                    ": non-finite feature value");
    for (double v : rec.targets.values)
      if (!std::isfinite(v))
        throw std::invalid_argument("dataset: individual " + rec.id +
                                    ": non-finite target value");
  }
}

DesignBuild build_design(const Dataset& ds, int depth, int threads,
                         bool time_augmented, bool tv_normalized) {
  ds.validate();
  const int p = ds.target_channels();
  const int path_channels =
      ds.feature_channels() + (time_augmented ? 1 : 0);
  const auto width = sig_dim(path_channels, depth);

  struct PerIndividual {
    std::vector<Eigen::VectorXd> rows;
    std::vector<Eigen::VectorXd> targets;
    std::vector<double> times;
    int skipped = 0;
  };
  std::vector<PerIndividual> parts(ds.individuals.size());

  parallel_for(ds.individuals.size(), threads, [&](std::size_t i) {
    const auto& rec = ds.individuals[i];
    const TimeSeries prepared =
        time_augmented ? time_augment(rec.features) : rec.features;
    const PiecewiseLinearPath path = interpolate_linear(prepared);
    const auto& t_list = rec.targets.grid.times;
    const auto raw = prefix_signatures(path, depth, t_list);
    const double record_tv = path.total_variation(path.last_time());
    auto& part = parts[i];
    for (std::size_t j = 0; j < t_list.size(); ++j) {
      // Empty prefixes carry no signal and a zero-variation record cannot
      // be normalized; both drop the row.
      if (t_list[j] == path.first_time() ||
          (tv_normalized && record_tv <= 0.0)) {
        ++part.skipped;
        continue;
      }
      const TruncatedSignature sig =
          tv_normalized ? normalize_prefix(raw[j], record_tv) : raw[j];
      part.rows.push_back(signature_row(sig));
      Eigen::VectorXd y(p);
      for (int c = 0; c < p; ++c) y[c] = rec.targets.value(j, c);
      part.targets.push_back(std::move(y));
      part.times.push_back(t_list[j]);
    }
  });

  std::int64_t kept = 0;
  DesignBuild out;
  for (const auto& part : parts) {
    kept += part.rows.size();
    out.skipped += part.skipped;
  }
  out.design.channels = path_channels;
  out.design.depth = depth;
  out.design.values.resize(kept, width);
  out.targets.resize(kept, p);
  out.rows.reserve(kept);
  Eigen::Index r = 0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    for (std::size_t j = 0; j < parts[i].rows.size(); ++j) {
      out.design.values.row(r) = parts[i].rows[j].transpose();
      out.targets.row(r) = parts[i].targets[j].transpose();
      out.rows.push_back({i, parts[i].times[j]});
      ++r;
    }
  }
  if (kept == 0)
    throw std::invalid_argument("build_design: no usable rows");
  return out;
}

SigLassoModel fit(const Dataset& ds, const FitOptions& opts) {
  if (opts.depth_grid.empty())
    throw std::invalid_argument("fit: empty depth grid");
  for (int depth : opts.depth_grid)
    if (depth < 1 || depth > 9)
      throw std::invalid_argument("fit: depth grid outside [1, 9]");
  ds.validate();
  if (ds.total_measurements() < opts.cv_folds)
    throw std::invalid_argument("fit: dataset smaller than fold count");

  SigLassoModel model;
  model.time_augmented = opts.time_augmented;
  model.tv_normalized = opts.tv_normalized;
  model.responses = ds.target_channels();

  double best_error = std::numeric_limits<double>::infinity();
  int best_depth = -1;
  double best_penalty = 0.0;

  for (int depth : opts.depth_grid) {
    const DesignBuild build = build_design(ds, depth, opts.threads,
                                           opts.time_augmented,
                                           opts.tv_normalized);
    const PenaltyWeights w = layer_weights(depth);
    const DesignMatrix rescaled =
        rescale_design(build.design, inverse_weights(w));
    const auto grid =
        lambda_path(rescaled, build.targets, opts.n_lambdas,
                    opts.lambda_ratio);
    const auto cv =
        cross_validate(rescaled, build.targets, opts.cv_folds, grid,
                       opts.seed, opts.lasso, opts.threads);
    model.cv_curves.push_back({depth, cv});
    // Strict improvement keeps the earlier (smaller) depth on ties.
    if (cv.cv_errors[cv.chosen_index] < best_error) {
      best_error = cv.cv_errors[cv.chosen_index];
      best_depth = depth;
      best_penalty = cv.chosen_penalty;
    }
  }

  const DesignBuild build = build_design(ds, best_depth, opts.threads,
                                         opts.time_augmented,
                                         opts.tv_normalized);
  const PenaltyWeights w = layer_weights(best_depth);
  const PenaltyWeights inv = inverse_weights(w);
  const DesignMatrix rescaled = rescale_design(build.design, inv);
  const LassoFit refit =
      fit_lasso(rescaled, build.targets, best_penalty, opts.lasso);

  model.depth = best_depth;
  model.path_channels = build.design.channels;
  model.weights = w;
  model.penalty = best_penalty;
  model.cv_error = best_error;
  model.design_rows = build.design.rows();
  model.skipped_rows = build.skipped;
  model.intercept = refit.intercept;
  // Map the solution of the rescaled problem back to signature coordinates.
  model.theta = refit.theta;
  for (int k = 1; k <= best_depth; ++k) {
    const auto start = build.design.layer_start(k);
    const auto size = build.design.layer_size(k);
    model.theta.middleRows(start, size) *= inv.lambda[k];
  }
  return model;
}

namespace {

PiecewiseLinearPath prepare_path(const SigLassoModel& model,
                                 const TimeSeries& features) {
  if (features.channels != model.original_channels())
    throw std::invalid_argument("predict: feature channel mismatch");
  const TimeSeries prepared =
      model.time_augmented ? time_augment(features) : features;
  return interpolate_linear(prepared);
}

Eigen::VectorXd predict_from_signature(const SigLassoModel& model,
                                       const TruncatedSignature& sig) {
  return model.intercept + model.theta.transpose() * signature_row(sig);
}

}  // namespace

Eigen::VectorXd predict_at(const SigLassoModel& model,
                           const TimeSeries& features, double t) {
  const PiecewiseLinearPath path = prepare_path(model, features);
  if (t < path.first_time() || t > path.last_time())
    throw std::out_of_range("predict_at: t outside feature time range");
  if (t == path.first_time()) return model.intercept;
  const double tv = path.total_variation(path.last_time());
  if (model.tv_normalized && tv <= 0.0)
    throw DegeneratePathError("predict_at: zero-variation record");
  TruncatedSignature sig = path_signature(path, model.depth, t);
  if (model.tv_normalized) sig = normalize_prefix(sig, tv);
  return predict_from_signature(model, sig);
}

Eigen::MatrixXd reconstruct(const SigLassoModel& model,
                            const TimeSeries& features,
                            std::span<const double> t_list) {
  const PiecewiseLinearPath path = prepare_path(model, features);
  Eigen::MatrixXd out(t_list.size(), model.responses);
  const auto raw = prefix_signatures(path, model.depth, t_list);
  const double tv = path.total_variation(path.last_time());
  for (std::size_t j = 0; j < t_list.size(); ++j) {
    if (t_list[j] == path.first_time()) {
      out.row(j) = model.intercept.transpose();
      continue;
    }
    if (model.tv_normalized && tv <= 0.0) {
      out.row(j).setConstant(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    const TruncatedSignature sig =
        model.tv_normalized ? normalize_prefix(raw[j], tv) : raw[j];
    out.row(j) = predict_from_signature(model, sig).transpose();
  }
  return out;
}

namespace {

int letter_for_channel(const SigLassoModel& model, int channel) {
  if (model.time_augmented) {
    if (channel == 0) return 1;  // time channel
    if (channel < 1 || channel > model.original_channels())
      throw std::invalid_argument("feature importance: invalid channel");
    return channel + 1;
  }
  if (channel < 1 || channel > model.path_channels)
    throw std::invalid_argument("feature importance: invalid channel");
  return channel;
}

}  // namespace

double pfi(const SigLassoModel& model, int channel) {
  const int letter = letter_for_channel(model, channel);
  const int d = model.path_channels;
  DesignMatrix shape;
  shape.channels = d;
  shape.depth = model.depth;
  double total = 0.0;
  for (int k = 1; k <= model.depth; ++k) {
    const Word pure(std::vector<int>(k, letter));
    const auto row = shape.layer_start(k) + pure.index(d);
    total += model.theta.row(row).norm();
  }
  return total / model.depth;
}

double cfi(const SigLassoModel& model, int channel) {
  const int letter = letter_for_channel(model, channel);
  const int d = model.path_channels;
  DesignMatrix shape;
  shape.channels = d;
  shape.depth = model.depth;
  // s_d(N) - s_{d-1}(N) counts the words of length <= N containing a fixed
  // letter; s_0(N) degenerates to 1 (the empty word).
  const double norm_const =
      double(sig_dim(d, model.depth)) -
      (d > 1 ? double(sig_dim(d - 1, model.depth)) : 1.0);
  double total = 0.0;
  for (int k = 1; k <= model.depth; ++k) {
    const auto start = shape.layer_start(k);
    const auto size = shape.layer_size(k);
    for (std::int64_t idx = 0; idx < size; ++idx) {
      const Word word = Word::from_index(d, k, idx);
      const auto& letters = word.letters();
      if (std::find(letters.begin(), letters.end(), letter) == letters.end())
        continue;
      total += model.theta.row(start + idx).norm();
    }
  }
  return total / norm_const;
}

std::vector<FeatureImportance> feature_importance(const SigLassoModel& model,
                                                  bool include_time) {
  std::vector<FeatureImportance> report;
  if (include_time && model.time_augmented)
    report.push_back({0, pfi(model, 0), cfi(model, 0)});
  for (int i = 1; i <= model.original_channels(); ++i)
    report.push_back({i, pfi(model, i), cfi(model, i)});
  return report;
}

Dataset build_lagged_dataset(const TimeSeries& features,
                             const TimeSeries& target, int window,
                             int horizon) {
  if (window < 1 || horizon < 1)
    throw std::invalid_argument("build_lagged_dataset: window/horizon < 1");
  const auto L = features.rows();
  if (target.rows() != L || target.grid.times != features.grid.times)
    throw std::invalid_argument(
        "build_lagged_dataset: target grid must equal the feature grid");
  if (L < 2)
    throw std::invalid_argument("build_lagged_dataset: series too short");
  const double step = features.grid.times[1] - features.grid.times[0];
  for (std::size_t j = 1; j < L; ++j) {
    const double gap = features.grid.times[j] - features.grid.times[j - 1];
    if (std::abs(gap - step) > 1e-9 * std::max(1.0, std::abs(step)))
      throw std::invalid_argument(
          "build_lagged_dataset: feature grid must be regular");
  }
  const std::int64_t first_t = window + horizon;
  if (first_t > static_cast<std::int64_t>(L) - 1)
    throw std::invalid_argument(
        "build_lagged_dataset: window + horizon exceed series length");

  Dataset ds;
  for (std::int64_t t = first_t; t < static_cast<std::int64_t>(L); ++t) {
    IndividualRecord rec;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "t%04lld", static_cast<long long>(t));
    rec.id = buf;
    rec.features.channels = features.channels;
    const std::int64_t lo = t - horizon - window;
    for (std::int64_t j = lo; j <= t - horizon; ++j) {
      rec.features.grid.times.push_back(double(j - lo) / double(window));
      for (int c = 0; c < features.channels; ++c)
        rec.features.values.push_back(features.value(j, c));
    }
    rec.features.grid.times.back() = 1.0;
    rec.targets.channels = target.channels;
    rec.targets.grid.times.push_back(1.0);
    for (int c = 0; c < target.channels; ++c)
      rec.targets.values.push_back(target.value(t, c));
    ds.individuals.push_back(std::move(rec));
  }
  return ds;
}

}  // namespace siglasso
