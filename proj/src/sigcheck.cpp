#include "siglasso/sigcheck.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "siglasso/signature.hpp"
#include "siglasso/simulate.hpp"
#include "siglasso/util.hpp"

namespace siglasso {

namespace {

PiecewiseLinearPath to_path(const TimeSeries& ts) {
  return interpolate_linear(ts);
}

// Rescales the series values so the piecewise-linear total variation over
// the full interval equals target_tv.
TimeSeries rescale_tv(const TimeSeries& ts, double target_tv) {
  const double tv = to_path(ts).total_variation(ts.grid.back());
  TimeSeries out = ts;
  const double f = target_tv / tv;
  for (double& v : out.values) v *= f;
  return out;
}

}  // namespace

std::vector<SigcheckRecord> run_sigcheck(const SigcheckParams& params,
                                         int threads) {
  const std::vector<double> dense_times = [&] {
    std::vector<double> t(params.dense_resolution);
    for (int i = 0; i < params.dense_resolution; ++i)
      t[i] = double(i) / double(params.dense_resolution - 1);
    return t;
  }();

  struct Task {
    double noise = 0.0;
    int n_samples = 0;
    int rep = 0;
  };
  std::vector<Task> tasks;
  for (double noise : params.noise_variances)
    for (int n : params.sample_counts)
      for (int rep = 0; rep < params.reps; ++rep)
        tasks.push_back({noise, n, rep});

  std::vector<std::vector<SigcheckRecord>> results(tasks.size());
  parallel_for(tasks.size(), threads, [&](std::size_t ti) {
    const Task& task = tasks[ti];
    // The dense path depends only on the repetition, so all noise levels
    // and sample counts see the same 50 reference paths.
    std::mt19937_64 path_rng(derive_seed(params.seed, task.rep));
    const TimeSeries dense = rescale_tv(
        gen_smooth_driver(params.dims, params.spline_knots, dense_times,
                          path_rng),
        params.tv_scale);
    const PiecewiseLinearPath dense_path = to_path(dense);

    // Random discretization of [0, 1]: endpoints plus n - 2 uniform draws
    // from the dense grid.
    std::mt19937_64 sample_rng(derive_seed(
        params.seed,
        splitmix64(task.rep * 1000003ULL + task.n_samples) ^
            std::uint64_t(task.noise * 1e9)));
    std::set<std::size_t> picked{0, dense_times.size() - 1};
    std::uniform_int_distribution<std::size_t> draw(0, dense_times.size() - 1);
    while (picked.size() < static_cast<std::size_t>(
                                std::min<int>(task.n_samples,
                                              params.dense_resolution)))
      picked.insert(draw(sample_rng));

    TimeSeries sampled;
    sampled.channels = params.dims;
    for (std::size_t idx : picked) {
      sampled.grid.times.push_back(dense_times[idx]);
      for (int c = 0; c < params.dims; ++c)
        sampled.values.push_back(dense.value(idx, c));
    }
    if (task.noise > 0.0) {
      std::normal_distribution<double> gauss(0.0, std::sqrt(task.noise));
      for (double& v : sampled.values) v += gauss(sample_rng);
    }
    const PiecewiseLinearPath noisy_path = to_path(sampled);

    const auto dense_prefixes =
        prefix_signatures(dense_path, params.depth, dense_times);
    const auto noisy_prefixes =
        prefix_signatures(noisy_path, params.depth, dense_times);

    double path_sup = 0.0;
    for (std::size_t j = 0; j < dense_times.size(); ++j) {
      const auto a = dense_path.value_at(dense_times[j]);
      const auto b = noisy_path.value_at(dense_times[j]);
      double sq = 0.0;
      for (int c = 0; c < params.dims; ++c) {
        const double d = a[c] - b[c];
        sq += d * d;
      }
      path_sup = std::max(path_sup, std::sqrt(sq));
    }

    auto& recs = results[ti];
    for (int k = 1; k <= params.depth; ++k) {
      double dist = 0.0;
      for (std::size_t j = 0; j < dense_times.size(); ++j)
        dist = std::max(dist, layer_sup_distance(dense_prefixes[j],
                                                 noisy_prefixes[j], k));
      SigcheckRecord rec;
      rec.noise_variance = task.noise;
      rec.n_samples = task.n_samples;
      rec.rep = task.rep;
      rec.layer = k;
      rec.distance = dist;
      rec.path_sup_distance = path_sup;
      rec.layer_bound =
          k == 1 ? 2.0 * path_sup
                 : 2.0 * std::exp(1.0) *
                       std::pow(params.tv_scale, k - 1) * path_sup;
      recs.push_back(rec);
    }
  });

  std::vector<SigcheckRecord> flat;
  for (auto& r : results)
    flat.insert(flat.end(), r.begin(), r.end());
  return flat;
}

std::vector<SigcheckCurvePoint> aggregate_sigcheck(
    const std::vector<SigcheckRecord>& records) {
  std::map<std::tuple<double, int, int>, SigcheckCurvePoint> acc;
  std::map<std::tuple<double, int, int>, int> counts;
  for (const auto& rec : records) {
    const auto key = std::make_tuple(rec.noise_variance, rec.n_samples,
                                     rec.layer);
    auto& point = acc[key];
    point.noise_variance = rec.noise_variance;
    point.n_samples = rec.n_samples;
    point.layer = rec.layer;
    point.mean_distance += rec.distance;
    point.mean_path_sup_distance += rec.path_sup_distance;
    point.mean_layer_bound += rec.layer_bound;
    ++counts[key];
  }
  std::vector<SigcheckCurvePoint> out;
  out.reserve(acc.size());
  for (auto& [key, point] : acc) {
    const int n = counts[key];
    point.mean_distance /= n;
    point.mean_path_sup_distance /= n;
    point.mean_layer_bound /= n;
    out.push_back(point);
  }
  return out;
}

}  // namespace siglasso
