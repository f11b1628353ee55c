#pragma once

#include <cstdint>
#include <vector>

#include "siglasso/paths.hpp"

namespace siglasso {

// Empirical study of how the signature of a discretized, noisy path
// approaches the signature of the underlying dense path. One smooth driver
// per repetition, rescaled to total variation `tv_scale`; the comparison
// tracks, for every layer, the largest distance between the two prefix
// signatures over the dense grid.
struct SigcheckParams {
  int dims = 2;
  int depth = 4;
  std::vector<int> sample_counts = {10, 20, 50, 100, 200, 500};
  std::vector<double> noise_variances = {0.0, 0.0064, 0.25};
  int reps = 50;
  std::uint64_t seed = 0;
  int dense_resolution = 1001;
  double tv_scale = 0.9;  // L; keeps the layer bound applicable
  int spline_knots = 15;
};

struct SigcheckRecord {
  double noise_variance = 0.0;
  int n_samples = 0;
  int rep = 0;
  int layer = 0;
  double distance = 0.0;            // sup_t layer distance
  double path_sup_distance = 0.0;   // sup_t ||x_t - x^D_t||
  double layer_bound = 0.0;         // 2 e L^{k-1} sup-distance (2 sup, k=1)
};

std::vector<SigcheckRecord> run_sigcheck(const SigcheckParams& params,
                                         int threads = 1);

struct SigcheckCurvePoint {
  double noise_variance = 0.0;
  int n_samples = 0;
  int layer = 0;
  double mean_distance = 0.0;
  double mean_path_sup_distance = 0.0;
  double mean_layer_bound = 0.0;
};

// Means over repetitions, one row per (noise, samples, layer).
std::vector<SigcheckCurvePoint> aggregate_sigcheck(
    const std::vector<SigcheckRecord>& records);

}  // namespace siglasso
