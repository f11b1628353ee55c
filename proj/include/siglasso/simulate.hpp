#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "siglasso/paths.hpp"

namespace siglasso {

enum class Setting { well_specified, ill_specified, ou, tumor };

std::string to_string(Setting s);
Setting setting_from_string(const std::string& name);

struct OuParams {
  double theta = 3.0;
  double mu = 1.0;
  double sigma2 = 0.1;  // variance of the driving Brownian motion
  double y0 = 0.0;
};

struct TumorParams {
  double k1 = 10.0;
  double k2 = 0.5;
  double lambda0 = 0.9;
  double lambda1 = 0.7;
  double psi = 20.0;
  std::array<double, 4> u0 = {2.0, 0.0, 0.0, 0.0};
};

struct SimulationConfig {
  Setting setting = Setting::well_specified;
  int n = 50;
  int dense_resolution = 1001;  // uniform grid points on [0, 1]
  int feature_samples_min = 20;
  int feature_samples_max = 50;
  int target_samples_min = 5;
  int target_samples_max = 5;
  double noise_x = 0.0;  // variance of the feature measurement noise
  double noise_y = 0.0;  // variance of the target measurement noise
  std::uint64_t seed = 0;
  bool downsample = true;  // test data is emitted on the dense grid
  int driver_dims = 2;     // feature channels (well/ill-specified)
  int target_dims = 1;     // p (well-specified)
  int spline_knots = 15;
  int ill_lags = 10;       // dense-grid index shifts
  int cde_substeps = 4;
  double cde_y0 = 1.0;     // initial target value, broadcast over dims
  OuParams ou;
  TumorParams tumor;
};

// Smooth driver used by the well-specified, ill-specified, and tumor
// settings: per channel, standard-normal values at evenly spaced anchor
// knots, interpolated by a natural cubic spline and sampled on the dense
// grid.
TimeSeries gen_smooth_driver(int dims, int anchors,
                             const std::vector<double>& dense_times,
                             std::mt19937_64& rng);

enum class CdeField {
  tanh_linear,      // F(y) = tanh(Ay) reshaped to p x d
  identity_linear,  // test hook: F(y) = Ay reshaped, makes the CDE linear
};

// Steps y' = F(y) dx along the piecewise-linear driver. Each dense step is
// divided into `substeps` explicit updates y <- y + F(y) (dx / substeps).
TimeSeries solve_cde(const TimeSeries& driver, const Eigen::MatrixXd& A,
                     const Eigen::VectorXd& y0, int substeps = 4,
                     CdeField field = CdeField::tanh_linear);

// Brownian motion started at 0 with Var(x_t) = sigma2 * t.
TimeSeries gen_brownian(double sigma2, const std::vector<double>& dense_times,
                        std::mt19937_64& rng);

// Euler-Maruyama for dy = theta (mu - y) dt + dx.
TimeSeries solve_ou(const TimeSeries& driver, double theta, double mu,
                    double y0);

// Four-compartment tumor growth system driven by a nonnegative drug
// concentration path; classic fixed-step RK4 on the dense grid. The output
// is the compartment sum at each grid point. Throws on state blow-up or
// compartments going negative beyond integration tolerance.
TimeSeries solve_tumor(const TimeSeries& driver, const TumorParams& params);

// Target y_j = log || sum_{h=1..lags} x_{j-h} || on the dense grid, defined
// from index `lags` on; indices with vanishing norm are skipped.
TimeSeries gen_ill_specified(const TimeSeries& driver, int lags,
                             int* skipped = nullptr);

// Adds i.i.d. centered Gaussian noise of the given variance to every value
// entry; timestamps are untouched.
TimeSeries add_noise(const TimeSeries& ts, double variance,
                     std::uint64_t seed);

// Draws an individual sampling scheme: the feature grid is {0} plus k-1
// uniform draws from the dense grid (deduplicated), the target grid is an
// m-subset of the feature grid that always contains the final feature time.
// Target times are restricted to points where the dense target is defined
// and never include 0.
IndividualRecord random_downsample(const TimeSeries& dense_features,
                                   const TimeSeries& dense_targets,
                                   int feature_samples, int target_samples,
                                   std::mt19937_64& rng);

struct GeneratedSample {
  TimeSeries dense_features;  // noise-free ground truth
  TimeSeries dense_targets;
  IndividualRecord record;    // downsampled, noisy observations
};

struct SimulationOutput {
  std::vector<double> dense_times;
  std::vector<GeneratedSample> samples;
  int warnings = 0;  // skipped degenerate points across individuals
};

// Generates the full dataset for a configuration. A pure function of the
// config (individual i uses seeds derived from config.seed and i), so
// identical configs reproduce identical datasets.
SimulationOutput generate(const SimulationConfig& config, int threads = 1);

}  // namespace siglasso
