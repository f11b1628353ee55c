#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace siglasso {

// Thrown when an operation requires a path with positive total variation
// (e.g. normalization of a constant path). Callers may drop the offending
// individual instead of propagating NaNs.
class DegeneratePathError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Ordered measurement times of one individual, expected to live in [0, 1].
struct SamplingGrid {
  std::vector<double> times;

  std::size_t size() const { return times.size(); }
  double front() const { return times.front(); }
  double back() const { return times.back(); }
};

struct GridCheck {
  bool ok = true;
  std::string violation;  // names the failed clause, empty when ok
};

// Checks the sampling assumptions: strictly increasing finite times,
// 0 in the grid, at least 2 points, last time >= eta.
GridCheck validate_grid(const SamplingGrid& grid, double eta);

// Largest gap between two successive sampling times.
double mesh_size(const SamplingGrid& grid);

// Multivariate observations on a sampling grid, values stored row-major
// (one row per time, one column per channel).
struct TimeSeries {
  SamplingGrid grid;
  std::vector<double> values;
  int channels = 0;

  std::size_t rows() const { return grid.size(); }
  double value(std::size_t row, int channel) const {
    return values[row * channels + channel];
  }
  std::span<const double> row(std::size_t r) const {
    return {values.data() + r * channels, static_cast<std::size_t>(channels)};
  }
};

// Piecewise-linear interpolation of a time series. Knot values are
// reproduced exactly; total variation is the summed Euclidean length of the
// knot-to-knot increments, prorated linearly inside a segment.
class PiecewiseLinearPath {
 public:
  PiecewiseLinearPath(SamplingGrid knots, std::vector<double> knot_values,
                      int channels);

  int channels() const { return channels_; }
  std::size_t n_knots() const { return knots_.size(); }
  double knot_time(std::size_t i) const { return knots_.times[i]; }
  std::span<const double> knot_value(std::size_t i) const {
    return {values_.data() + i * channels_, static_cast<std::size_t>(channels_)};
  }
  const SamplingGrid& knots() const { return knots_; }
  double first_time() const { return knots_.front(); }
  double last_time() const { return knots_.back(); }

  std::vector<double> value_at(double t) const;

  // Total variation of the path restricted to [first_time, t_end].
  double total_variation(double t_end) const;

  // Increment of the path between times t0 <= t1, both inside segment seg.
  void partial_increment(std::size_t seg, double t0, double t1,
                         std::span<double> out) const;

  // Index of the segment [t_i, t_{i+1}] containing t (last segment for
  // t == last_time).
  std::size_t segment_of(double t) const;

 private:
  double value_unchecked(std::size_t i, int c) const {
    return values_[i * channels_ + c];
  }

  SamplingGrid knots_;
  std::vector<double> values_;
  int channels_ = 0;
  std::vector<double> cum_length_;  // arc length accumulated at each knot
};

// Linear interpolation of the observed series.
PiecewiseLinearPath interpolate_linear(const TimeSeries& ts);

// Prepends the timestamp as channel 0. Not idempotent: calling twice
// prepends time twice.
TimeSeries time_augment(const TimeSeries& ts);

// Divides every knot value by the total variation on [first_time, t_end] so
// that the result has total variation exactly 1 there. Throws
// DegeneratePathError when the total variation is zero.
PiecewiseLinearPath normalize_by_tv(const PiecewiseLinearPath& path,
                                    double t_end);

// One individual: feature record on grid D, target record on a coarser grid
// contained in D.
struct IndividualRecord {
  std::string id;
  TimeSeries features;
  TimeSeries targets;
};

// Verifies that every target time appears among the feature times.
bool target_grid_subset_of_features(const IndividualRecord& rec);

}  // namespace siglasso
