#include "siglasso/paths.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace siglasso {

GridCheck validate_grid(const SamplingGrid& grid, double eta) {
  if (grid.times.empty()) return {false, "#grid < 2"};
  for (double t : grid.times) {
    if (!std::isfinite(t)) return {false, "non-finite time"};
  }
  for (std::size_t i = 1; i < grid.times.size(); ++i) {
    if (grid.times[i] <= grid.times[i - 1])
      return {false, "times not strictly increasing"};
  }
  if (grid.times.front() != 0.0) return {false, "0 \xE2\x88\x89 grid"};
  if (grid.times.size() < 2) return {false, "#grid < 2"};
  if (grid.times.back() < eta) {
    char msg[64];
    std::snprintf(msg, sizeof(msg), "last time %g < eta %g",
                  grid.times.back(), eta);
    return {false, msg};
  }
  return {};
}

double mesh_size(const SamplingGrid& grid) {
  if (grid.times.size() < 2)
    throw std::invalid_argument("mesh_size: grid needs at least 2 points");
  double m = 0.0;
  for (std::size_t i = 1; i < grid.times.size(); ++i)
    m = std::max(m, grid.times[i] - grid.times[i - 1]);
  return m;
}

PiecewiseLinearPath::PiecewiseLinearPath(SamplingGrid knots,
                                         std::vector<double> knot_values,
                                         int channels)
    : knots_(std::move(knots)),
      values_(std::move(knot_values)),
      channels_(channels) {
  if (channels_ <= 0)
    throw std::invalid_argument("path: channels must be positive");
  if (knots_.times.empty())
    throw std::invalid_argument("path: empty knot grid");
  if (values_.size() != knots_.size() * static_cast<std::size_t>(channels_))
    throw std::invalid_argument("path: knot/value shape mismatch");
  for (std::size_t i = 1; i < knots_.size(); ++i) {
    if (!(knots_.times[i] > knots_.times[i - 1]))
      throw std::invalid_argument("path: knot times not strictly increasing");
  }
  for (double v : values_) {
    if (!std::isfinite(v))
      throw std::invalid_argument("path: non-finite knot value");
  }
  cum_length_.resize(knots_.size(), 0.0);
  for (std::size_t i = 1; i < knots_.size(); ++i) {
    double seg = 0.0;
    for (int c = 0; c < channels_; ++c) {
      const double d = value_unchecked(i, c) - value_unchecked(i - 1, c);
      seg += d * d;
    }
    cum_length_[i] = cum_length_[i - 1] + std::sqrt(seg);
  }
}

std::size_t PiecewiseLinearPath::segment_of(double t) const {
  if (t < first_time() || t > last_time())
    throw std::out_of_range("path: time outside knot range");
  // Index of the last knot <= t, clamped so that t == last_time maps to
  // the final segment.
  auto it = std::upper_bound(knots_.times.begin(), knots_.times.end(), t);
  std::size_t idx = static_cast<std::size_t>(it - knots_.times.begin());
  if (idx > 0) --idx;
  if (idx + 1 >= knots_.size()) idx = knots_.size() - 2;
  return idx;
}

std::vector<double> PiecewiseLinearPath::value_at(double t) const {
  if (n_knots() == 1) {
    if (t != first_time())
      throw std::out_of_range("path: time outside knot range");
    auto v = knot_value(0);
    return {v.begin(), v.end()};
  }
  const std::size_t seg = segment_of(t);
  const double t0 = knot_time(seg), t1 = knot_time(seg + 1);
  const double w = (t - t0) / (t1 - t0);
  std::vector<double> out(channels_);
  for (int c = 0; c < channels_; ++c) {
    out[c] = (1.0 - w) * value_unchecked(seg, c) +
             w * value_unchecked(seg + 1, c);
  }
  return out;
}

double PiecewiseLinearPath::total_variation(double t_end) const {
  if (t_end < first_time() || t_end > last_time())
    throw std::out_of_range("total_variation: t_end outside knot range");
  if (n_knots() == 1 || t_end == first_time()) return 0.0;
  const std::size_t seg = segment_of(t_end);
  const double t0 = knot_time(seg), t1 = knot_time(seg + 1);
  const double frac = (t_end - t0) / (t1 - t0);
  return cum_length_[seg] + frac * (cum_length_[seg + 1] - cum_length_[seg]);
}

void PiecewiseLinearPath::partial_increment(std::size_t seg, double t0,
                                            double t1,
                                            std::span<double> out) const {
  const double a = knot_time(seg), b = knot_time(seg + 1);
  const double frac = (t1 - t0) / (b - a);
  for (int c = 0; c < channels_; ++c) {
    out[c] = frac * (value_unchecked(seg + 1, c) - value_unchecked(seg, c));
  }
}

PiecewiseLinearPath interpolate_linear(const TimeSeries& ts) {
  return PiecewiseLinearPath(ts.grid, ts.values, ts.channels);
}

TimeSeries time_augment(const TimeSeries& ts) {
  TimeSeries out;
  out.grid = ts.grid;
  out.channels = ts.channels + 1;
  out.values.resize(ts.rows() * out.channels);
  for (std::size_t r = 0; r < ts.rows(); ++r) {
    out.values[r * out.channels] = ts.grid.times[r];
    for (int c = 0; c < ts.channels; ++c)
      out.values[r * out.channels + 1 + c] = ts.value(r, c);
  }
  return out;
}

PiecewiseLinearPath normalize_by_tv(const PiecewiseLinearPath& path,
                                    double t_end) {
  const double tv = path.total_variation(t_end);
  if (tv <= 0.0)
    throw DegeneratePathError("zero total variation on [0, t_end]");
  std::vector<double> scaled;
  scaled.reserve(path.n_knots() * path.channels());
  for (std::size_t i = 0; i < path.n_knots(); ++i) {
    auto row = path.knot_value(i);
    for (double v : row) scaled.push_back(v / tv);
  }
  return PiecewiseLinearPath(path.knots(), std::move(scaled), path.channels());
}

bool target_grid_subset_of_features(const IndividualRecord& rec) {
  const auto& f = rec.features.grid.times;
  for (double t : rec.targets.grid.times) {
    if (!std::binary_search(f.begin(), f.end(), t)) return false;
  }
  return true;
}

}  // namespace siglasso
