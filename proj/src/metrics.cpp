#include "siglasso/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace siglasso {

double mse_last_point(const std::vector<std::vector<double>>& pred,
                      const std::vector<std::vector<double>>& truth) {
  if (pred.size() != truth.size() || pred.empty())
    throw std::invalid_argument("mse_last_point: mismatched individuals");
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i].size() != truth[i].size())
      throw std::invalid_argument("mse_last_point: dimension mismatch");
    double sq = 0.0;
    for (std::size_t c = 0; c < pred[i].size(); ++c) {
      const double d = pred[i][c] - truth[i][c];
      sq += d * d;
    }
    total += sq;
  }
  return total / pred.size();
}

double l2_piecewise_constant(const TimeSeries& pred, const TimeSeries& truth) {
  if (pred.rows() == 0 || truth.rows() == 0)
    throw std::invalid_argument("l2_piecewise_constant: empty series");
  if (pred.channels != truth.channels)
    throw std::invalid_argument("l2_piecewise_constant: channel mismatch");

  // Left-continuous step value at time t (last sample with time <= t).
  auto step_row = [](const TimeSeries& ts, double t) {
    auto it = std::upper_bound(ts.grid.times.begin(), ts.grid.times.end(), t);
    return static_cast<std::size_t>(it - ts.grid.times.begin()) - 1;
  };

  const double start = std::max(pred.grid.front(), truth.grid.front());
  std::vector<double> breaks{start};
  for (double t : pred.grid.times)
    if (t > start) breaks.push_back(t);
  for (double t : truth.grid.times)
    if (t > start) breaks.push_back(t);
  breaks.push_back(1.0);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  double integral = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double len = breaks[i + 1] - breaks[i];
    if (len <= 0.0) continue;
    const auto rp = step_row(pred, breaks[i]);
    const auto rt = step_row(truth, breaks[i]);
    double sq = 0.0;
    for (int c = 0; c < pred.channels; ++c) {
      const double d = pred.value(rp, c) - truth.value(rt, c);
      sq += d * d;
    }
    integral += sq * len;
  }
  return std::sqrt(integral);
}

double rmse(const std::vector<double>& pred,
            const std::vector<double>& truth) {
  if (pred.size() != truth.size() || pred.empty())
    throw std::invalid_argument("rmse: length mismatch");
  double sq = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - truth[i];
    sq += d * d;
  }
  return std::sqrt(sq / pred.size());
}

}  // namespace siglasso
