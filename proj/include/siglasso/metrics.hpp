#pragma once

#include <vector>

#include "siglasso/paths.hpp"

namespace siglasso {

// Mean over individuals of the squared Euclidean error at each individual's
// final evaluation time. pred[i] and truth[i] are the p-dimensional values
// for individual i.
double mse_last_point(const std::vector<std::vector<double>>& pred,
                      const std::vector<std::vector<double>>& truth);

// L2 distance between the piecewise-constant interpolations of two series:
// values are held from each sample forward (the final value extends to
// t = 1), the squared difference is integrated exactly over the merged
// breakpoints, and the square root is returned. Integration starts at the
// later of the two first sample times.
double l2_piecewise_constant(const TimeSeries& pred, const TimeSeries& truth);

double rmse(const std::vector<double>& pred, const std::vector<double>& truth);

struct IndividualScore {
  std::string id;
  double mse_last_point = 0.0;
  double l2_error = 0.0;
};

struct EvaluationReport {
  std::vector<IndividualScore> individuals;
  double mse_last_point = 0.0;  // means over individuals
  double l2_error = 0.0;
  int skipped_points = 0;
};

}  // namespace siglasso
