#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "siglasso/metrics.hpp"

using namespace siglasso;

namespace {

TimeSeries make_series(std::vector<double> times, std::vector<double> values) {
  TimeSeries ts;
  ts.grid.times = std::move(times);
  ts.values = std::move(values);
  ts.channels = 1;
  return ts;
}

}  // namespace

TEST_CASE("mse_last_point") {
  CHECK(mse_last_point({{1.0, 2.0}}, {{1.0, 2.0}}) == 0.0);
  CHECK(mse_last_point({{2.0}}, {{0.0}}) == doctest::Approx(4.0));
  const std::vector<std::vector<double>> pred{{1.0}, {3.0}, {0.0}};
  const std::vector<std::vector<double>> truth{{0.0}, {1.0}, {2.0}};
  const double direct = mse_last_point(pred, truth);
  const std::vector<std::vector<double>> pred_perm{{3.0}, {0.0}, {1.0}};
  const std::vector<std::vector<double>> truth_perm{{1.0}, {2.0}, {0.0}};
  CHECK(direct == doctest::Approx(mse_last_point(pred_perm, truth_perm)));
  CHECK_THROWS(mse_last_point({{1.0}}, {{1.0}, {2.0}}));
}

TEST_CASE("l2_piecewise_constant basics") {
  const auto zero = make_series({0.0, 0.5, 1.0}, {0.0, 0.0, 0.0});
  const auto one = make_series({0.0, 0.5, 1.0}, {1.0, 1.0, 1.0});
  CHECK(l2_piecewise_constant(zero, zero) == 0.0);
  CHECK(l2_piecewise_constant(one, zero) == doctest::Approx(1.0));
  CHECK(l2_piecewise_constant(one, zero) ==
        doctest::Approx(l2_piecewise_constant(zero, one)));
  TimeSeries empty;
  empty.channels = 1;
  CHECK_THROWS(l2_piecewise_constant(empty, zero));
}

TEST_CASE("l2_piecewise_constant three-segment fixture by hand") {
  // truth: 0 on [0, 0.4), 2 on [0.4, 0.7), 1 on [0.7, 1]
  const auto truth = make_series({0.0, 0.4, 0.7}, {0.0, 2.0, 1.0});
  // pred: 1 on [0, 0.5), 2 on [0.5, 1]
  const auto pred = make_series({0.0, 0.5}, {1.0, 2.0});
  // breakpoints: 0, .4, .5, .7, 1 with squared diffs 1, 1, 0, 1
  const double expected =
      std::sqrt(1.0 * 0.4 + 1.0 * 0.1 + 0.0 * 0.2 + 1.0 * 0.3);
  CHECK(l2_piecewise_constant(pred, truth) == doctest::Approx(expected));

  // Constant shift by c integrates to c^2 * covered length.
  const auto shifted = make_series({0.0, 0.4, 0.7}, {0.5, 2.5, 1.5});
  CHECK(l2_piecewise_constant(shifted, truth) ==
        doctest::Approx(0.5 * std::sqrt(1.0)));
}

TEST_CASE("l2_piecewise_constant starts at the later first sample") {
  // pred only covers [0.5, 1]; truth is 0 everywhere, pred is c.
  const auto truth = make_series({0.0, 1.0}, {0.0, 0.0});
  const auto pred = make_series({0.5, 1.0}, {2.0, 2.0});
  CHECK(l2_piecewise_constant(pred, truth) ==
        doctest::Approx(2.0 * std::sqrt(0.5)));
}

TEST_CASE("rmse") {
  CHECK(rmse({1.0, 2.0}, {1.0, 2.0}) == 0.0);
  CHECK(rmse({0.0, 0.0}, {3.0, 4.0}) == doctest::Approx(std::sqrt(12.5)));
  CHECK(rmse({0.0, 3.0, 1.0}, {1.0, 0.0, 2.0}) ==
        doctest::Approx(rmse({3.0, 1.0, 0.0}, {0.0, 2.0, 1.0})));
  CHECK_THROWS(rmse({1.0}, {1.0, 2.0}));
}

TEST_CASE("singleton mse reduces to squared rmse for p = 1") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss;
  std::vector<std::vector<double>> pred, truth;
  std::vector<double> flat_pred, flat_truth;
  for (int i = 0; i < 12; ++i) {
    const double a = gauss(rng), b = gauss(rng);
    pred.push_back({a});
    truth.push_back({b});
    flat_pred.push_back(a);
    flat_truth.push_back(b);
  }
  const double r = rmse(flat_pred, flat_truth);
  CHECK(mse_last_point(pred, truth) == doctest::Approx(r * r));
}
