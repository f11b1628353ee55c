#include "siglasso/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "siglasso/util.hpp"

namespace siglasso {

namespace {

// Natural cubic spline through (x_i, y_i) with uniform knots; evaluates at
// the query points. Second derivatives from the standard tridiagonal system
// (Thomas algorithm), zero at both ends.
std::vector<double> natural_cubic_spline(const std::vector<double>& knots,
                                         const std::vector<double>& values,
                                         const std::vector<double>& queries) {
  const std::size_t n = knots.size();
  std::vector<double> m(n, 0.0);  // second derivatives
  if (n > 2) {
    const std::size_t interior = n - 2;
    std::vector<double> a(interior), b(interior), c(interior), rhs(interior);
    for (std::size_t i = 0; i < interior; ++i) {
      const double h0 = knots[i + 1] - knots[i];
      const double h1 = knots[i + 2] - knots[i + 1];
      a[i] = h0;
      b[i] = 2.0 * (h0 + h1);
      c[i] = h1;
      rhs[i] = 6.0 * ((values[i + 2] - values[i + 1]) / h1 -
                      (values[i + 1] - values[i]) / h0);
    }
    for (std::size_t i = 1; i < interior; ++i) {
      const double w = a[i] / b[i - 1];
      b[i] -= w * c[i - 1];
      rhs[i] -= w * rhs[i - 1];
    }
    m[interior] = rhs[interior - 1] / b[interior - 1];
    for (std::size_t i = interior - 1; i >= 1; --i)
      m[i] = (rhs[i - 1] - c[i - 1] * m[i + 1]) / b[i - 1];
  }
  std::vector<double> out;
  out.reserve(queries.size());
  for (double x : queries) {
    std::size_t seg = 0;
    if (x >= knots.back()) {
      seg = n - 2;
    } else if (x > knots.front()) {
      seg = static_cast<std::size_t>(
                std::upper_bound(knots.begin(), knots.end(), x) -
                knots.begin()) - 1;
    }
    const double h = knots[seg + 1] - knots[seg];
    const double t1 = (knots[seg + 1] - x) / h;
    const double t2 = (x - knots[seg]) / h;
    out.push_back(t1 * values[seg] + t2 * values[seg + 1] +
                  ((t1 * t1 * t1 - t1) * m[seg] +
                   (t2 * t2 * t2 - t2) * m[seg + 1]) * h * h / 6.0);
  }
  return out;
}

std::vector<double> uniform_times(int resolution) {
  if (resolution < 2)
    throw std::invalid_argument("dense resolution must be >= 2");
  std::vector<double> t(resolution);
  for (int i = 0; i < resolution; ++i)
    t[i] = double(i) / double(resolution - 1);
  t.back() = 1.0;
  return t;
}

TimeSeries square_values(const TimeSeries& ts) {
  TimeSeries out = ts;
  for (double& v : out.values) v *= v;
  return out;
}

}  // namespace

std::string to_string(Setting s) {
  switch (s) {
    case Setting::well_specified: return "well_specified";
    case Setting::ill_specified: return "ill_specified";
    case Setting::ou: return "ou";
    case Setting::tumor: return "tumor";
  }
  return "unknown";
}

Setting setting_from_string(const std::string& name) {
  if (name == "well_specified") return Setting::well_specified;
  if (name == "ill_specified") return Setting::ill_specified;
  if (name == "ou") return Setting::ou;
  if (name == "tumor") return Setting::tumor;
  throw std::invalid_argument("unknown setting: " + name);
}

TimeSeries gen_smooth_driver(int dims, int anchors,
                             const std::vector<double>& dense_times,
                             std::mt19937_64& rng) {
  if (dims < 1 || anchors < 2)
    throw std::invalid_argument("gen_smooth_driver: bad dims/anchors");
  std::vector<double> anchor_times(anchors);
  for (int i = 0; i < anchors; ++i)
    anchor_times[i] = double(i) / double(anchors - 1);
  std::normal_distribution<double> gauss(0.0, 1.0);

  TimeSeries out;
  out.grid.times = dense_times;
  out.channels = dims;
  out.values.assign(dense_times.size() * dims, 0.0);
  for (int c = 0; c < dims; ++c) {
    std::vector<double> anchor_values(anchors);
    for (double& v : anchor_values) v = gauss(rng);
    const auto dense =
        natural_cubic_spline(anchor_times, anchor_values, dense_times);
    for (std::size_t r = 0; r < dense_times.size(); ++r)
      out.values[r * dims + c] = dense[r];
  }
  return out;
}

TimeSeries solve_cde(const TimeSeries& driver, const Eigen::MatrixXd& A,
                     const Eigen::VectorXd& y0, int substeps, CdeField field) {
  const int d = driver.channels;
  const int p = static_cast<int>(y0.size());
  if (A.rows() != p * d || A.cols() != p)
    throw std::invalid_argument("solve_cde: A must be (p*d) x p");
  if (substeps < 1) throw std::invalid_argument("solve_cde: substeps < 1");

  TimeSeries out;
  out.grid = driver.grid;
  out.channels = p;
  out.values.assign(driver.rows() * p, 0.0);

  Eigen::VectorXd y = y0;
  for (int c = 0; c < p; ++c) out.values[c] = y[c];
  Eigen::VectorXd dx(d), z(p * d);
  for (std::size_t j = 0; j + 1 < driver.rows(); ++j) {
    for (int c = 0; c < d; ++c)
      dx[c] = (driver.value(j + 1, c) - driver.value(j, c)) / substeps;
    for (int s = 0; s < substeps; ++s) {
      z.noalias() = A * y;
      if (field == CdeField::tanh_linear) z = z.array().tanh();
      // z holds F(y) flattened row-major (p x d).
      for (int i = 0; i < p; ++i) {
        double dy = 0.0;
        for (int c = 0; c < d; ++c) dy += z[i * d + c] * dx[c];
        y[i] += dy;
      }
    }
    if (!y.allFinite())
      throw std::runtime_error("solve_cde: non-finite state at step " +
                               std::to_string(j));
    for (int c = 0; c < p; ++c) out.values[(j + 1) * p + c] = y[c];
  }
  return out;
}

TimeSeries gen_brownian(double sigma2, const std::vector<double>& dense_times,
                        std::mt19937_64& rng) {
  if (sigma2 < 0.0) throw std::invalid_argument("gen_brownian: sigma2 < 0");
  std::normal_distribution<double> gauss(0.0, 1.0);
  TimeSeries out;
  out.grid.times = dense_times;
  out.channels = 1;
  out.values.assign(dense_times.size(), 0.0);
  for (std::size_t j = 1; j < dense_times.size(); ++j) {
    const double dt = dense_times[j] - dense_times[j - 1];
    const double inc =
        sigma2 > 0.0 ? std::sqrt(sigma2 * dt) * gauss(rng) : 0.0;
    out.values[j] = out.values[j - 1] + inc;
  }
  return out;
}

TimeSeries solve_ou(const TimeSeries& driver, double theta, double mu,
                    double y0) {
  if (driver.channels != 1)
    throw std::invalid_argument("solve_ou: driver must be 1-dimensional");
  TimeSeries out;
  out.grid = driver.grid;
  out.channels = 1;
  out.values.assign(driver.rows(), 0.0);
  double y = y0;
  out.values[0] = y;
  for (std::size_t j = 0; j + 1 < driver.rows(); ++j) {
    const double dt = driver.grid.times[j + 1] - driver.grid.times[j];
    const double dx = driver.value(j + 1, 0) - driver.value(j, 0);
    y += theta * (mu - y) * dt + dx;
    out.values[j + 1] = y;
  }
  return out;
}

TimeSeries solve_tumor(const TimeSeries& driver, const TumorParams& prm) {
  if (driver.channels != 1)
    throw std::invalid_argument("solve_tumor: driver must be 1-dimensional");
  const auto& times = driver.grid.times;
  const std::size_t R = times.size();

  auto concentration = [&](std::size_t seg, double t) {
    const double t0 = times[seg], t1 = times[seg + 1];
    const double w = (t - t0) / (t1 - t0);
    return (1.0 - w) * driver.value(seg, 0) + w * driver.value(seg + 1, 0);
  };
  auto deriv = [&](double x, const std::array<double, 4>& u,
                   std::array<double, 4>& du) {
    const double y = u[0] + u[1] + u[2] + u[3];
    const double growth = std::pow(
        prm.lambda0 * u[0] *
            (1.0 + std::pow(prm.lambda0 / prm.lambda1 * y, prm.psi)),
        -1.0 / prm.psi);
    du[0] = growth - prm.k2 * x * u[0];
    du[1] = prm.k2 * x * u[0] - prm.k1 * u[1];
    du[2] = prm.k1 * (u[1] - u[2]);
    du[3] = prm.k1 * (u[2] - u[3]);
  };

  TimeSeries out;
  out.grid = driver.grid;
  out.channels = 1;
  out.values.assign(R, 0.0);
  std::array<double, 4> u = prm.u0;
  out.values[0] = u[0] + u[1] + u[2] + u[3];
  constexpr double kNegTol = 1e-8;
  for (std::size_t j = 0; j + 1 < R; ++j) {
    const double h = times[j + 1] - times[j];
    const double x0 = concentration(j, times[j]);
    const double xm = concentration(j, times[j] + 0.5 * h);
    const double x1 = concentration(j, times[j + 1]);
    std::array<double, 4> k1, k2, k3, k4, tmp;
    deriv(x0, u, k1);
    for (int i = 0; i < 4; ++i) tmp[i] = u[i] + 0.5 * h * k1[i];
    deriv(xm, tmp, k2);
    for (int i = 0; i < 4; ++i) tmp[i] = u[i] + 0.5 * h * k2[i];
    deriv(xm, tmp, k3);
    for (int i = 0; i < 4; ++i) tmp[i] = u[i] + h * k3[i];
    deriv(x1, tmp, k4);
    double y = 0.0;
    for (int i = 0; i < 4; ++i) {
      u[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      if (!std::isfinite(u[i]))
        throw std::runtime_error("solve_tumor: state blow-up at step " +
                                 std::to_string(j));
      if (u[i] < -kNegTol)
        throw std::runtime_error("solve_tumor: compartment " +
                                 std::to_string(i + 1) +
                                 " negative at step " + std::to_string(j));
      y += u[i];
    }
    out.values[j + 1] = y;
  }
  return out;
}

TimeSeries gen_ill_specified(const TimeSeries& driver, int lags,
                             int* skipped) {
  if (lags < 1) throw std::invalid_argument("gen_ill_specified: lags < 1");
  const auto R = driver.rows();
  if (static_cast<std::size_t>(lags) >= R)
    throw std::invalid_argument("gen_ill_specified: lags exceed grid length");
  const int d = driver.channels;
  TimeSeries out;
  out.channels = 1;
  int skip = 0;
  for (std::size_t j = lags; j < R; ++j) {
    double norm2 = 0.0;
    for (int c = 0; c < d; ++c) {
      double acc = 0.0;
      for (int h = 1; h <= lags; ++h) acc += driver.value(j - h, c);
      norm2 += acc * acc;
    }
    if (norm2 <= 0.0) {
      ++skip;
      continue;
    }
    out.grid.times.push_back(driver.grid.times[j]);
    out.values.push_back(0.5 * std::log(norm2));
  }
  if (skipped) *skipped = skip;
  if (out.grid.times.empty())
    throw std::runtime_error("gen_ill_specified: empty target");
  return out;
}

TimeSeries add_noise(const TimeSeries& ts, double variance,
                     std::uint64_t seed) {
  if (variance < 0.0) throw std::invalid_argument("add_noise: variance < 0");
  if (variance == 0.0) return ts;
  TimeSeries out = ts;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, std::sqrt(variance));
  for (double& v : out.values) v += gauss(rng);
  return out;
}

IndividualRecord random_downsample(const TimeSeries& dense_features,
                                   const TimeSeries& dense_targets,
                                   int feature_samples, int target_samples,
                                   std::mt19937_64& rng) {
  const auto R = dense_features.rows();
  if (feature_samples < 2 || target_samples < 1 ||
      target_samples > feature_samples)
    throw std::invalid_argument("random_downsample: infeasible ranges");

  std::set<std::size_t> picked{0};
  std::uniform_int_distribution<std::size_t> draw(0, R - 1);
  for (int i = 0; i < feature_samples - 1; ++i) picked.insert(draw(rng));
  std::vector<std::size_t> feature_idx(picked.begin(), picked.end());
  if (feature_idx.size() < 2)
    throw std::invalid_argument("random_downsample: degenerate feature grid");

  IndividualRecord rec;
  rec.features.channels = dense_features.channels;
  for (std::size_t idx : feature_idx) {
    rec.features.grid.times.push_back(dense_features.grid.times[idx]);
    for (int c = 0; c < dense_features.channels; ++c)
      rec.features.values.push_back(dense_features.value(idx, c));
  }

  // Target candidates: feature times where the dense target is defined,
  // excluding 0 (a measurement at 0 would give a degenerate prefix).
  const auto& target_grid = dense_targets.grid.times;
  auto target_row = [&](double t) -> std::ptrdiff_t {
    auto it = std::lower_bound(target_grid.begin(), target_grid.end(), t);
    if (it == target_grid.end() || *it != t) return -1;
    return it - target_grid.begin();
  };
  const double final_time = rec.features.grid.times.back();
  if (target_row(final_time) < 0)
    throw std::invalid_argument(
        "random_downsample: final feature time has no target value");
  std::vector<double> candidates;
  for (double t : rec.features.grid.times) {
    if (t == 0.0 || t == final_time) continue;
    if (target_row(t) >= 0) candidates.push_back(t);
  }
  if (static_cast<std::size_t>(target_samples - 1) > candidates.size())
    throw std::invalid_argument("random_downsample: infeasible ranges");
  std::shuffle(candidates.begin(), candidates.end(), rng);
  std::vector<double> target_times(candidates.begin(),
                                   candidates.begin() + (target_samples - 1));
  target_times.push_back(final_time);
  std::sort(target_times.begin(), target_times.end());

  rec.targets.channels = dense_targets.channels;
  for (double t : target_times) {
    rec.targets.grid.times.push_back(t);
    const auto row = target_row(t);
    for (int c = 0; c < dense_targets.channels; ++c)
      rec.targets.values.push_back(dense_targets.value(row, c));
  }
  return rec;
}

SimulationOutput generate(const SimulationConfig& config, int threads) {
  if (config.n < 1) throw std::invalid_argument("generate: n < 1");
  if (config.feature_samples_min < 2 ||
      config.feature_samples_max < config.feature_samples_min ||
      config.target_samples_min < 1 ||
      config.target_samples_max < config.target_samples_min)
    throw std::invalid_argument("generate: infeasible sample ranges");

  SimulationOutput out;
  out.dense_times = uniform_times(config.dense_resolution);

  // Dynamics shared across individuals.
  std::mt19937_64 shared_rng(derive_seed(config.seed, 0));
  Eigen::MatrixXd A;
  Eigen::VectorXd y0;
  if (config.setting == Setting::well_specified) {
    const int d = config.driver_dims, p = config.target_dims;
    A.resize(p * d, p);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (Eigen::Index i = 0; i < A.rows(); ++i)
      for (Eigen::Index j = 0; j < A.cols(); ++j) A(i, j) = gauss(shared_rng);
    y0 = Eigen::VectorXd::Constant(p, config.cde_y0);
  }

  out.samples.resize(config.n);
  std::vector<int> warnings(config.n, 0);
  parallel_for(config.n, threads, [&](std::size_t i) {
    const std::uint64_t seed_i = derive_seed(config.seed, i + 1);
    std::mt19937_64 driver_rng(derive_seed(seed_i, 1));
    std::mt19937_64 downsample_rng(derive_seed(seed_i, 2));

    GeneratedSample sample;
    switch (config.setting) {
      case Setting::well_specified: {
        sample.dense_features = gen_smooth_driver(
            config.driver_dims, config.spline_knots, out.dense_times,
            driver_rng);
        sample.dense_targets =
            solve_cde(sample.dense_features, A, y0, config.cde_substeps);
        break;
      }
      case Setting::ill_specified: {
        sample.dense_features = gen_smooth_driver(
            config.driver_dims, config.spline_knots, out.dense_times,
            driver_rng);
        int skipped = 0;
        sample.dense_targets =
            gen_ill_specified(sample.dense_features, config.ill_lags,
                              &skipped);
        warnings[i] += skipped;
        break;
      }
      case Setting::ou: {
        sample.dense_features =
            gen_brownian(config.ou.sigma2, out.dense_times, driver_rng);
        sample.dense_targets = solve_ou(sample.dense_features,
                                        config.ou.theta, config.ou.mu,
                                        config.ou.y0);
        break;
      }
      case Setting::tumor: {
        sample.dense_features = square_values(
            gen_smooth_driver(1, config.spline_knots, out.dense_times,
                              driver_rng));
        sample.dense_targets =
            solve_tumor(sample.dense_features, config.tumor);
        break;
      }
    }

    IndividualRecord rec;
    if (config.downsample) {
      std::uniform_int_distribution<int> k_draw(config.feature_samples_min,
                                                config.feature_samples_max);
      std::uniform_int_distribution<int> m_draw(config.target_samples_min,
                                                config.target_samples_max);
      const int k = k_draw(downsample_rng);
      const int m = std::min(m_draw(downsample_rng), k);
      rec = random_downsample(sample.dense_features, sample.dense_targets, k,
                              m, downsample_rng);
    } else {
      rec.features = sample.dense_features;
      rec.targets.channels = sample.dense_targets.channels;
      const auto last = sample.dense_targets.rows() - 1;
      rec.targets.grid.times.push_back(sample.dense_targets.grid.times[last]);
      for (int c = 0; c < sample.dense_targets.channels; ++c)
        rec.targets.values.push_back(sample.dense_targets.value(last, c));
    }
    rec.id = "ind" + std::to_string(i);
    rec.features = add_noise(rec.features, config.noise_x,
                             derive_seed(seed_i, 3));
    rec.targets = add_noise(rec.targets, config.noise_y,
                            derive_seed(seed_i, 4));
    sample.record = std::move(rec);
    out.samples[i] = std::move(sample);
  });
  for (int w : warnings) out.warnings += w;
  return out;
}

}  // namespace siglasso
