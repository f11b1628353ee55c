#include "siglasso/regression.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "siglasso/util.hpp"

namespace siglasso {

namespace {

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

// Standardized view of the penalized part of a design used by the
// coordinate-descent core. Columns with zero variance are frozen at zero.
struct Standardized {
  Eigen::MatrixXd Z;            // M x (J-1), centered, unit variance
  Eigen::VectorXd mean, scale;  // per penalized column
  std::vector<bool> active;
};

Standardized standardize(const Eigen::MatrixXd& X) {
  const auto M = X.rows();
  const auto J = X.cols() - 1;  // penalized columns only
  Standardized s;
  s.Z.resize(M, J);
  s.mean.resize(J);
  s.scale.resize(J);
  s.active.assign(J, true);
  for (Eigen::Index j = 0; j < J; ++j) {
    const auto col = X.col(j + 1);
    const double m = col.mean();
    const double var = (col.array() - m).square().sum() / M;
    s.mean[j] = m;
    if (var <= 0.0) {
      s.scale[j] = 1.0;
      s.active[j] = false;
      s.Z.col(j).setZero();
    } else {
      s.scale[j] = std::sqrt(var);
      s.Z.col(j) = (col.array() - m) / s.scale[j];
    }
  }
  return s;
}

// Cyclic coordinate descent for
//   min_beta (1/2M)||y_c - Z beta||^2 + sum_j gamma_j |beta_j|
// with unit-variance columns (Z_j' Z_j = M). Returns sweeps used.
int lasso_cd(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y_centered,
             const Eigen::VectorXd& gamma, const std::vector<bool>& active,
             double tol, int max_iter, Eigen::VectorXd& beta,
             bool& converged) {
  const auto M = Z.rows();
  const auto J = Z.cols();
  Eigen::VectorXd residual = y_centered - Z * beta;
  int sweep = 0;
  converged = false;
  for (; sweep < max_iter; ++sweep) {
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < J; ++j) {
      if (!active[j]) continue;
      const double rho = Z.col(j).dot(residual) / M + beta[j];
      const double updated = soft_threshold(rho, gamma[j]);
      const double change = updated - beta[j];
      if (change != 0.0) {
        residual.noalias() -= Z.col(j) * change;
        beta[j] = updated;
      }
      max_change = std::max(max_change, std::abs(change));
    }
    if (max_change < tol) {
      converged = true;
      ++sweep;
      break;
    }
  }
  return sweep;
}

// KKT residual of the original-coordinate objective at the solution:
// active coordinates need |gradient| == C, inactive ones |gradient| <= C.
double kkt_violation(const Eigen::MatrixXd& Z, const Eigen::VectorXd& residual,
                     const Eigen::VectorXd& scale,
                     const std::vector<bool>& active,
                     const Eigen::VectorXd& beta, double C) {
  const auto M = Z.rows();
  double worst = 0.0;
  for (Eigen::Index j = 0; j < Z.cols(); ++j) {
    if (!active[j]) continue;
    const double grad = scale[j] * (Z.col(j).dot(residual) / M);
    if (beta[j] != 0.0)
      worst = std::max(worst, std::abs(std::abs(grad) - C));
    else
      worst = std::max(worst, std::abs(grad) - C);
  }
  return worst;
}

}  // namespace

std::int64_t DesignMatrix::layer_start(int k) const {
  std::int64_t off = 0, power = 1;
  for (int i = 0; i < k; ++i) {
    off += power;
    power *= channels;
  }
  return off;
}

std::int64_t DesignMatrix::layer_size(int k) const {
  std::int64_t power = 1;
  for (int i = 0; i < k; ++i) power *= channels;
  return power;
}

int DesignMatrix::layer_of_column(std::int64_t j) const {
  std::int64_t off = 0, power = 1;
  for (int k = 0; k <= depth; ++k) {
    off += power;
    if (j < off) return k;
    power *= channels;
  }
  throw std::out_of_range("layer_of_column: column outside design");
}

PenaltyWeights layer_weights(int depth) {
  if (depth < 0) throw std::invalid_argument("layer_weights: depth < 0");
  PenaltyWeights w;
  w.lambda.resize(depth + 1);
  w.lambda[0] = 0.0;
  for (int k = 1; k <= depth; ++k) w.lambda[k] = std::sqrt(double(k)) / factorial(k);
  return w;
}

double theoretical_penalty_constant(int k, int depth, int channels,
                                    int responses, double v_eps,
                                    double delta_bar, std::int64_t rows) {
  if (k < 0 || depth < 1 || channels < 1 || responses < 1 || rows < 1 ||
      v_eps < 0.0 || delta_bar <= 0.0 || delta_bar >= 1.0 + 1e-12)
    throw std::invalid_argument("theoretical_penalty_constant: bad arguments");
  const double arg =
      2.0 * responses * depth * std::pow(double(channels), k) / delta_bar;
  if (std::log(arg) < 0.0)
    throw std::domain_error("theoretical_penalty_constant: log argument < 1");
  return std::sqrt(v_eps * std::log(arg)) /
         (factorial(k) * std::sqrt(double(rows)));
}

DesignMatrix rescale_design(const DesignMatrix& design,
                            const PenaltyWeights& w) {
  if (static_cast<int>(w.lambda.size()) != design.depth + 1)
    throw std::invalid_argument("rescale_design: weight/depth mismatch");
  DesignMatrix out = design;
  for (int k = 1; k <= design.depth; ++k) {
    const auto start = design.layer_start(k);
    const auto size = design.layer_size(k);
    out.values.middleCols(start, size) *= w.lambda[k];
  }
  return out;
}

PenaltyWeights inverse_weights(const PenaltyWeights& w) {
  PenaltyWeights inv = w;
  for (std::size_t k = 1; k < inv.lambda.size(); ++k) {
    if (inv.lambda[k] <= 0.0)
      throw std::invalid_argument("inverse_weights: nonpositive weight");
    inv.lambda[k] = 1.0 / inv.lambda[k];
  }
  return inv;
}

double LassoFit::predict_row(const Eigen::VectorXd& sig_row,
                             int response) const {
  return intercept[response] + sig_row.dot(theta.col(response));
}

LassoFit fit_lasso(const DesignMatrix& design, const Eigen::MatrixXd& Y,
                   double C, const LassoOptions& opts) {
  return fit_lasso_path(design, Y, {C}, opts).front();
}

std::vector<LassoFit> fit_lasso_path(const DesignMatrix& design,
                                     const Eigen::MatrixXd& Y,
                                     const std::vector<double>& penalties,
                                     const LassoOptions& opts) {
  const Eigen::MatrixXd& X = design.values;
  const auto M = X.rows();
  const auto p = Y.cols();
  if (M < 1) throw std::invalid_argument("fit_lasso: empty design");
  if (Y.rows() != M) throw std::invalid_argument("fit_lasso: row mismatch");
  if (!X.allFinite() || !Y.allFinite())
    throw std::invalid_argument("fit_lasso: non-finite data");
  if ((X.col(0).array() != 1.0).any())
    throw std::invalid_argument("fit_lasso: column 0 must be constant 1");
  for (double C : penalties) {
    if (C < 0.0 || !std::isfinite(C))
      throw std::invalid_argument("fit_lasso: penalty must be >= 0");
  }

  const Standardized s = standardize(X);
  const auto J = s.Z.cols();

  std::vector<LassoFit> fits(penalties.size());
  for (auto& f : fits) {
    f.theta = Eigen::MatrixXd::Zero(X.cols(), p);
    f.intercept = Eigen::VectorXd::Zero(p);
  }

  for (Eigen::Index ell = 0; ell < p; ++ell) {
    const double y_mean = Y.col(ell).mean();
    const Eigen::VectorXd y_c = Y.col(ell).array() - y_mean;
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(J);  // warm start carrier
    for (std::size_t ci = 0; ci < penalties.size(); ++ci) {
      const double C = penalties[ci];
      // Per-coordinate thresholds C / scale_j make the standardized solve
      // exactly equivalent to penalizing the original coefficients at C.
      Eigen::VectorXd gamma(J);
      for (Eigen::Index j = 0; j < J; ++j) gamma[j] = C / s.scale[j];
      bool converged = false;
      const int used = lasso_cd(s.Z, y_c, gamma, s.active, opts.tol,
                                opts.max_iter, beta, converged);
      LassoFit& fit = fits[ci];
      fit.penalty = C;
      fit.sweeps += used;
      fit.converged = fit.converged && converged;
      double offset = y_mean;
      for (Eigen::Index j = 0; j < J; ++j) {
        const double theta_j = s.active[j] ? beta[j] / s.scale[j] : 0.0;
        fit.theta(j + 1, ell) = theta_j;
        offset -= theta_j * s.mean[j];
      }
      fit.intercept[ell] = offset;
      const Eigen::VectorXd residual = y_c - s.Z * beta;
      fit.max_kkt_violation =
          std::max(fit.max_kkt_violation,
                   kkt_violation(s.Z, residual, s.scale, s.active, beta, C));
    }
  }
  return fits;
}

std::vector<double> lambda_path(const DesignMatrix& design,
                                const Eigen::MatrixXd& Y, int n_lambdas,
                                double ratio) {
  if (n_lambdas < 2) throw std::invalid_argument("lambda_path: n_lambdas < 2");
  if (ratio <= 0.0 || ratio >= 1.0)
    throw std::invalid_argument("lambda_path: ratio outside (0,1)");
  const Eigen::MatrixXd& X = design.values;
  const auto M = X.rows();
  double c_max = 0.0;
  for (Eigen::Index ell = 0; ell < Y.cols(); ++ell) {
    const Eigen::VectorXd y_c = Y.col(ell).array() - Y.col(ell).mean();
    for (Eigen::Index j = 1; j < X.cols(); ++j) {
      c_max = std::max(c_max, std::abs(X.col(j).dot(y_c)) / M);
    }
  }
  if (c_max <= 0.0) return {0.0};
  // Cushion against rounding in the standardized solver so the top of the
  // grid reproduces the all-zero fit exactly.
  c_max *= 1.0 + 1e-12;
  std::vector<double> grid(n_lambdas);
  const double log_max = std::log(c_max);
  const double log_min = std::log(c_max * ratio);
  for (int i = 0; i < n_lambdas; ++i) {
    const double f = double(i) / (n_lambdas - 1);
    grid[i] = std::exp(log_max + f * (log_min - log_max));
  }
  grid.front() = c_max;  // exact endpoints
  grid.back() = c_max * ratio;
  return grid;
}

CrossValidationResult cross_validate(const DesignMatrix& design,
                                     const Eigen::MatrixXd& Y, int folds,
                                     const std::vector<double>& penalties,
                                     std::uint64_t seed,
                                     const LassoOptions& opts, int threads) {
  const auto M = design.rows();
  if (folds < 2) throw std::invalid_argument("cross_validate: folds < 2");
  if (M < folds)
    throw std::invalid_argument("cross_validate: fewer rows than folds");
  if (penalties.empty())
    throw std::invalid_argument("cross_validate: empty penalty grid");

  std::vector<Eigen::Index> order(M);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  // Round-robin assignment over the shuffled order keeps fold sizes within
  // one row of each other.
  std::vector<std::vector<Eigen::Index>> fold_rows(folds);
  for (Eigen::Index i = 0; i < M; ++i)
    fold_rows[i % folds].push_back(order[i]);

  std::vector<Eigen::VectorXd> fold_sse(
      folds, Eigen::VectorXd::Zero(penalties.size()));
  parallel_for(folds, threads, [&](std::size_t f) {
    const auto& held = fold_rows[f];
    std::vector<bool> is_held(M, false);
    for (auto r : held) is_held[r] = true;
    DesignMatrix train;
    train.channels = design.channels;
    train.depth = design.depth;
    train.values.resize(M - held.size(), design.cols());
    Eigen::MatrixXd train_y(M - held.size(), Y.cols());
    Eigen::Index ti = 0;
    for (Eigen::Index r = 0; r < M; ++r) {
      if (is_held[r]) continue;
      train.values.row(ti) = design.values.row(r);
      train_y.row(ti) = Y.row(r);
      ++ti;
    }
    const auto fits = fit_lasso_path(train, train_y, penalties, opts);
    for (std::size_t ci = 0; ci < penalties.size(); ++ci) {
      double sse = 0.0;
      for (auto r : held) {
        const Eigen::VectorXd pred =
            fits[ci].theta.transpose() * design.values.row(r).transpose() +
            fits[ci].intercept;
        sse += (Y.row(r).transpose() - pred).squaredNorm();
      }
      fold_sse[f][ci] = sse;
    }
  });

  CrossValidationResult result;
  result.penalties = penalties;
  result.cv_errors.assign(penalties.size(), 0.0);
  for (int f = 0; f < folds; ++f)
    for (std::size_t ci = 0; ci < penalties.size(); ++ci)
      result.cv_errors[ci] += fold_sse[f][ci];
  const double total_entries = double(M) * Y.cols();
  for (auto& e : result.cv_errors) e /= total_entries;

  // Penalties are decreasing, so keeping the first strict improvement
  // breaks ties toward the larger penalty.
  std::size_t best = 0;
  for (std::size_t ci = 1; ci < penalties.size(); ++ci)
    if (result.cv_errors[ci] < result.cv_errors[best]) best = ci;
  result.chosen_index = best;
  result.chosen_penalty = penalties[best];
  return result;
}

double weighted_objective(const DesignMatrix& design, const Eigen::MatrixXd& Y,
                          const Eigen::MatrixXd& theta,
                          const Eigen::VectorXd& intercept, double C,
                          const PenaltyWeights& w) {
  const auto M = design.rows();
  Eigen::MatrixXd residual = Y - design.values * theta;
  residual.rowwise() -= intercept.transpose();
  double obj = residual.squaredNorm() / (2.0 * M);
  for (int k = 1; k <= design.depth; ++k) {
    const auto start = design.layer_start(k);
    const auto size = design.layer_size(k);
    obj += C * w.lambda[k] *
           theta.middleRows(start, size).array().abs().sum();
  }
  return obj;
}

}  // namespace siglasso
