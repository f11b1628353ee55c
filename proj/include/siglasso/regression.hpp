#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace siglasso {

// Stacked signature rows, one per (individual, target-measurement time)
// pair. Column 0 is the constant order-0 coefficient and doubles as the
// intercept; columns are grouped contiguously by signature layer.
struct DesignMatrix {
  Eigen::MatrixXd values;  // M x s_d(N)
  int channels = 0;        // d of the underlying paths
  int depth = 0;           // truncation order N

  std::int64_t cols() const { return values.cols(); }
  std::int64_t rows() const { return values.rows(); }
  std::int64_t layer_start(int k) const;
  std::int64_t layer_size(int k) const;
  int layer_of_column(std::int64_t j) const;
};

// Per-layer L1 penalty factors lambda_0..lambda_N.
struct PenaltyWeights {
  std::vector<double> lambda;
};

// The practical weights: lambda_k = sqrt(k)/k! for k >= 1, lambda_0 = 0
// (the order-0 column is handled as an unpenalized intercept).
PenaltyWeights layer_weights(int depth);

// The theoretical per-layer penalty C_k(delta_bar)/(k! sqrt(M)) with
// C_k = sqrt(v_eps * log(2 p N d^k / delta_bar)). Reporting only; fitting
// uses layer_weights plus a cross-validated global strength.
double theoretical_penalty_constant(int k, int depth, int channels,
                                    int responses, double v_eps,
                                    double delta_bar, std::int64_t rows);

// Multiplies the columns of layer k by w.lambda[k] for k >= 1; the
// intercept column is left untouched.
DesignMatrix rescale_design(const DesignMatrix& design,
                            const PenaltyWeights& w);

// Elementwise inverse weights (used for the change of variable; lambda_0 is
// carried through unchanged since the intercept column is never scaled).
PenaltyWeights inverse_weights(const PenaltyWeights& w);

inline double soft_threshold(double z, double gamma) {
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

struct LassoFit {
  Eigen::MatrixXd theta;      // s_d(N) x p, row 0 always zero
  Eigen::VectorXd intercept;  // length p
  double penalty = 0.0;
  int sweeps = 0;             // total coordinate-descent sweeps
  bool converged = true;
  double max_kkt_violation = 0.0;

  double predict_row(const Eigen::VectorXd& sig_row, int response) const;
};

struct LassoOptions {
  double tol = 1e-6;    // max coefficient change per sweep
  int max_iter = 10000; // sweeps
};

// Minimizes (1/2M)||Y - X theta - 1 b^T||_F^2 + C * sum_{j>=1} |theta_j|
// per response column by cyclic coordinate descent with soft-threshold
// updates. Penalized columns are centered and scaled internally for
// conditioning; the thresholds are compensated so the stated objective is
// solved exactly in the original coordinates.
LassoFit fit_lasso(const DesignMatrix& design, const Eigen::MatrixXd& Y,
                   double C, const LassoOptions& opts = {});

// Warm-started fits along a decreasing penalty grid.
std::vector<LassoFit> fit_lasso_path(const DesignMatrix& design,
                                     const Eigen::MatrixXd& Y,
                                     const std::vector<double>& penalties,
                                     const LassoOptions& opts = {});

// Geometric grid of n_lambdas penalties from C_max (smallest C with an
// all-zero penalized solution) down to ratio * C_max. Degenerate targets
// with zero variance give the single-point grid {0}.
std::vector<double> lambda_path(const DesignMatrix& design,
                                const Eigen::MatrixXd& Y, int n_lambdas = 100,
                                double ratio = 1e-3);

struct CrossValidationResult {
  double chosen_penalty = 0.0;
  std::size_t chosen_index = 0;
  std::vector<double> penalties;
  std::vector<double> cv_errors;  // mean held-out squared error per penalty
};

// Seeded row-wise K-fold cross-validation of the penalty strength. Ties in
// the error curve resolve toward the larger penalty.
CrossValidationResult cross_validate(const DesignMatrix& design,
                                     const Eigen::MatrixXd& Y, int folds,
                                     const std::vector<double>& penalties,
                                     std::uint64_t seed,
                                     const LassoOptions& opts = {},
                                     int threads = 1);

// Objective value of the layer-weighted problem
// (1/2M)||Y - X theta - 1 b^T||_F^2 + C sum_k lambda_k ||theta_[k]||_1.
double weighted_objective(const DesignMatrix& design, const Eigen::MatrixXd& Y,
                          const Eigen::MatrixXd& theta,
                          const Eigen::VectorXd& intercept, double C,
                          const PenaltyWeights& w);

}  // namespace siglasso
