#pragma once

#include <vector>

#include <Eigen/Dense>

namespace engage {

/// Options for the averaged subgradient solver used by both SVR variants.
/// The objective is  (1/2)||w||² + C · mean_i max(0, |y_i - f(x_i)| - epsilon).
struct SvrOptions {
  double C = 1.0;
  double epsilon = 0.1;
  int max_epochs = 10000;
  double tolerance = 1e-8;
  /// Step schedule eta_t = step_scale / sqrt(t); 0 picks 1 / (1 + C).
  double step_scale = 0.0;
};

struct SvrFit {
  Eigen::VectorXd coef;  // best averaged iterate: primal weights, or dual-form alpha for the kernel variant
  double bias = 0.0;
  /// Objective of the best averaged iterate so far, after each epoch (non-increasing).
  std::vector<double> objective_trace;
  int epochs = 0;
  bool converged = false;
};

double svr_linear_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                            double b, double C, double epsilon);

/// Primal linear SVR, f(x) = w·x + b.
SvrFit fit_linear_svr(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const SvrOptions& options);

/// Representer-form SVR f(x) = sum_i alpha_i k(x_i, x) + b on a precomputed Gram matrix,
/// with the (1/2) alpha' K alpha penalty. Steps follow the RKHS subgradient.
SvrFit fit_kernel_svr(const Eigen::MatrixXd& K, const Eigen::VectorXd& y, const SvrOptions& options);

}  // namespace engage
