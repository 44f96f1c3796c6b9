#include "engage/svr.hpp"

#include <algorithm>
#include <cmath>

#include "engage/error.hpp"

namespace engage {

namespace {

double insensitive_loss(const Eigen::VectorXd& residual, double epsilon) {
  return (residual.array().abs() - epsilon).max(0.0).mean();
}

Eigen::VectorXd loss_signs(const Eigen::VectorXd& residual, double epsilon) {
  Eigen::VectorXd s(residual.size());
  for (Eigen::Index i = 0; i < residual.size(); ++i)
    s[i] = residual[i] > epsilon ? 1.0 : (residual[i] < -epsilon ? -1.0 : 0.0);
  return s;
}

double median_of(const Eigen::VectorXd& y) {
  std::vector<double> v(y.data(), y.data() + y.size());
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void check(const SvrOptions& o, Eigen::Index n, Eigen::Index ny) {
  if (!(o.C > 0.0)) throw ValidationError("SVR needs C > 0");
  if (!(o.epsilon >= 0.0)) throw ValidationError("SVR needs epsilon >= 0");
  if (o.max_epochs < 1) throw ValidationError("SVR needs max_epochs >= 1");
  if (n != ny || n < 1) throw ValidationError("SVR: X and y disagree or are empty");
}

// Subgradient steps are not descent steps, so the solver keeps the best averaged iterate
// seen so far; the trace holds its objective and is therefore non-increasing. It stops once
// that best value has improved by less than the tolerance over the last kWindow epochs.
constexpr int kMinEpochs = 50;
constexpr std::size_t kWindow = 10;

bool done(const std::vector<double>& trace, double tolerance) {
  const std::size_t t = trace.size();
  if (t < kMinEpochs || t <= kWindow) return false;
  return trace[t - 1 - kWindow] - trace[t - 1] < tolerance;
}

/// Appends the objective of the best iterate so far; true when `value` is a new best.
bool record(std::vector<double>& trace, double value) {
  if (trace.empty() || value < trace.back()) {
    trace.push_back(value);
    return true;
  }
  trace.push_back(trace.back());
  return false;
}

}  // namespace

double svr_linear_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                            double b, double C, double epsilon) {
  Eigen::VectorXd r = y - X * w - Eigen::VectorXd::Constant(y.size(), b);
  return 0.5 * w.squaredNorm() + C * insensitive_loss(r, epsilon);
}

SvrFit fit_linear_svr(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const SvrOptions& o) {
  check(o, X.rows(), y.size());
  const double n = static_cast<double>(X.rows());
  const double scale = o.step_scale > 0.0 ? o.step_scale : 1.0 / (1.0 + o.C);

  Eigen::VectorXd w = Eigen::VectorXd::Zero(X.cols());
  double b = median_of(y);
  Eigen::VectorXd w_avg = w;
  double b_avg = b;
  Eigen::VectorXd w_best = w;
  double b_best = b;

  SvrFit fit;
  for (int t = 1; t <= o.max_epochs; ++t) {
    Eigen::VectorXd r = y - X * w - Eigen::VectorXd::Constant(y.size(), b);
    Eigen::VectorXd s = loss_signs(r, o.epsilon);
    Eigen::VectorXd gw = w - (o.C / n) * (X.transpose() * s);
    double gb = -(o.C / n) * s.sum();
    const double eta = scale / std::sqrt(static_cast<double>(t));
    w -= eta * gw;
    b -= eta * gb;
    // Weighted averaging, weight proportional to t.
    const double rho = 2.0 / (static_cast<double>(t) + 1.0);
    w_avg = (1.0 - rho) * w_avg + rho * w;
    b_avg = (1.0 - rho) * b_avg + rho * b;
    if (record(fit.objective_trace, svr_linear_objective(X, y, w_avg, b_avg, o.C, o.epsilon))) {
      w_best = w_avg;
      b_best = b_avg;
    }
    fit.epochs = t;
    if (done(fit.objective_trace, o.tolerance)) {
      fit.converged = true;
      break;
    }
  }
  fit.coef = w_best;
  fit.bias = b_best;
  return fit;
}

SvrFit fit_kernel_svr(const Eigen::MatrixXd& K, const Eigen::VectorXd& y, const SvrOptions& o) {
  check(o, K.rows(), y.size());
  if (K.rows() != K.cols()) throw ValidationError("kernel SVR needs a square Gram matrix");
  const double n = static_cast<double>(K.rows());
  const double scale = o.step_scale > 0.0 ? o.step_scale : 1.0 / (1.0 + o.C);

  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(K.rows());
  Eigen::VectorXd Kalpha = alpha;
  double b = median_of(y);
  Eigen::VectorXd alpha_avg = alpha, Kalpha_avg = Kalpha;
  double b_avg = b;
  Eigen::VectorXd alpha_best = alpha;
  double b_best = b;

  auto objective = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& Ka, double bias) {
    Eigen::VectorXd r = y - Ka - Eigen::VectorXd::Constant(y.size(), bias);
    return 0.5 * a.dot(Ka) + o.C * insensitive_loss(r, o.epsilon);
  };

  SvrFit fit;
  for (int t = 1; t <= o.max_epochs; ++t) {
    Eigen::VectorXd r = y - Kalpha - Eigen::VectorXd::Constant(y.size(), b);
    Eigen::VectorXd s = loss_signs(r, o.epsilon);
    const double eta = scale / std::sqrt(static_cast<double>(t));
    Eigen::VectorXd g = alpha - (o.C / n) * s;
    alpha -= eta * g;
    Kalpha = K * alpha;
    b += eta * (o.C / n) * s.sum();
    const double rho = 2.0 / (static_cast<double>(t) + 1.0);
    alpha_avg = (1.0 - rho) * alpha_avg + rho * alpha;
    Kalpha_avg = (1.0 - rho) * Kalpha_avg + rho * Kalpha;
    b_avg = (1.0 - rho) * b_avg + rho * b;
    if (record(fit.objective_trace, objective(alpha_avg, Kalpha_avg, b_avg))) {
      alpha_best = alpha_avg;
      b_best = b_avg;
    }
    fit.epochs = t;
    if (done(fit.objective_trace, o.tolerance)) {
      fit.converged = true;
      break;
    }
  }
  fit.coef = alpha_best;
  fit.bias = b_best;
  return fit;
}

}  // namespace engage
