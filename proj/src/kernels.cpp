#include "engage/kernels.hpp"

#include <cmath>

namespace engage::kernels {

double kernel_value(const Eigen::Ref<const Eigen::RowVectorXd>& a,
                    const Eigen::Ref<const Eigen::RowVectorXd>& b, KernelKind kind, double gamma) {
  if (kind == KernelKind::linear) return a.dot(b);
  return std::exp(-gamma * (a - b).squaredNorm());
}

Eigen::MatrixXd gram(const Eigen::MatrixXd& X, KernelKind kind, double gamma) {
  const Eigen::Index n = X.rows();
  Eigen::MatrixXd K(n, n);
#pragma omp parallel for schedule(dynamic, 8)
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      double v = kernel_value(X.row(i), X.row(j), kind, gamma);
      K(i, j) = v;
      K(j, i) = v;
    }
  }
  return K;
}

Eigen::MatrixXd cross(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, KernelKind kind, double gamma) {
  Eigen::MatrixXd K(A.rows(), B.rows());
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < B.rows(); ++j) K(i, j) = kernel_value(A.row(i), B.row(j), kind, gamma);
  return K;
}

namespace serial {

Eigen::MatrixXd gram(const Eigen::MatrixXd& X, KernelKind kind, double gamma) {
  const Eigen::Index n = X.rows();
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) K(i, j) = kernel_value(X.row(i), X.row(j), kind, gamma);
  return K;
}

Eigen::MatrixXd cross(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, KernelKind kind, double gamma) {
  Eigen::MatrixXd K(A.rows(), B.rows());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < B.rows(); ++j) K(i, j) = kernel_value(A.row(i), B.row(j), kind, gamma);
  return K;
}

}  // namespace serial

}  // namespace engage::kernels
