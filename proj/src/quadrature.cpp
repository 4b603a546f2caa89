#include "iterfac/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace iterfac {

namespace {
constexpr double kSqrtPi = 1.7724538509055159;

// Golub-Welsch: nodes are eigenvalues of the Jacobi matrix, weights are
// mu0 * (first eigenvector component)^2.
QuadratureRule golub_welsch(const Eigen::VectorXd& diag, const Eigen::VectorXd& offdiag,
                            double mu0) {
  const Eigen::Index n = diag.size();
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  jacobi.diagonal() = diag;
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    jacobi(i, i + 1) = offdiag[i];
    jacobi(i + 1, i) = offdiag[i];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("golub_welsch: eigen decomposition failed");
  QuadratureRule rule;
  rule.nodes = solver.eigenvalues();
  rule.weights = mu0 * solver.eigenvectors().row(0).transpose().array().square();
  return rule;
}
}  // namespace

QuadratureRule gauss_hermite(int n) {
  if (n < 1) throw std::invalid_argument("gauss_hermite: n must be >= 1");
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd offdiag(n - 1 > 0 ? n - 1 : 0);
  for (int i = 1; i < n; ++i) offdiag[i - 1] = std::sqrt(i / 2.0);
  return golub_welsch(diag, offdiag, kSqrtPi);
}

QuadratureRule gauss_laguerre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_laguerre: n must be >= 1");
  Eigen::VectorXd diag(n);
  Eigen::VectorXd offdiag(n - 1 > 0 ? n - 1 : 0);
  for (int i = 0; i < n; ++i) diag[i] = 2.0 * i + 1.0;
  for (int i = 1; i < n; ++i) offdiag[i - 1] = static_cast<double>(i);
  return golub_welsch(diag, offdiag, 1.0);
}

}  // namespace iterfac
