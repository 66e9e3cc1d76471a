#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

#include <Eigen/Dense>

namespace survcomp {

struct PseudoInverse {
  Eigen::MatrixXd matrix;
  std::size_t rank = 0;
};

/// Moore-Penrose inverse. Singular values below rel_tol * (largest singular
/// value) count as zero; `rank` is the resulting numerical rank.
inline PseudoInverse pseudo_inverse(const Eigen::MatrixXd& a, double rel_tol = 1e-10) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double cutoff = sv.size() > 0 ? rel_tol * sv.maxCoeff() : 0.0;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
  PseudoInverse out;
  for (Eigen::Index k = 0; k < sv.size(); ++k) {
    if (sv(k) > cutoff && sv(k) > 0.0) {
      inv(k) = 1.0 / sv(k);
      ++out.rank;
    }
  }
  out.matrix = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
  return out;
}

struct CorrelationFactor {
  Eigen::MatrixXd factor;  // L with L L^T = projected correlation
  double min_eigenvalue = 0.0;
  bool projected = false;
};

/// Square-root factor of a correlation matrix. Eigenvalues below
/// -tol * ||R|| mark the matrix as not PSD; all negative eigenvalues are
/// clipped to zero and the rows rescaled back to a unit diagonal.
inline CorrelationFactor correlation_factor(const Eigen::MatrixXd& r, double tol = 1e-8) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(r);
  Eigen::VectorXd lambda = eig.eigenvalues();
  CorrelationFactor out;
  out.min_eigenvalue = lambda.size() > 0 ? lambda.minCoeff() : 0.0;
  const double scale = std::max(1.0, lambda.cwiseAbs().maxCoeff());
  out.projected = out.min_eigenvalue < -tol * scale;
  lambda = lambda.cwiseMax(0.0);
  out.factor = eig.eigenvectors() * lambda.cwiseSqrt().asDiagonal();
  for (Eigen::Index i = 0; i < out.factor.rows(); ++i) {
    const double norm = out.factor.row(i).norm();
    if (norm > 0.0) out.factor.row(i) /= norm;
  }
  return out;
}

}  // namespace survcomp
