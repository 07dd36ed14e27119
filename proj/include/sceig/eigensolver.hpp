#pragma once

#include <optional>

#include <Eigen/Dense>

namespace sceig {

struct SolverOptions {
  /// Relative backward-error tolerance for every returned pair.
  double residual_tol = 1e-10;
};

/// Ascending eigenvalues (repeated by multiplicity) and M-orthonormal
/// eigenvectors stored as columns.
struct SpectralDecomposition {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
  double max_residual = 0.0;

  Eigen::Index count() const { return values.size(); }
};

/// Solves K x = mu M x for the `k` smallest pairs (all pairs when empty).
///
/// Cholesky-reduces the pencil to a standard symmetric problem, solves it by
/// tridiagonalization with implicit QR, and transforms back. Each eigenvector
/// is flipped so its largest-magnitude entry is positive.
SpectralDecomposition solve_gevp(const Eigen::MatrixXd& K, const Eigen::MatrixXd& M,
                                 std::optional<Eigen::Index> k = std::nullopt,
                                 const SolverOptions& options = {});

/// Modified Gram-Schmidt in the M inner product, in column order, with one
/// reorthogonalization sweep. Throws a rank error naming the first column
/// whose remaining norm drops below `rank_tol` times its original norm.
Eigen::MatrixXd m_orthonormalize(const Eigen::MatrixXd& vectors, const Eigen::MatrixXd& M,
                                 double rank_tol = 1e-10);

}  // namespace sceig
