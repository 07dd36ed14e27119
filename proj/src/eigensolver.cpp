#include "sceig/eigensolver.hpp"

#include <cmath>
#include <string>

#include "sceig/error.hpp"

namespace sceig {

namespace {

void flip_to_largest_positive(Eigen::MatrixXd& vectors) {
  for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
    Eigen::Index arg = 0;
    vectors.col(j).cwiseAbs().maxCoeff(&arg);
    if (vectors(arg, j) < 0.0) vectors.col(j) *= -1.0;
  }
}

}  // namespace

SpectralDecomposition solve_gevp(const Eigen::MatrixXd& K, const Eigen::MatrixXd& M,
                                 std::optional<Eigen::Index> k,
                                 const SolverOptions& options) {
  const Eigen::Index n = K.rows();
  if (K.cols() != n || M.rows() != n || M.cols() != n) {
    throw Error(ErrorKind::Precondition, "pencil matrices must be square and of equal size");
  }
  const Eigen::Index count = k.value_or(n);
  if (count < 0 || count > n) {
    throw Error(ErrorKind::Precondition,
                "requested " + std::to_string(count) + " eigenpairs of a " +
                    std::to_string(n) + "-dimensional pencil");
  }
  SpectralDecomposition out;
  if (n == 0) return out;

  Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::Conditioning, "mass matrix is not positive definite");
  }
  // C = L^{-1} K L^{-T}
  Eigen::MatrixXd C = llt.matrixL().solve(K);
  C = llt.matrixL().solve(C.transpose()).eval();
  C = (0.5 * (C + C.transpose())).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorKind::IterationLimit, "symmetric QR iteration did not converge");
  }

  out.values = es.eigenvalues().head(count);
  out.vectors = llt.matrixU().solve(es.eigenvectors().leftCols(count));
  flip_to_largest_positive(out.vectors);

  const double k_norm = K.cwiseAbs().colwise().sum().maxCoeff();
  const double m_norm = M.cwiseAbs().colwise().sum().maxCoeff();
  for (Eigen::Index i = 0; i < count; ++i) {
    const auto x = out.vectors.col(i);
    const double res = (K * x - out.values(i) * (M * x)).norm();
    const double scale = (k_norm + std::abs(out.values(i)) * m_norm) * x.norm();
    const double rel = scale > 0.0 ? res / scale : res;
    out.max_residual = std::max(out.max_residual, rel);
    if (rel > options.residual_tol) {
      throw Error(ErrorKind::Residual, "eigenpair " + std::to_string(i + 1) +
                                           " has relative residual " + std::to_string(rel));
    }
  }
  return out;
}

Eigen::MatrixXd m_orthonormalize(const Eigen::MatrixXd& vectors, const Eigen::MatrixXd& M,
                                 double rank_tol) {
  Eigen::MatrixXd Q = vectors;
  for (Eigen::Index j = 0; j < Q.cols(); ++j) {
    const double original = std::sqrt(std::max(0.0, Q.col(j).dot(M * Q.col(j))));
    for (int sweep = 0; sweep < 2; ++sweep) {
      for (Eigen::Index i = 0; i < j; ++i) {
        const double r = Q.col(i).dot(M * Q.col(j));
        Q.col(j) -= r * Q.col(i);
      }
    }
    const double norm = std::sqrt(std::max(0.0, Q.col(j).dot(M * Q.col(j))));
    if (!(original > 0.0) || norm <= rank_tol * original) {
      throw Error(ErrorKind::Rank, "column " + std::to_string(j + 1) +
                                       " is linearly dependent on the preceding columns");
    }
    Q.col(j) /= norm;
  }
  return Q;
}

}  // namespace sceig
