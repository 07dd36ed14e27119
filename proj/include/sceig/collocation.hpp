#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <vector>

#include <json.hpp>

#include "sceig/eigensolver.hpp"
#include "sceig/eigenspace.hpp"
#include "sceig/param_operator.hpp"
#include "sceig/sparse_grid.hpp"

namespace sceig {

/// What is stored at each collocation point.
enum class BasisTarget {
  /// P_J(y) u_J(i)(0): smooth through crossings inside the cluster.
  Canonical,
  /// Individually sorted eigenvectors u_j(y), j in J, sign-aligned with the
  /// reference vectors. Non-smooth wherever cluster eigenvalues cross.
  RawEigenvectors,
};

struct CollocationConfig {
  unsigned threads = 1;
  double gram_threshold = kDefaultGramThreshold;
  /// Point solves whose relative exterior gap is <= this abort collocation.
  double min_relative_gap = 0.0;
  BasisTarget target = BasisTarget::Canonical;
  SolverOptions solver;
};

struct CollocationDiagnostics {
  double min_gram_sigma = 0.0;
  double min_relative_gap = 0.0;
};

/// Per-point cluster bases on the sparse grid X_A plus the interpolation
/// operator I_A that evaluates them anywhere in the parameter box.
class CollocatedEigenbasis {
 public:
  CollocatedEigenbasis(std::shared_ptr<const AffineOperatorFamily> family, ClusterSelection J,
                       MultiIndexSet set, BasisTarget target, Eigen::MatrixXd ref_vectors,
                       std::vector<Eigen::MatrixXd> bases,
                       std::vector<Eigen::VectorXd> cluster_eigenvalues,
                       CollocationDiagnostics diagnostics);

  const AffineOperatorFamily& family() const { return *family_; }
  std::shared_ptr<const AffineOperatorFamily> family_ptr() const { return family_; }
  const ClusterSelection& cluster() const { return cluster_; }
  const MultiIndexSet& set() const { return interpolant_.set(); }
  const SparseInterpolant& interpolant() const { return interpolant_; }
  const std::vector<CombinationTerm>& terms() const { return interpolant_.terms(); }
  const std::vector<std::vector<double>>& points() const { return interpolant_.points(); }
  const std::vector<Eigen::MatrixXd>& bases() const { return bases_; }
  const std::vector<Eigen::VectorXd>& cluster_eigenvalues() const { return values_; }
  const Eigen::MatrixXd& ref_vectors() const { return ref_vectors_; }
  const CollocationDiagnostics& diagnostics() const { return diagnostics_; }
  BasisTarget target() const { return target_; }

  /// I_A applied columnwise to the stored bases; n x S.
  Eigen::MatrixXd evaluate(std::span<const double> y) const;

  /// Interpolated sum of the cluster eigenvalues (a smooth symmetric function).
  double evaluate_cluster_sum(std::span<const double> y) const;
  double evaluate_cluster_mean(std::span<const double> y) const;

  /// Same grid and terms with every stored basis replaced; used for
  /// linearity checks and surrogate data.
  CollocatedEigenbasis with_bases(std::vector<Eigen::MatrixXd> bases) const;

 private:
  std::shared_ptr<const AffineOperatorFamily> family_;
  ClusterSelection cluster_;
  SparseInterpolant interpolant_;
  BasisTarget target_;
  Eigen::MatrixXd ref_vectors_;
  std::vector<Eigen::MatrixXd> bases_;
  std::vector<Eigen::VectorXd> values_;
  CollocationDiagnostics diagnostics_;
};

/// Solves at the origin to fix the reference vectors, then at every point of
/// X_A. Point solves are independent and run on `config.threads` workers.
CollocatedEigenbasis collocate(std::shared_ptr<const AffineOperatorFamily> family,
                               const ClusterSelection& J, const MultiIndexSet& set,
                               const CollocationConfig& config = {});

/// Gram-Schmidt in the mass inner product applied to evaluate(y).
Eigen::MatrixXd orthonormalize_at(const CollocatedEigenbasis& cb, std::span<const double> y);

/// Reference-aligned raw eigenvectors u_j(y), j in J: each column flipped so
/// its M-inner product with the matching reference vector is nonnegative.
Eigen::MatrixXd aligned_cluster_vectors(const SpectralDecomposition& decomp,
                                        const ClusterSelection& J,
                                        const Eigen::MatrixXd& ref_vectors,
                                        const Eigen::MatrixXd& M);

nlohmann::json to_json(const CollocatedEigenbasis& cb);
/// Rebuilds a persisted artifact; the family must hash to the stored value.
CollocatedEigenbasis collocated_from_json(const nlohmann::json& doc,
                                          std::shared_ptr<const AffineOperatorFamily> family);
void save_collocated(const CollocatedEigenbasis& cb, const std::filesystem::path& path);
CollocatedEigenbasis load_collocated(const std::filesystem::path& path,
                                     std::shared_ptr<const AffineOperatorFamily> family);

}  // namespace sceig
