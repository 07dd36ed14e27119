#pragma once

#include <cstdint>
#include <initializer_list>
#include <vector>

#include <json.hpp>

#include "sceig/eigensolver.hpp"
#include "sceig/param_operator.hpp"

namespace sceig {

/// Ascending, distinct, 1-based eigenvalue indices J.
class ClusterSelection {
 public:
  explicit ClusterSelection(std::vector<int> indices);
  ClusterSelection(std::initializer_list<int> indices)
      : ClusterSelection(std::vector<int>(indices)) {}

  const std::vector<int>& indices() const { return indices_; }
  std::size_t size() const { return indices_.size(); }
  int front() const { return indices_.front(); }
  int back() const { return indices_.back(); }
  bool contains(int index) const;

 private:
  std::vector<int> indices_;
};

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
  bool contains(double x, double rel_slack = 0.0) const;
};

/// [(1 - s) mu_i(0), (1 + s) mu_i(0)] for each eigenvalue at the origin.
std::vector<Interval> weyl_envelope(const std::vector<double>& values_at_origin,
                                    double kappa_sum);

/// delta = (delta0 - (delta0 + 2) s) / (1 + s); requires delta0 > 2 / (1/s - 1).
double isolation_parameter(double delta0, double kappa_sum);

/// dist(sigma_J, rest of the computed spectrum); +inf without exterior values.
double cluster_gap(const Eigen::VectorXd& values, const ClusterSelection& J);

/// cluster_gap / max sigma_J.
double relative_cluster_gap(const Eigen::VectorXd& values, const ClusterSelection& J);

struct IsolationSample {
  std::vector<double> y;
  double gap = 0.0;
  double max_cluster_value = 0.0;
};

struct IsolationReport {
  double delta_requested = 0.0;
  double delta_observed = 0.0;
  bool isolated = false;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
  std::vector<IsolationSample> samples;
};

/// Monte Carlo isolation check over the truncated parameter box.
IsolationReport check_isolation(const AffineOperatorFamily& family, const ClusterSelection& J,
                                double delta, std::size_t n_samples, std::uint64_t seed,
                                const SolverOptions& options = {});

nlohmann::json to_json(const IsolationReport& report);

/// Discrete H-orthogonal projector onto span{u_j : j in J}:
/// sum_j (u_j^T M v) u_j.
Eigen::VectorXd spectral_projector_apply(const SpectralDecomposition& decomp,
                                         const ClusterSelection& J, const Eigen::MatrixXd& M,
                                         const Eigen::VectorXd& v);

/// Columns u_j, j in J, of a decomposition. Throws a cluster-coverage error
/// when an index is missing.
Eigen::MatrixXd cluster_vectors(const SpectralDecomposition& decomp, const ClusterSelection& J);
Eigen::VectorXd cluster_values(const SpectralDecomposition& decomp, const ClusterSelection& J);

struct EigenspaceBasis {
  Eigen::MatrixXd vectors;  // n x S, column i is P_J(y) ref_i
  double gram_sigma_min = 0.0;
};

inline constexpr double kDefaultGramThreshold = 1e-8;

/// Projects the reference vectors onto the cluster eigenspace of `decomp`.
/// Throws a degenerate-basis error when the smallest singular value of
/// G(i,j) = ref_i^T M u_J(j) falls below `gram_threshold`.
EigenspaceBasis canonical_basis(const SpectralDecomposition& decomp,
                                const Eigen::MatrixXd& ref_vectors, const ClusterSelection& J,
                                const Eigen::MatrixXd& M,
                                double gram_threshold = kDefaultGramThreshold);

/// Principal angles (ascending, radians) between span(A) and span(B) in the
/// M inner product. Both inputs need full column rank and the same number of
/// columns. Angles come from atan2(sin, cos) so small angles keep full
/// relative accuracy.
Eigen::VectorXd principal_angles(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                 const Eigen::MatrixXd& M);

double largest_principal_angle(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                               const Eigen::MatrixXd& M);

}  // namespace sceig
