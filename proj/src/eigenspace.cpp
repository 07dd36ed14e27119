#include "sceig/eigenspace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sceig/error.hpp"
#include "sceig/sampling.hpp"

namespace sceig {

ClusterSelection::ClusterSelection(std::vector<int> indices) : indices_(std::move(indices)) {
  if (indices_.empty()) throw Error(ErrorKind::Parameter, "cluster selection is empty");
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    if (indices_[i] < 1) throw Error(ErrorKind::Parameter, "cluster indices are 1-based");
    if (i > 0 && indices_[i] <= indices_[i - 1]) {
      throw Error(ErrorKind::Parameter, "cluster indices must be strictly ascending");
    }
  }
}

bool ClusterSelection::contains(int index) const {
  return std::binary_search(indices_.begin(), indices_.end(), index);
}

bool Interval::contains(double x, double rel_slack) const {
  const double slack = rel_slack * std::max(std::abs(lower), std::abs(upper));
  return x >= lower - slack && x <= upper + slack;
}

std::vector<Interval> weyl_envelope(const std::vector<double>& values_at_origin,
                                    double kappa_sum) {
  if (!(kappa_sum >= 0.0 && kappa_sum < 1.0)) {
    throw Error(ErrorKind::DecayViolation, "kappa sum must lie in [0, 1)");
  }
  std::vector<Interval> out;
  out.reserve(values_at_origin.size());
  for (double mu : values_at_origin) {
    out.push_back({(1.0 - kappa_sum) * mu, (1.0 + kappa_sum) * mu});
  }
  return out;
}

double isolation_parameter(double delta0, double kappa_sum) {
  if (!(kappa_sum >= 0.0 && kappa_sum < 1.0)) {
    throw Error(ErrorKind::DecayViolation, "kappa sum must lie in [0, 1)");
  }
  const double threshold = kappa_sum == 0.0 ? 0.0 : 2.0 / (1.0 / kappa_sum - 1.0);
  if (!(delta0 > threshold)) {
    throw Error(ErrorKind::NotProvablyIsolated,
                "relative gap " + std::to_string(delta0) + " does not exceed " +
                    std::to_string(threshold) + " required by the perturbation bound");
  }
  return (delta0 - (delta0 + 2.0) * kappa_sum) / (1.0 + kappa_sum);
}

double cluster_gap(const Eigen::VectorXd& values, const ClusterSelection& J) {
  const auto count = static_cast<int>(values.size());
  if (J.back() > count) {
    throw Error(ErrorKind::ClusterCoverage, "eigenvalue " + std::to_string(J.back()) +
                                                " not available (" + std::to_string(count) +
                                                " computed)");
  }
  double gap = std::numeric_limits<double>::infinity();
  for (int i : J.indices()) {
    for (int j = 1; j <= count; ++j) {
      if (J.contains(j)) continue;
      gap = std::min(gap, std::abs(values(i - 1) - values(j - 1)));
    }
  }
  return gap;
}

double relative_cluster_gap(const Eigen::VectorXd& values, const ClusterSelection& J) {
  const double gap = cluster_gap(values, J);
  double top = -std::numeric_limits<double>::infinity();
  for (int i : J.indices()) top = std::max(top, values(i - 1));
  return gap / top;
}

IsolationReport check_isolation(const AffineOperatorFamily& family, const ClusterSelection& J,
                                double delta, std::size_t n_samples, std::uint64_t seed,
                                const SolverOptions& options) {
  IsolationReport report;
  report.delta_requested = delta;
  report.n_samples = n_samples;
  report.seed = seed;
  report.delta_observed = std::numeric_limits<double>::infinity();

  const auto n = family.dim();
  const Eigen::Index k = std::min<Eigen::Index>(J.back() + 1, n);
  BoxSampler sampler(seed);
  for (std::size_t s = 0; s < n_samples; ++s) {
    IsolationSample sample;
    sample.y = sampler.point(family.num_terms());
    const auto decomp = solve_gevp(assemble_at(family, sample.y), family.mass(), k, options);
    sample.gap = cluster_gap(decomp.values, J);
    sample.max_cluster_value = decomp.values(J.back() - 1);
    for (int i : J.indices()) {
      sample.max_cluster_value = std::max(sample.max_cluster_value, decomp.values(i - 1));
    }
    report.delta_observed =
        std::min(report.delta_observed, sample.gap / sample.max_cluster_value);
    report.samples.push_back(std::move(sample));
  }
  report.isolated = report.delta_observed >= delta;
  return report;
}

nlohmann::json to_json(const IsolationReport& report) {
  auto finite_or_null = [](double x) -> nlohmann::json {
    if (std::isfinite(x)) return x;
    return nullptr;
  };
  nlohmann::json doc;
  doc["delta_requested"] = report.delta_requested;
  doc["delta_observed"] = finite_or_null(report.delta_observed);
  doc["isolated"] = report.isolated;
  doc["n_samples"] = report.n_samples;
  doc["seed"] = report.seed;
  auto samples = nlohmann::json::array();
  for (const auto& s : report.samples) {
    samples.push_back({{"y", s.y},
                       {"gap", finite_or_null(s.gap)},
                       {"max_cluster_value", s.max_cluster_value}});
  }
  doc["samples"] = std::move(samples);
  return doc;
}

Eigen::MatrixXd cluster_vectors(const SpectralDecomposition& decomp, const ClusterSelection& J) {
  if (J.back() > decomp.count()) {
    throw Error(ErrorKind::ClusterCoverage, "decomposition holds " +
                                                std::to_string(decomp.count()) +
                                                " pairs, cluster needs index " +
                                                std::to_string(J.back()));
  }
  Eigen::MatrixXd U(decomp.vectors.rows(), static_cast<Eigen::Index>(J.size()));
  for (std::size_t i = 0; i < J.size(); ++i) {
    U.col(static_cast<Eigen::Index>(i)) = decomp.vectors.col(J.indices()[i] - 1);
  }
  return U;
}

Eigen::VectorXd cluster_values(const SpectralDecomposition& decomp, const ClusterSelection& J) {
  if (J.back() > decomp.count()) {
    throw Error(ErrorKind::ClusterCoverage, "cluster index beyond computed spectrum");
  }
  Eigen::VectorXd v(static_cast<Eigen::Index>(J.size()));
  for (std::size_t i = 0; i < J.size(); ++i) v(static_cast<Eigen::Index>(i)) = decomp.values(J.indices()[i] - 1);
  return v;
}

Eigen::VectorXd spectral_projector_apply(const SpectralDecomposition& decomp,
                                         const ClusterSelection& J, const Eigen::MatrixXd& M,
                                         const Eigen::VectorXd& v) {
  const Eigen::MatrixXd U = cluster_vectors(decomp, J);
  return U * (U.transpose() * (M * v));
}

EigenspaceBasis canonical_basis(const SpectralDecomposition& decomp,
                                const Eigen::MatrixXd& ref_vectors, const ClusterSelection& J,
                                const Eigen::MatrixXd& M, double gram_threshold) {
  if (ref_vectors.cols() != static_cast<Eigen::Index>(J.size())) {
    throw Error(ErrorKind::Precondition, "reference basis must have one column per cluster index");
  }
  const Eigen::MatrixXd U = cluster_vectors(decomp, J);
  // G(i, j) = (u_J(i)(0), u_J(j)(y))_H
  const Eigen::MatrixXd G = ref_vectors.transpose() * (M * U);
  EigenspaceBasis basis;
  basis.vectors = U * G.transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(G);
  basis.gram_sigma_min = svd.singularValues().minCoeff();
  if (!(basis.gram_sigma_min >= gram_threshold)) {
    throw Error(ErrorKind::DegenerateBasis,
                "smallest Gram singular value " + std::to_string(basis.gram_sigma_min) +
                    " below threshold " + std::to_string(gram_threshold));
  }
  return basis;
}

Eigen::VectorXd principal_angles(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                 const Eigen::MatrixXd& M) {
  if (A.cols() != B.cols() || A.rows() != B.rows()) {
    throw Error(ErrorKind::Precondition, "principal angles need bases of equal shape");
  }
  const Eigen::MatrixXd QA = m_orthonormalize(A, M);
  const Eigen::MatrixXd QB = m_orthonormalize(B, M);
  const Eigen::MatrixXd C = QA.transpose() * (M * QB);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(C);
  Eigen::VectorXd cosines = svd.singularValues();  // descending
  const Eigen::MatrixXd R = QB - QA * C;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(R.transpose() * (M * R));
  Eigen::VectorXd sines = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();  // ascending
  const auto k = cosines.size();
  Eigen::VectorXd angles(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    angles(i) = std::atan2(sines(i), std::min(1.0, cosines(i)));
  }
  std::sort(angles.data(), angles.data() + k);
  return angles;
}

double largest_principal_angle(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                               const Eigen::MatrixXd& M) {
  const auto angles = principal_angles(A, B, M);
  return angles.size() == 0 ? 0.0 : angles.maxCoeff();
}

}  // namespace sceig
