#include "sceig/collocation.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "sceig/error.hpp"
#include "sceig/parallel.hpp"

namespace sceig {

namespace {

std::string describe_point(const std::vector<double>& p) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (std::size_t i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
  os << ')';
  return os.str();
}

nlohmann::json dense_to_json(const Eigen::MatrixXd& A) {
  auto rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < A.cols(); ++j) row.push_back(A(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd dense_from_json(const nlohmann::json& rows) {
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto c = r == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(rows[0].size());
  Eigen::MatrixXd A(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(row.size()) != c) {
      throw Error(ErrorKind::Config, "ragged matrix in collocation artifact");
    }
    for (Eigen::Index j = 0; j < c; ++j) A(i, j) = row[static_cast<std::size_t>(j)].get<double>();
  }
  return A;
}

std::string hash_hex(std::uint64_t h) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

}  // namespace

CollocatedEigenbasis::CollocatedEigenbasis(std::shared_ptr<const AffineOperatorFamily> family,
                                           ClusterSelection J, MultiIndexSet set,
                                           BasisTarget target, Eigen::MatrixXd ref_vectors,
                                           std::vector<Eigen::MatrixXd> bases,
                                           std::vector<Eigen::VectorXd> cluster_eigenvalues,
                                           CollocationDiagnostics diagnostics)
    : family_(std::move(family)),
      cluster_(std::move(J)),
      interpolant_(std::move(set)),
      target_(target),
      ref_vectors_(std::move(ref_vectors)),
      bases_(std::move(bases)),
      values_(std::move(cluster_eigenvalues)),
      diagnostics_(diagnostics) {
  if (!family_) throw Error(ErrorKind::Precondition, "collocated basis needs a family");
  if (bases_.size() != interpolant_.points().size() ||
      values_.size() != interpolant_.points().size()) {
    throw Error(ErrorKind::Precondition, "point data must cover exactly the collocation grid");
  }
}

Eigen::MatrixXd CollocatedEigenbasis::evaluate(std::span<const double> y) const {
  validate_parameter_point(y);
  const auto w = interpolant_.weights(y);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(ref_vectors_.rows(), ref_vectors_.cols());
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] != 0.0) out += w[i] * bases_[i];
  }
  return out;
}

double CollocatedEigenbasis::evaluate_cluster_sum(std::span<const double> y) const {
  validate_parameter_point(y);
  const auto w = interpolant_.weights(y);
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * values_[i].sum();
  return s;
}

double CollocatedEigenbasis::evaluate_cluster_mean(std::span<const double> y) const {
  return evaluate_cluster_sum(y) / static_cast<double>(cluster_.size());
}

CollocatedEigenbasis CollocatedEigenbasis::with_bases(std::vector<Eigen::MatrixXd> bases) const {
  return CollocatedEigenbasis(family_, cluster_, interpolant_.set(), target_, ref_vectors_,
                              std::move(bases), values_, diagnostics_);
}

Eigen::MatrixXd aligned_cluster_vectors(const SpectralDecomposition& decomp,
                                        const ClusterSelection& J,
                                        const Eigen::MatrixXd& ref_vectors,
                                        const Eigen::MatrixXd& M) {
  Eigen::MatrixXd U = cluster_vectors(decomp, J);
  for (Eigen::Index i = 0; i < U.cols(); ++i) {
    if (ref_vectors.col(i).dot(M * U.col(i)) < 0.0) U.col(i) *= -1.0;
  }
  return U;
}

CollocatedEigenbasis collocate(std::shared_ptr<const AffineOperatorFamily> family,
                               const ClusterSelection& J, const MultiIndexSet& set,
                               const CollocationConfig& config) {
  if (!family) throw Error(ErrorKind::Precondition, "collocate needs a family");
  const auto n = family->dim();
  if (J.back() > n) {
    throw Error(ErrorKind::ClusterCoverage, "cluster index " + std::to_string(J.back()) +
                                                " exceeds dimension " + std::to_string(n));
  }
  const Eigen::Index k = std::min<Eigen::Index>(J.back() + 1, n);
  const auto& M = family->mass();

  const auto origin = solve_gevp(family->b0(), M, k, config.solver);
  const Eigen::MatrixXd ref = cluster_vectors(origin, J);

  SparseInterpolant grid(set);
  const auto& points = grid.points();
  std::vector<Eigen::MatrixXd> bases(points.size());
  std::vector<Eigen::VectorXd> values(points.size());
  std::vector<double> sigma(points.size(), 0.0);
  std::vector<double> gaps(points.size(), 0.0);

  parallel_for(points.size(), config.threads, [&](std::size_t i) {
    const auto& chi = points[i];
    try {
      const auto decomp = solve_gevp(assemble_at(*family, chi), M, k, config.solver);
      gaps[i] = relative_cluster_gap(decomp.values, J);
      if (!(gaps[i] > config.min_relative_gap)) {
        throw Error(ErrorKind::ClusterCrossingExterior,
                    "relative gap " + std::to_string(gaps[i]) + " to the exterior spectrum");
      }
      values[i] = cluster_values(decomp, J);
      if (config.target == BasisTarget::Canonical) {
        auto basis = canonical_basis(decomp, ref, J, M, config.gram_threshold);
        bases[i] = std::move(basis.vectors);
        sigma[i] = basis.gram_sigma_min;
      } else {
        bases[i] = aligned_cluster_vectors(decomp, J, ref, M);
        const Eigen::MatrixXd G = ref.transpose() * (M * cluster_vectors(decomp, J));
        sigma[i] = Eigen::JacobiSVD<Eigen::MatrixXd>(G).singularValues().minCoeff();
      }
    } catch (const Error& e) {
      throw Error(e.kind(), std::string(e.what()) + " at collocation point " + describe_point(chi));
    }
  });

  CollocationDiagnostics diag;
  diag.min_gram_sigma = std::numeric_limits<double>::infinity();
  diag.min_relative_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.size(); ++i) {
    diag.min_gram_sigma = std::min(diag.min_gram_sigma, sigma[i]);
    diag.min_relative_gap = std::min(diag.min_relative_gap, gaps[i]);
  }
  return CollocatedEigenbasis(std::move(family), J, set, config.target, ref, std::move(bases),
                              std::move(values), diag);
}

Eigen::MatrixXd orthonormalize_at(const CollocatedEigenbasis& cb, std::span<const double> y) {
  return m_orthonormalize(cb.evaluate(y), cb.family().mass());
}

nlohmann::json to_json(const CollocatedEigenbasis& cb) {
  auto finite_or_null = [](double x) -> nlohmann::json {
    if (std::isfinite(x)) return x;
    return nullptr;
  };
  nlohmann::json doc;
  doc["format"] = "sceig-collocated-eigenbasis/1";
  doc["family_hash"] = hash_hex(family_hash(cb.family()));
  doc["dim"] = cb.family().dim();
  doc["J"] = cb.cluster().indices();
  doc["target"] = cb.target() == BasisTarget::Canonical ? "canonical" : "raw";
  doc["A"] = to_json(cb.set());
  doc["ref_vectors"] = dense_to_json(cb.ref_vectors());
  auto pts = nlohmann::json::array();
  for (std::size_t i = 0; i < cb.points().size(); ++i) {
    std::vector<double> ev(cb.cluster_eigenvalues()[i].data(),
                           cb.cluster_eigenvalues()[i].data() + cb.cluster_eigenvalues()[i].size());
    pts.push_back({{"y", cb.points()[i]},
                   {"basis", dense_to_json(cb.bases()[i])},
                   {"eigenvalues", ev}});
  }
  doc["points"] = std::move(pts);
  doc["diagnostics"] = {{"min_gram_sigma", finite_or_null(cb.diagnostics().min_gram_sigma)},
                        {"min_relative_gap", finite_or_null(cb.diagnostics().min_relative_gap)}};
  return doc;
}

CollocatedEigenbasis collocated_from_json(const nlohmann::json& doc,
                                          std::shared_ptr<const AffineOperatorFamily> family) {
  try {
    if (doc.at("family_hash").get<std::string>() != hash_hex(family_hash(*family))) {
      throw Error(ErrorKind::Config, "collocation artifact was built for a different family");
    }
    ClusterSelection J(doc.at("J").get<std::vector<int>>());
    MultiIndexSet set = multi_index_set_from_json(doc.at("A"));
    const auto target = doc.at("target").get<std::string>() == "raw"
                            ? BasisTarget::RawEigenvectors
                            : BasisTarget::Canonical;
    Eigen::MatrixXd ref = dense_from_json(doc.at("ref_vectors"));

    // Stored order is the grid order; rebuild by lookup to stay robust.
    SparseInterpolant grid(set);
    std::vector<Eigen::MatrixXd> bases(grid.points().size());
    std::vector<Eigen::VectorXd> values(grid.points().size());
    std::vector<bool> seen(grid.points().size(), false);
    for (const auto& p : doc.at("points")) {
      const auto y = p.at("y").get<std::vector<double>>();
      const auto idx = grid.find_point(y);
      if (idx < 0) throw Error(ErrorKind::Config, "artifact point not on the collocation grid");
      bases[static_cast<std::size_t>(idx)] = dense_from_json(p.at("basis"));
      const auto ev = p.at("eigenvalues").get<std::vector<double>>();
      values[static_cast<std::size_t>(idx)] =
          Eigen::Map<const Eigen::VectorXd>(ev.data(), static_cast<Eigen::Index>(ev.size()));
      seen[static_cast<std::size_t>(idx)] = true;
    }
    for (bool s : seen) {
      if (!s) throw Error(ErrorKind::Config, "artifact does not cover the collocation grid");
    }
    CollocationDiagnostics diag;
    const auto& jd = doc.at("diagnostics");
    diag.min_gram_sigma = jd.at("min_gram_sigma").is_null()
                              ? std::numeric_limits<double>::infinity()
                              : jd.at("min_gram_sigma").get<double>();
    diag.min_relative_gap = jd.at("min_relative_gap").is_null()
                                ? std::numeric_limits<double>::infinity()
                                : jd.at("min_relative_gap").get<double>();
    return CollocatedEigenbasis(std::move(family), J, std::move(set), target, std::move(ref),
                                std::move(bases), std::move(values), diag);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Config, std::string("malformed collocation artifact: ") + e.what());
  }
}

void save_collocated(const CollocatedEigenbasis& cb, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << to_json(cb).dump() << '\n';
}

CollocatedEigenbasis load_collocated(const std::filesystem::path& path,
                                     std::shared_ptr<const AffineOperatorFamily> family) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Config, path.string() + ": " + e.what());
  }
  return collocated_from_json(doc, std::move(family));
}

}  // namespace sceig
