#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace sceig {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// A point of the parameter box; coordinates past the end are zero.
using ParameterPoint = std::vector<double>;

/// Throws a domain error unless every coordinate lies in [-1, 1].
void validate_parameter_point(std::span<const double> y);

/// Claimed decay bounds kappa_m of the affine terms plus the summability
/// exponent p used when deriving anisotropy weights.
struct DecaySequence {
  std::vector<double> kappa;
  double p_exponent = 1.0;

  double l1() const;
  /// (sum kappa_m^p)^(1/p)
  double lp() const;
  /// Requires every kappa_m > 0, sum < 1 and p in (0, 1].
  void validate() const;
};

/// Finite-dimensional family B(y) = B0 + sum_m y_m B_m with a mass matrix
/// defining the discrete H inner product. Immutable after construction.
class AffineOperatorFamily {
 public:
  /// Validates symmetry, definiteness of B0 and mass, and dimensions.
  AffineOperatorFamily(Matrix b0, std::vector<Matrix> terms, Matrix mass,
                       DecaySequence kappa, double alpha0 = 1.0);

  Eigen::Index dim() const { return b0_.rows(); }
  std::size_t num_terms() const { return terms_.size(); }
  const Matrix& b0() const { return b0_; }
  const std::vector<Matrix>& terms() const { return terms_; }
  const Matrix& term(std::size_t m) const { return terms_.at(m); }
  const Matrix& mass() const { return mass_; }
  const DecaySequence& kappa() const { return kappa_; }
  double alpha0() const { return alpha0_; }

  /// ||v||_V = sqrt(v^T B0 v)
  double energy_norm(const Vector& v) const;

 private:
  Matrix b0_;
  std::vector<Matrix> terms_;
  Matrix mass_;
  DecaySequence kappa_;
  double alpha0_;
};

/// B0 + sum_m y_m B_m.
Matrix assemble_at(const AffineOperatorFamily& family, std::span<const double> y);

/// P1 finite elements for -(a u')' = mu u on (0,1), homogeneous Dirichlet,
/// with a(x,y) = 1 + sum_{m<=M} y_m c m^{-rate} cos(m pi x).
AffineOperatorFamily model_diffusion_1d(int n_elements, double decay_scale,
                                        double decay_rate, int num_terms);

/// Q1 elements on the unit square with a_m = c m^{-rate} cos(k1 pi x1) cos(k2 pi x2),
/// (k1, k2) walking N^2 along anti-diagonals. `transpose` swaps k1 and k2.
AffineOperatorFamily model_diffusion_2d(int n_per_side, double decay_scale,
                                        double decay_rate, int num_terms,
                                        bool transpose = false);

/// The (k1, k2) frequency pair of the m-th (1-based) 2D coefficient term.
std::pair<int, int> diagonal_frequency(int m);

/// Wraps user matrices into a validated family.
AffineOperatorFamily synthetic_family(Matrix b0, std::vector<Matrix> terms,
                                      Matrix mass, std::vector<double> kappa);

/// 4x4 family whose eigenvalues 2 and 3 cross at y = 1/6 while staying
/// separated from eigenvalues 1 and 4. Eigenvalue pairs (1,2) and (3,4) are
/// weakly coupled so the cluster eigenspace rotates with y.
AffineOperatorFamily designed_crossing_family();

struct DecayEntry {
  double claimed = 0.0;
  double measured = 0.0;
  bool violated = false;
};

struct DecayReport {
  std::vector<DecayEntry> entries;
  double tolerance = 0.0;
  bool ok() const;
};

/// Measured kappa_m is the largest |lambda| of the pencil (B_m, B0).
DecayReport verify_decay(const AffineOperatorFamily& family, double tolerance = 1e-8);

/// Sampled Rayleigh quotients v^T B(y) v / v^T B0 v against the bounds
/// 1 -+ sum kappa.
struct EllipticityReport {
  double lower_bound = 0.0;
  double upper_bound = 0.0;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  bool ok() const;
};

EllipticityReport verify_ellipticity(const AffineOperatorFamily& family,
                                     std::size_t n_samples, std::uint64_t seed);

/// JSON matrix-family document:
/// {"dim": n, "mass": [[...]], "B0": [[...]], "terms": [[[...]], ...], "kappa": [...]}
nlohmann::json family_to_json(const AffineOperatorFamily& family);
AffineOperatorFamily family_from_json(const nlohmann::json& doc);
AffineOperatorFamily load_family(const std::filesystem::path& path);
void save_family(const AffineOperatorFamily& family, const std::filesystem::path& path);

/// FNV-1a over dimensions and matrix entries; identifies a family in
/// persisted artifacts.
std::uint64_t family_hash(const AffineOperatorFamily& family);

nlohmann::json to_json(const DecayReport& report);
nlohmann::json to_json(const EllipticityReport& report);

}  // namespace sceig
