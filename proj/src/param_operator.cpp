#include "sceig/param_operator.hpp"

#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numbers>
#include <string>

#include "sceig/eigensolver.hpp"
#include "sceig/error.hpp"
#include "sceig/sampling.hpp"

namespace sceig {

namespace {

bool is_symmetric(const Matrix& A) {
  if (A.rows() != A.cols()) return false;
  const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  return (A - A.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
}

bool is_positive_definite(const Matrix& A) {
  Eigen::LLT<Matrix> llt(A);
  return llt.info() == Eigen::Success;
}

void require(bool ok, ErrorKind kind, const std::string& msg) {
  if (!ok) throw Error(kind, msg);
}

Matrix matrix_from_json(const nlohmann::json& rows, Eigen::Index n, const std::string& name) {
  require(rows.is_array() && static_cast<Eigen::Index>(rows.size()) == n, ErrorKind::InvalidFamily,
          name + " must have " + std::to_string(n) + " rows");
  Matrix A(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    require(row.is_array() && static_cast<Eigen::Index>(row.size()) == n, ErrorKind::InvalidFamily,
            name + " row " + std::to_string(i) + " must have " + std::to_string(n) + " entries");
    for (Eigen::Index j = 0; j < n; ++j) A(i, j) = row[static_cast<std::size_t>(j)].get<double>();
  }
  return A;
}

nlohmann::json matrix_to_json(const Matrix& A) {
  auto rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < A.cols(); ++j) row.push_back(A(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<double> cosine_decay(double c, double rate, int num_terms) {
  std::vector<double> kappa(static_cast<std::size_t>(num_terms));
  for (int m = 1; m <= num_terms; ++m) kappa[m - 1] = c * std::pow(static_cast<double>(m), -rate);
  return kappa;
}

void check_model_arguments(double c, double rate, int num_terms) {
  require(num_terms >= 0, ErrorKind::Parameter, "number of terms must be nonnegative");
  require(c >= 0.0, ErrorKind::Parameter, "decay scale must be nonnegative");
  require(num_terms == 0 || c > 0.0, ErrorKind::DecayViolation,
          "a zero decay scale leaves zero kappa_m; use zero terms instead");
  require(num_terms == 0 || rate > 1.0, ErrorKind::Parameter, "decay rate must exceed 1");
}

}  // namespace

void validate_parameter_point(std::span<const double> y) {
  for (std::size_t m = 0; m < y.size(); ++m) {
    if (!(y[m] >= -1.0 && y[m] <= 1.0)) {
      throw Error(ErrorKind::Domain, "parameter coordinate " + std::to_string(m) + " = " +
                                         std::to_string(y[m]) + " lies outside [-1, 1]");
    }
  }
}

double DecaySequence::l1() const {
  double s = 0.0;
  for (double k : kappa) s += k;
  return s;
}

double DecaySequence::lp() const {
  double s = 0.0;
  for (double k : kappa) s += std::pow(k, p_exponent);
  return std::pow(s, 1.0 / p_exponent);
}

void DecaySequence::validate() const {
  require(p_exponent > 0.0 && p_exponent <= 1.0, ErrorKind::Parameter,
          "summability exponent p must lie in (0, 1]");
  for (std::size_t m = 0; m < kappa.size(); ++m) {
    require(kappa[m] > 0.0 && std::isfinite(kappa[m]), ErrorKind::DecayViolation,
            "kappa_" + std::to_string(m + 1) + " must be positive");
  }
  require(l1() < 1.0, ErrorKind::DecayViolation,
          "sum of kappa_m is " + std::to_string(l1()) + ", must be < 1");
}

AffineOperatorFamily::AffineOperatorFamily(Matrix b0, std::vector<Matrix> terms, Matrix mass,
                                           DecaySequence kappa, double alpha0)
    : b0_(std::move(b0)),
      terms_(std::move(terms)),
      mass_(std::move(mass)),
      kappa_(std::move(kappa)),
      alpha0_(alpha0) {
  const auto n = b0_.rows();
  require(n > 0, ErrorKind::InvalidFamily, "dimension must be positive");
  require(is_symmetric(b0_), ErrorKind::InvalidFamily, "B0 must be square and symmetric");
  require(mass_.rows() == n && mass_.cols() == n, ErrorKind::InvalidFamily,
          "mass matrix dimension does not match B0");
  require(is_symmetric(mass_), ErrorKind::InvalidFamily, "mass matrix must be symmetric");
  require(is_positive_definite(b0_), ErrorKind::InvalidFamily, "B0 must be positive definite");
  require(is_positive_definite(mass_), ErrorKind::InvalidFamily,
          "mass matrix must be positive definite");
  require(terms_.size() == kappa_.kappa.size(), ErrorKind::InvalidFamily,
          "number of terms (" + std::to_string(terms_.size()) + ") differs from kappa length (" +
              std::to_string(kappa_.kappa.size()) + ")");
  for (std::size_t m = 0; m < terms_.size(); ++m) {
    require(terms_[m].rows() == n && terms_[m].cols() == n, ErrorKind::InvalidFamily,
            "term " + std::to_string(m + 1) + " has wrong dimension");
    require(is_symmetric(terms_[m]), ErrorKind::InvalidFamily,
            "term " + std::to_string(m + 1) + " must be symmetric");
  }
  require(alpha0_ > 0.0, ErrorKind::InvalidFamily, "alpha0 must be positive");
  kappa_.validate();
}

double AffineOperatorFamily::energy_norm(const Vector& v) const {
  return std::sqrt(std::max(0.0, v.dot(b0_ * v)));
}

Matrix assemble_at(const AffineOperatorFamily& family, std::span<const double> y) {
  if (y.size() > family.num_terms()) {
    throw Error(ErrorKind::ParameterDimension,
                "parameter point has " + std::to_string(y.size()) + " coordinates but family has " +
                    std::to_string(family.num_terms()) + " terms");
  }
  Matrix B = family.b0();
  for (std::size_t m = 0; m < y.size(); ++m) {
    if (y[m] != 0.0) B += y[m] * family.term(m);
  }
  return B;
}

AffineOperatorFamily model_diffusion_1d(int n_elements, double decay_scale, double decay_rate,
                                        int num_terms) {
  require(n_elements >= 2, ErrorKind::Parameter, "need at least two elements");
  check_model_arguments(decay_scale, decay_rate, num_terms);
  const auto kappa = cosine_decay(decay_scale, decay_rate, num_terms);
  {
    DecaySequence probe{kappa, 1.0};
    probe.validate();
  }

  const int n = n_elements - 1;
  const double h = 1.0 / n_elements;
  const double pi = std::numbers::pi;

  // Element e spans [e h, (e+1) h]; interior node i (0-based) sits at (i+1) h.
  // Gradients are constant per element, so the stiffness contribution is
  // (integral of a over the element) / h^2 times [[1,-1],[-1,1]].
  auto assemble = [&](auto&& element_integral) {
    Matrix K = Matrix::Zero(n, n);
    for (int e = 0; e < n_elements; ++e) {
      const double w = element_integral(e) / (h * h);
      const int left = e - 1;
      const int right = e;
      if (left >= 0) K(left, left) += w;
      if (right < n) K(right, right) += w;
      if (left >= 0 && right < n) {
        K(left, right) -= w;
        K(right, left) -= w;
      }
    }
    return K;
  };

  Matrix b0 = assemble([&](int) { return h; });
  std::vector<Matrix> terms;
  terms.reserve(static_cast<std::size_t>(num_terms));
  for (int m = 1; m <= num_terms; ++m) {
    const double amp = kappa[m - 1];
    const double freq = m * pi;
    terms.push_back(assemble([&](int e) {
      return amp * (std::sin(freq * (e + 1) * h) - std::sin(freq * e * h)) / freq;
    }));
  }

  Matrix mass = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    mass(i, i) = 4.0 * h / 6.0;
    if (i + 1 < n) {
      mass(i, i + 1) = h / 6.0;
      mass(i + 1, i) = h / 6.0;
    }
  }
  return AffineOperatorFamily(std::move(b0), std::move(terms), std::move(mass),
                              DecaySequence{kappa, 1.0});
}

std::pair<int, int> diagonal_frequency(int m) {
  // Anti-diagonal s = k1 + k2 holds s - 1 pairs, k1 ascending.
  int s = 2;
  int remaining = m;
  while (remaining > s - 1) {
    remaining -= s - 1;
    ++s;
  }
  const int k1 = remaining;
  return {k1, s - k1};
}

AffineOperatorFamily model_diffusion_2d(int n_per_side, double decay_scale, double decay_rate,
                                        int num_terms, bool transpose) {
  require(n_per_side >= 2, ErrorKind::Parameter, "need at least two elements per side");
  check_model_arguments(decay_scale, decay_rate, num_terms);
  const auto kappa = cosine_decay(decay_scale, decay_rate, num_terms);
  {
    DecaySequence probe{kappa, 1.0};
    probe.validate();
  }

  const int N = n_per_side;
  const int side = N - 1;
  const Eigen::Index n = static_cast<Eigen::Index>(side) * side;
  const double h = 1.0 / N;
  const double pi = std::numbers::pi;

  // 3-point Gauss rule per direction: exact for the Q1 stiffness and mass
  // integrands, and with positive weights it keeps |v^T B_m v| <= max|a_m| v^T B0 v.
  const std::array<double, 3> qx{-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
  const std::array<double, 3> qw{5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};

  auto dof = [&](int i, int j) -> Eigen::Index {
    if (i <= 0 || j <= 0 || i >= N || j >= N) return -1;
    return static_cast<Eigen::Index>(j - 1) * side + (i - 1);
  };

  auto assemble = [&](auto&& coefficient, bool stiffness) {
    Matrix K = Matrix::Zero(n, n);
    for (int ej = 0; ej < N; ++ej) {
      for (int ei = 0; ei < N; ++ei) {
        // local nodes: (0,0), (1,0), (0,1), (1,1)
        std::array<Eigen::Index, 4> g{dof(ei, ej), dof(ei + 1, ej), dof(ei, ej + 1),
                                      dof(ei + 1, ej + 1)};
        double local[4][4] = {};
        for (int qa = 0; qa < 3; ++qa) {
          for (int qb = 0; qb < 3; ++qb) {
            const double s = 0.5 * (1.0 + qx[qa]);
            const double t = 0.5 * (1.0 + qx[qb]);
            const double x1 = (ei + s) * h;
            const double x2 = (ej + t) * h;
            const double w = qw[qa] * qw[qb] * 0.25 * h * h * coefficient(x1, x2);
            const double phi[4] = {(1 - s) * (1 - t), s * (1 - t), (1 - s) * t, s * t};
            const double dx[4] = {-(1 - t) / h, (1 - t) / h, -t / h, t / h};
            const double dy[4] = {-(1 - s) / h, -s / h, (1 - s) / h, s / h};
            for (int a = 0; a < 4; ++a) {
              for (int b = 0; b < 4; ++b) {
                local[a][b] += stiffness ? w * (dx[a] * dx[b] + dy[a] * dy[b]) : w * phi[a] * phi[b];
              }
            }
          }
        }
        for (int a = 0; a < 4; ++a) {
          if (g[a] < 0) continue;
          for (int b = 0; b < 4; ++b) {
            if (g[b] < 0) continue;
            K(g[a], g[b]) += local[a][b];
          }
        }
      }
    }
    return K;
  };

  auto one = [](double, double) { return 1.0; };
  Matrix b0 = assemble(one, true);
  Matrix mass = assemble(one, false);
  std::vector<Matrix> terms;
  terms.reserve(static_cast<std::size_t>(num_terms));
  for (int m = 1; m <= num_terms; ++m) {
    auto [k1, k2] = diagonal_frequency(m);
    if (transpose) std::swap(k1, k2);
    const double amp = kappa[m - 1];
    terms.push_back(assemble(
        [&](double x1, double x2) { return amp * std::cos(k1 * pi * x1) * std::cos(k2 * pi * x2); },
        true));
  }
  return AffineOperatorFamily(std::move(b0), std::move(terms), std::move(mass),
                              DecaySequence{kappa, 1.0});
}

AffineOperatorFamily synthetic_family(Matrix b0, std::vector<Matrix> terms, Matrix mass,
                                      std::vector<double> kappa) {
  return AffineOperatorFamily(std::move(b0), std::move(terms), std::move(mass),
                              DecaySequence{std::move(kappa), 1.0});
}

AffineOperatorFamily designed_crossing_family() {
  Matrix b0 = Eigen::Vector4d(1.0, 2.0, 2.1, 4.0).asDiagonal();
  Matrix b1 = Matrix::Zero(4, 4);
  b1(1, 1) = 0.3;
  b1(2, 2) = -0.3;
  b1(0, 1) = b1(1, 0) = 0.1;
  b1(2, 3) = b1(3, 2) = 0.1;
  // B0-relative norm of b1 stays below 0.2; claimed bound 0.2.
  return synthetic_family(std::move(b0), {std::move(b1)}, Matrix::Identity(4, 4), {0.2});
}

bool DecayReport::ok() const {
  for (const auto& e : entries) {
    if (e.violated) return false;
  }
  return true;
}

DecayReport verify_decay(const AffineOperatorFamily& family, double tolerance) {
  DecayReport report;
  report.tolerance = tolerance;
  for (std::size_t m = 0; m < family.num_terms(); ++m) {
    const auto decomp = solve_gevp(family.term(m), family.b0());
    DecayEntry entry;
    entry.claimed = family.kappa().kappa[m];
    entry.measured = decomp.count() == 0
                         ? 0.0
                         : std::max(std::abs(decomp.values(0)),
                                    std::abs(decomp.values(decomp.count() - 1)));
    entry.violated = entry.measured > entry.claimed + tolerance;
    report.entries.push_back(entry);
  }
  return report;
}

bool EllipticityReport::ok() const {
  return min_ratio >= lower_bound - 1e-12 && max_ratio <= upper_bound + 1e-12;
}

EllipticityReport verify_ellipticity(const AffineOperatorFamily& family, std::size_t n_samples,
                                     std::uint64_t seed) {
  EllipticityReport report;
  report.samples = n_samples;
  report.seed = seed;
  const double s = family.kappa().l1();
  report.lower_bound = 1.0 - s;
  report.upper_bound = 1.0 + s;
  report.min_ratio = std::numeric_limits<double>::infinity();
  report.max_ratio = -std::numeric_limits<double>::infinity();
  BoxSampler sampler(seed);
  const auto n = family.dim();
  for (std::size_t k = 0; k < n_samples; ++k) {
    const auto y = sampler.point(family.num_terms());
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = sampler.symmetric();
    const Matrix B = assemble_at(family, y);
    const double ratio = v.dot(B * v) / v.dot(family.b0() * v);
    report.min_ratio = std::min(report.min_ratio, ratio);
    report.max_ratio = std::max(report.max_ratio, ratio);
  }
  return report;
}

nlohmann::json family_to_json(const AffineOperatorFamily& family) {
  nlohmann::json doc;
  doc["dim"] = family.dim();
  doc["mass"] = matrix_to_json(family.mass());
  doc["B0"] = matrix_to_json(family.b0());
  auto terms = nlohmann::json::array();
  for (const auto& t : family.terms()) terms.push_back(matrix_to_json(t));
  doc["terms"] = std::move(terms);
  doc["kappa"] = family.kappa().kappa;
  if (family.kappa().p_exponent != 1.0) doc["p"] = family.kappa().p_exponent;
  return doc;
}

AffineOperatorFamily family_from_json(const nlohmann::json& doc) {
  try {
    const auto n = doc.at("dim").get<Eigen::Index>();
    require(n > 0, ErrorKind::InvalidFamily, "dim must be positive");
    Matrix mass = matrix_from_json(doc.at("mass"), n, "mass");
    Matrix b0 = matrix_from_json(doc.at("B0"), n, "B0");
    std::vector<Matrix> terms;
    const auto& jt = doc.at("terms");
    require(jt.is_array(), ErrorKind::InvalidFamily, "terms must be an array");
    for (std::size_t m = 0; m < jt.size(); ++m) {
      terms.push_back(matrix_from_json(jt[m], n, "terms[" + std::to_string(m) + "]"));
    }
    DecaySequence kappa{doc.at("kappa").get<std::vector<double>>(), doc.value("p", 1.0)};
    return AffineOperatorFamily(std::move(b0), std::move(terms), std::move(mass),
                                std::move(kappa));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidFamily, std::string("malformed family document: ") + e.what());
  }
}

AffineOperatorFamily load_family(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidFamily, path.string() + ": " + e.what());
  }
  return family_from_json(doc);
}

void save_family(const AffineOperatorFamily& family, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << family_to_json(family).dump() << '\n';
}

std::uint64_t family_hash(const AffineOperatorFamily& family) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix_bytes = [&](const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= p[i];
      h *= 1099511628211ULL;
    }
  };
  auto mix_matrix = [&](const Matrix& A) {
    mix_bytes(A.data(), sizeof(double) * static_cast<std::size_t>(A.size()));
  };
  const std::int64_t dims[2] = {family.dim(), static_cast<std::int64_t>(family.num_terms())};
  mix_bytes(dims, sizeof dims);
  mix_matrix(family.b0());
  mix_matrix(family.mass());
  for (const auto& t : family.terms()) mix_matrix(t);
  return h;
}

nlohmann::json to_json(const DecayReport& report) {
  nlohmann::json doc;
  doc["tolerance"] = report.tolerance;
  doc["ok"] = report.ok();
  auto entries = nlohmann::json::array();
  for (std::size_t m = 0; m < report.entries.size(); ++m) {
    const auto& e = report.entries[m];
    entries.push_back({{"term", m + 1},
                       {"claimed", e.claimed},
                       {"measured", e.measured},
                       {"violated", e.violated}});
  }
  doc["terms"] = std::move(entries);
  return doc;
}

nlohmann::json to_json(const EllipticityReport& report) {
  return {{"lower_bound", report.lower_bound}, {"upper_bound", report.upper_bound},
          {"min_ratio", report.min_ratio},     {"max_ratio", report.max_ratio},
          {"samples", report.samples},         {"seed", report.seed},
          {"ok", report.ok()}};
}

}  // namespace sceig
