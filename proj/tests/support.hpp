#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "sceig/sampling.hpp"
#include "sceig/sparse_grid.hpp"

namespace testing {

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, sceig::BoxSampler& rng) {
  Eigen::MatrixXd A(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) A(i, j) = rng.symmetric();
  return A;
}

inline Eigen::VectorXd random_vector(Eigen::Index n, sceig::BoxSampler& rng) {
  return random_matrix(n, 1, rng).col(0);
}

inline Eigen::MatrixXd random_symmetric(Eigen::Index n, sceig::BoxSampler& rng) {
  const Eigen::MatrixXd A = random_matrix(n, n, rng);
  return 0.5 * (A + A.transpose());
}

// Well conditioned SPD: A A^T + n I.
inline Eigen::MatrixXd random_spd(Eigen::Index n, sceig::BoxSampler& rng) {
  const Eigen::MatrixXd A = random_matrix(n, n, rng);
  return A * A.transpose() + static_cast<double>(n) * Eigen::MatrixXd::Identity(n, n);
}

inline Eigen::MatrixXd random_orthogonal(Eigen::Index n, sceig::BoxSampler& rng) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(random_matrix(n, n, rng));
  return qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
}

// Downward closure of a handful of random indices in [0, max_level]^dims.
inline sceig::MultiIndexSet random_monotone_set(std::size_t dims, unsigned max_level,
                                                sceig::BoxSampler& rng) {
  sceig::MultiIndexSet seeds;
  const int count = 1 + static_cast<int>(rng.unit() * 4.0);
  for (int c = 0; c < count; ++c) {
    std::vector<unsigned> dense(dims);
    for (auto& level : dense) level = static_cast<unsigned>(rng.unit() * (max_level + 1));
    seeds.insert(sceig::MultiIndex(dense));
  }
  return sceig::downward_closure(seeds);
}

inline double monomial(const sceig::MultiIndex& beta, const std::vector<double>& y) {
  double v = 1.0;
  for (const auto& [dim, level] : beta.entries()) v *= std::pow(y[dim], static_cast<int>(level));
  return v;
}

inline double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

}  // namespace testing
