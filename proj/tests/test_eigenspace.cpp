#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "sceig/eigenspace.hpp"
#include "sceig/error.hpp"
#include "support.hpp"

using namespace sceig;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

template <typename F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::Config;
}

}  // namespace

TEST_CASE("cluster selections are ascending, distinct and 1-based") {
  ClusterSelection J{2, 3};
  CHECK(J.size() == 2);
  CHECK(J.contains(3));
  CHECK_FALSE(J.contains(1));
  CHECK_THROWS_AS(ClusterSelection(std::vector<int>{}), Error);
  CHECK_THROWS_AS(ClusterSelection({3, 2}), Error);
  CHECK_THROWS_AS(ClusterSelection({0, 1}), Error);
  CHECK_THROWS_AS(ClusterSelection({2, 2}), Error);
}

TEST_CASE("Weyl envelope") {
  const auto env = weyl_envelope({2.0}, 0.5);
  REQUIRE(env.size() == 1);
  CHECK(env[0].lower == doctest::Approx(1.0));
  CHECK(env[0].upper == doctest::Approx(3.0));
  const auto flat = weyl_envelope({1.0, 4.0}, 0.0);
  CHECK(flat[1].lower == 4.0);
  CHECK(flat[1].upper == 4.0);
  CHECK(kind_of([] { weyl_envelope({1.0}, 1.0); }) == ErrorKind::DecayViolation);
}

TEST_CASE("perturbed eigenvalues stay inside the Weyl envelope") {
  const auto fam = model_diffusion_1d(60, 0.3, 2.0, 4);
  const auto origin = solve_gevp(fam.b0(), fam.mass(), 6);
  const auto env = weyl_envelope({origin.values.data(), origin.values.data() + 6}, fam.kappa().l1());
  BoxSampler rng(8);
  for (int s = 0; s < 30; ++s) {
    const auto dec = solve_gevp(assemble_at(fam, rng.point(4)), fam.mass(), 6);
    for (int i = 0; i < 6; ++i) CHECK(env[i].contains(dec.values[i], 1e-12));
  }
}

TEST_CASE("isolation parameter") {
  CHECK(isolation_parameter(1.0, 0.1) == doctest::Approx(0.7 / 1.1).epsilon(1e-15));
  CHECK(std::abs(isolation_parameter(1.0, 0.1) - 0.6363636363636364) <= 1e-15);
  CHECK(isolation_parameter(0.8, 0.0) == 0.8);
  // Precondition delta0 > 2 / (1/s - 1): for s = 0.5 that is delta0 > 2.
  CHECK(kind_of([] { isolation_parameter(1.5, 0.5); }) == ErrorKind::NotProvablyIsolated);
  CHECK(isolation_parameter(3.0, 0.5) == doctest::Approx((3.0 - 5.0 * 0.5) / 1.5));
}

TEST_CASE("cluster gaps") {
  const VectorXd v = Eigen::Vector3d(1.0, 2.0, 5.0);
  CHECK(cluster_gap(v, {1, 2}) == doctest::Approx(3.0));
  CHECK(relative_cluster_gap(v, {1, 2}) == doctest::Approx(1.5));
  CHECK(cluster_gap(v, {2}) == doctest::Approx(1.0));
  CHECK(std::isinf(cluster_gap(v, {1, 2, 3})));
}

TEST_CASE("check_isolation on constant families") {
  const MatrixXd I = MatrixXd::Identity(3, 3);
  const auto fam = synthetic_family(Eigen::Vector3d(1.0, 2.0, 5.0).asDiagonal(), {}, I, {});
  const auto rep = check_isolation(fam, {1, 2}, 0.5, 10, 1);
  CHECK(rep.isolated);
  CHECK(rep.n_samples == 10);
  CHECK(rep.delta_observed == doctest::Approx(1.5));
  for (const auto& s : rep.samples) CHECK(s.gap / s.max_cluster_value == doctest::Approx(1.5));
  CHECK_FALSE(check_isolation(fam, {1, 2}, 2.0, 10, 1).isolated);

  const auto all = check_isolation(fam, {1, 2, 3}, 100.0, 5, 1);
  CHECK(all.isolated);
  CHECK(std::isinf(all.delta_observed));
  CHECK(to_json(all)["delta_observed"].is_null());
}

TEST_CASE("check_isolation on the 2D model sees the square's spectral gap") {
  const auto fam = model_diffusion_2d(16, 0.01, 2.0, 3);
  const auto rep = check_isolation(fam, {2, 3}, 0.5, 20, 4);
  CHECK(rep.isolated);
  CHECK(rep.delta_observed == doctest::Approx(0.6).epsilon(0.05));
}

TEST_CASE("check_isolation honours the a priori isolation bound on the model problem") {
  const auto fam = model_diffusion_1d(40, 0.1, 2.0, 3);
  const auto origin = solve_gevp(fam.b0(), fam.mass(), 2);
  const double delta0 = relative_cluster_gap(origin.values, {1});
  const double delta = isolation_parameter(delta0, fam.kappa().l1());
  CHECK(check_isolation(fam, {1}, delta, 50, 3).isolated);
}

TEST_CASE("spectral projector algebra") {
  BoxSampler rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 6 + trial;
    const MatrixXd K = testing::random_spd(n, rng);
    const MatrixXd M = testing::random_spd(n, rng);
    const auto dec = solve_gevp(K, M);
    const ClusterSelection J{2, 3, 4};
    const VectorXd v = testing::random_vector(n, rng);
    const VectorXd w = testing::random_vector(n, rng);
    const VectorXd Pv = spectral_projector_apply(dec, J, M, v);
    const VectorXd PPv = spectral_projector_apply(dec, J, M, Pv);
    CHECK((PPv - Pv).norm() <= 1e-12 * v.norm());
    const VectorXd Pw = spectral_projector_apply(dec, J, M, w);
    CHECK(std::abs(w.dot(M * Pv) - Pw.dot(M * v)) <= 1e-10 * v.norm() * w.norm() * M.norm());
    // Fixes its range, annihilates the complement.
    CHECK((spectral_projector_apply(dec, J, M, dec.vectors.col(2)) - dec.vectors.col(2)).norm() <= 1e-12);
    CHECK(spectral_projector_apply(dec, J, M, dec.vectors.col(0)).norm() <= 1e-12);
  }
}

TEST_CASE("cluster coverage") {
  const auto dec = solve_gevp(MatrixXd::Identity(3, 3) * 2.0, MatrixXd::Identity(3, 3), 2);
  CHECK(kind_of([&] { cluster_vectors(dec, {2, 3}); }) == ErrorKind::ClusterCoverage);
}

TEST_CASE("canonical basis at the origin reproduces the reference vectors") {
  BoxSampler rng(12);
  const MatrixXd M = testing::random_spd(7, rng);
  const auto dec = solve_gevp(testing::random_spd(7, rng), M);
  const ClusterSelection J{3, 4};
  const MatrixXd ref = cluster_vectors(dec, J);
  const auto basis = canonical_basis(dec, ref, J, M);
  CHECK((basis.vectors - ref).norm() <= 1e-12);
  CHECK(basis.gram_sigma_min == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("canonical basis is invariant under sign flips and remixing") {
  BoxSampler rng(13);
  const int n = 8;
  const MatrixXd M = testing::random_spd(n, rng);
  const MatrixXd K0 = testing::random_spd(n, rng);
  const ClusterSelection J{2, 3, 4};
  const MatrixXd ref = cluster_vectors(solve_gevp(K0, M), J);
  const MatrixXd K1 = K0 + 0.1 * testing::random_symmetric(n, rng);
  auto dec = solve_gevp(K1, M);
  const auto base = canonical_basis(dec, ref, J, M);

  auto flipped = dec;
  flipped.vectors.col(2) *= -1.0;
  CHECK((canonical_basis(flipped, ref, J, M).vectors - base.vectors).norm() <= 1e-12);

  auto remixed = dec;
  const MatrixXd Q = testing::random_orthogonal(3, rng);
  remixed.vectors.middleCols(1, 3) = dec.vectors.middleCols(1, 3) * Q;
  CHECK((canonical_basis(remixed, ref, J, M).vectors - base.vectors).cwiseAbs().maxCoeff() <= 1e-10);

  // The basis spans the cluster eigenspace.
  const auto angles = principal_angles(base.vectors, cluster_vectors(dec, J), M);
  CHECK(angles.maxCoeff() < 1e-8);
}

TEST_CASE("degenerate reference vectors are rejected") {
  const MatrixXd I = MatrixXd::Identity(4, 4);
  const auto dec = solve_gevp(Eigen::Vector4d(1, 2, 3, 4).asDiagonal(), I);
  MatrixXd ref = MatrixXd::Zero(4, 1);
  ref(3, 0) = 1.0;  // orthogonal to u_1
  CHECK(kind_of([&] { canonical_basis(dec, ref, {1}, I); }) == ErrorKind::DegenerateBasis);
}

TEST_CASE("principal angles") {
  const MatrixXd I = MatrixXd::Identity(2, 2);
  for (double t : {0.3, 1.2, 1e-10}) {
    MatrixXd a(2, 1), b(2, 1);
    a << 1.0, 0.0;
    b << std::cos(t), std::sin(t);
    CHECK(largest_principal_angle(a, 3.0 * b, I) == doctest::Approx(t).epsilon(1e-9));
  }
  MatrixXd a(2, 1), b(2, 1);
  a << 1.0, 0.0;
  b << 0.0, 2.0;
  CHECK(largest_principal_angle(a, b, I) == doctest::Approx(std::numbers::pi / 2));

  BoxSampler rng(3);
  const MatrixXd M = testing::random_spd(6, rng);
  const MatrixXd A = testing::random_matrix(6, 3, rng);
  const auto self = principal_angles(A, A * testing::random_orthogonal(3, rng), M);
  CHECK(self.maxCoeff() < 1e-7);
}

TEST_CASE("canonical basis is continuous through an interior crossing") {
  const auto fam = designed_crossing_family();
  const MatrixXd& M = fam.mass();
  const ClusterSelection J{2, 3};
  const MatrixXd ref = cluster_vectors(solve_gevp(fam.b0(), M), J);

  // Locate the crossing of the cluster eigenvalues by bisection on their gap
  // sign, read from the block that owns each sorted eigenvector.
  auto owner_of_second = [&](double y) {
    const auto dec = solve_gevp(assemble_at(fam, std::vector<double>{y}), M);
    return std::abs(dec.vectors(1, 1)) > std::abs(dec.vectors(2, 1));
  };
  double lo = -1.0, hi = 1.0;
  REQUIRE(owner_of_second(lo) != owner_of_second(hi));
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (owner_of_second(mid) == owner_of_second(lo) ? lo : hi) = mid;
  }
  const double eps = 1e-6;
  const auto left = solve_gevp(assemble_at(fam, std::vector<double>{lo - eps}), M);
  const auto right = solve_gevp(assemble_at(fam, std::vector<double>{hi + eps}), M);

  const MatrixXd cl = canonical_basis(left, ref, J, M).vectors;
  const MatrixXd cr = canonical_basis(right, ref, J, M).vectors;
  CHECK((cl - cr).norm() < 1e-4);

  // Individually sorted eigenvectors swap: u_2 on one side is nearly
  // orthogonal to u_2 on the other.
  CHECK(largest_principal_angle(left.vectors.col(1), right.vectors.col(1), M) >
        std::numbers::pi / 2 - 0.1);
}
