// Runs every acceptance criterion and prints one PASS/FAIL line per criterion.
//
// Exit status is 0 when every criterion passes. Criteria named with
// --expect-fail are known to be unattainable as stated; for those the FAIL
// line is still printed, and the exit status flags them only if they start
// passing, so a fix is noticed.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "sceig/collocation.hpp"
#include "sceig/eigenspace.hpp"
#include "sceig/error.hpp"
#include "sceig/sparse_grid.hpp"
#include "sceig/study.hpp"
#include "support.hpp"

using namespace sceig;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double fem_eigenvalue_1d(int k, int n_elements) {
  const double h = 1.0 / n_elements;
  const double c = std::cos(k * std::numbers::pi * h);
  return 6.0 / (h * h) * (1.0 - c) / (2.0 + c);
}

Outcome eigensolver_oracle() {
  const auto t0 = Clock::now();
  const auto fam = model_diffusion_1d(100, 0.0, 2.0, 0);
  const auto dec = solve_gevp(fam.b0(), fam.mass(), 5);
  const double elapsed = seconds_since(t0);
  double worst = 0.0;
  for (int k = 1; k <= 5; ++k) worst = std::max(worst, testing::rel_diff(dec.values[k - 1], fem_eigenvalue_1d(k, 100)));
  return {worst <= 1e-10 && elapsed < 1.0,
          fmt("max rel err %.3g (<= 1e-10), %.3f s (< 1 s)", worst, elapsed)};
}

Outcome weyl_envelope_check() {
  const auto fam = model_diffusion_1d(100, 0.3, 2.0, 4);
  const auto origin = solve_gevp(fam.b0(), fam.mass(), 6);
  const auto env = weyl_envelope({origin.values.data(), origin.values.data() + 6}, fam.kappa().l1());
  BoxSampler rng(20260101);
  int violations = 0;
  for (int s = 0; s < 100; ++s) {
    const auto dec = solve_gevp(assemble_at(fam, rng.point(4)), fam.mass(), 6);
    for (int i = 0; i < 6; ++i) violations += env[i].contains(dec.values[i], 1e-12) ? 0 : 1;
  }
  return {violations == 0, fmt("%d violations in 100 samples x 6 eigenvalues", violations)};
}

Outcome isolation_bound_check() {
  const double delta = isolation_parameter(1.0, 0.1);
  const double formula_err = std::abs(delta - 0.6363636363636364);

  // delta0 = 1 for J = {1}; the single term is B0^{1/2} S B0^{1/2} scaled so
  // the pencil (B1, B0) has spectral radius exactly 0.1.
  BoxSampler rng(77);
  const VectorXd d = (VectorXd(6) << 1.0, 2.0, 3.0, 4.5, 6.0, 8.0).finished();
  const MatrixXd b0 = d.asDiagonal();
  const MatrixXd Q = testing::random_orthogonal(6, rng);
  const VectorXd s = (VectorXd(6) << 1.0, -1.0, 0.6, -0.3, 0.8, 0.1).finished();
  const MatrixXd S = Q * s.asDiagonal() * Q.transpose();
  const VectorXd r = d.cwiseSqrt();
  MatrixXd b1 = 0.1 * r.asDiagonal() * S * r.asDiagonal();
  b1 = 0.5 * (b1 + b1.transpose());
  const auto fam = synthetic_family(b0, {b1}, MatrixXd::Identity(6, 6), {0.1});
  const double measured = verify_decay(fam).entries[0].measured;

  const auto rep = check_isolation(fam, {1}, delta, 200, 5);
  std::size_t ok = 0;
  for (const auto& smp : rep.samples) ok += smp.gap / smp.max_cluster_value >= delta ? 1 : 0;
  return {formula_err <= 1e-15 && rep.isolated && ok == 200 && std::abs(measured - 0.1) <= 1e-12,
          fmt("delta=%.16f (err %.2g), measured kappa %.15f, isolated on %zu/200 samples, min rel gap %.4f",
              delta, formula_err, measured, ok, rep.delta_observed)};
}

MultiIndexSet random_set(BoxSampler& rng) {
  const std::size_t dims = 1 + static_cast<std::size_t>(rng.unit() * 3.0);
  return testing::random_monotone_set(dims, 4, rng);
}

Outcome combination_exactness() {
  const auto fam = std::make_shared<const AffineOperatorFamily>(model_diffusion_1d(6, 0.3, 2.0, 3));
  const int n = static_cast<int>(fam->dim());
  BoxSampler rng(4242);
  double worst_random = 0.0;
  double worst_nodes = 0.0;
  double worst_arbitrary = 0.0;
  for (int t = 0; t < 20; ++t) {
    const auto A = random_set(rng);
    const SparseInterpolant I(A);
    const auto npts = I.points().size();
    std::vector<MatrixXd> zero(npts, MatrixXd::Zero(n, 1));
    const CollocatedEigenbasis cb(fam, {1}, A, BasisTarget::Canonical, MatrixXd::Zero(n, 1), zero,
                                  std::vector<VectorXd>(npts, VectorXd::Zero(1)), {});

    std::vector<MatrixXd> coeff;
    for (std::size_t k = 0; k < A.size(); ++k) coeff.push_back(testing::random_matrix(n, 1, rng));
    auto poly = [&](std::vector<double> y) {
      y.resize(3, 0.0);
      MatrixXd out = MatrixXd::Zero(n, 1);
      std::size_t k = 0;
      for (const auto& beta : A) out += coeff[k++] * testing::monomial(beta, y);
      return out;
    };
    std::vector<MatrixXd> data;
    for (const auto& x : I.points()) data.push_back(poly(x));
    const auto surrogate = cb.with_bases(data);
    for (int s = 0; s < 100; ++s) {
      const auto y = rng.point(3);
      worst_random = std::max(worst_random, (surrogate.evaluate(y) - poly(y)).cwiseAbs().maxCoeff());
    }
    for (std::size_t i = 0; i < npts; ++i) {
      worst_nodes = std::max(worst_nodes, (surrogate.evaluate(I.points()[i]) - data[i]).cwiseAbs().maxCoeff());
    }

    // Not part of the criterion: arbitrary (non-polynomial) grid data.
    std::vector<MatrixXd> noise;
    for (std::size_t i = 0; i < npts; ++i) noise.push_back(testing::random_matrix(n, 1, rng));
    const auto arbitrary = cb.with_bases(noise);
    for (std::size_t i = 0; i < npts; ++i) {
      worst_arbitrary = std::max(worst_arbitrary, (arbitrary.evaluate(I.points()[i]) - noise[i]).cwiseAbs().maxCoeff());
    }
  }
  std::printf("INFO  criterion 4: arbitrary grid data at grid points deviates by up to %.3g "
              "(Gauss-Legendre levels are not nested)\n",
              worst_arbitrary);
  return {worst_random <= 1e-10 && worst_nodes <= 1e-12,
          fmt("20 sets, max err at random points %.3g (<= 1e-10), at grid points %.3g (<= 1e-12)",
              worst_random, worst_nodes)};
}

Outcome grid_bound() {
  BoxSampler rng(5050);
  int equal = 0;
  int bounded = 0;
  std::string first_mismatch;
  for (int t = 0; t < 50; ++t) {
    const auto A = random_set(rng);
    const auto distinct = grid_points(A).size();
    const auto summed = point_count_bound(A);
    if (distinct == summed) {
      ++equal;
    } else if (first_mismatch.empty()) {
      first_mismatch = fmt(" (first mismatch: #A=%zu, |X_A|=%zu, sum=%llu)", A.size(), distinct,
                           static_cast<unsigned long long>(summed));
    }
    if (distinct <= A.size() * A.size()) ++bounded;
  }
  return {equal == 50 && bounded == 50,
          fmt("|X_A| == sum prod(alpha_m+1) on %d/50 sets, |X_A| <= (#A)^2 on %d/50 sets%s", equal,
              bounded, first_mismatch.c_str())};
}

Outcome projector_algebra() {
  BoxSampler rng(6060);
  double worst_idem = 0.0;
  double worst_adj = 0.0;
  double worst_inv = 0.0;
  for (int t = 0; t < 50; ++t) {
    const int n = 6 + static_cast<int>(rng.unit() * 10.0);
    const int terms = 1 + static_cast<int>(rng.unit() * 3.0);
    const MatrixXd b0 = testing::random_spd(n, rng);
    const MatrixXd mass = testing::random_spd(n, rng);
    std::vector<MatrixXd> bm;
    std::vector<double> kappa;
    for (int m = 0; m < terms; ++m) {
      bm.push_back(0.05 * testing::random_symmetric(n, rng));
      kappa.push_back(0.5 / terms);
    }
    const auto fam = synthetic_family(b0, bm, mass, kappa);
    const int first = 1 + static_cast<int>(rng.unit() * 3.0);
    const int size = 1 + static_cast<int>(rng.unit() * 3.0);
    std::vector<int> idx;
    for (int j = first; j < first + size; ++j) idx.push_back(j);
    const ClusterSelection J(idx);

    const MatrixXd ref = cluster_vectors(solve_gevp(b0, mass), J);
    const auto dec = solve_gevp(assemble_at(fam, rng.point(terms)), mass);

    for (int v = 0; v < 5; ++v) {
      VectorXd x = testing::random_vector(n, rng);
      VectorXd z = testing::random_vector(n, rng);
      x /= std::sqrt(x.dot(mass * x));
      z /= std::sqrt(z.dot(mass * z));
      const VectorXd Px = spectral_projector_apply(dec, J, mass, x);
      const VectorXd PPx = spectral_projector_apply(dec, J, mass, Px);
      const VectorXd Pz = spectral_projector_apply(dec, J, mass, z);
      worst_idem = std::max(worst_idem, std::sqrt((PPx - Px).dot(mass * (PPx - Px))));
      worst_adj = std::max(worst_adj, std::abs(z.dot(mass * Px) - Pz.dot(mass * x)));
    }

    const MatrixXd base = canonical_basis(dec, ref, J, mass).vectors;
    auto mixed = dec;
    const MatrixXd R = testing::random_orthogonal(size, rng);
    mixed.vectors.middleCols(first - 1, size) = dec.vectors.middleCols(first - 1, size) * R;
    for (int j = 0; j < n; ++j)
      if (rng.unit() < 0.5) mixed.vectors.col(j) *= -1.0;
    const MatrixXd remixed = canonical_basis(mixed, ref, J, mass).vectors;
    worst_inv = std::max(worst_inv, (remixed - base).cwiseAbs().maxCoeff());
  }
  return {worst_idem <= 1e-10 && worst_adj <= 1e-10 && worst_inv <= 1e-10,
          fmt("50 pairs: |P^2 x - P x| %.3g, M-adjointness %.3g, remix/sign invariance %.3g (all <= 1e-10)",
              worst_idem, worst_adj, worst_inv)};
}

StudyConfig convergence_config(std::uint64_t seed) {
  StudyConfig c;
  c.model = "diffusion1d";
  c.n = 200;
  c.c = 0.3;
  c.decay_rate = 3.0;
  c.M = 6;
  c.J = {1};
  c.delta_requested = 0.5;
  c.weights.automatic = true;
  c.weights.epsilon = 0.5;
  c.weights.p = 0.5;
  c.budgets = {0.25, 0.5, 1.0, 1.5};
  c.metric = ErrorMetric::VectorL2;
  c.n_mc = 200;
  c.seed = seed;
  return c;
}

std::string first_csv;

Outcome convergence() {
  const auto t0 = Clock::now();
  bool ok = true;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto res = run_convergence_study(convergence_config(seed));
    if (seed == 1) first_csv = study_csv(res);
    bool decreasing = true;
    for (std::size_t i = 1; i < res.records.size(); ++i)
      decreasing = decreasing && res.records[i].error < res.records[i - 1].error;
    const bool rate_ok = res.rate.available && res.rate.rate > 0.5;
    ok = ok && decreasing && rate_ok && res.records.size() == 4;
    detail += fmt("seed %llu: r=%.3f%s; ", static_cast<unsigned long long>(seed), res.rate.rate,
                  decreasing ? "" : " (not decreasing)");
  }
  const double elapsed = seconds_since(t0);
  ok = ok && elapsed < 300.0;
  return {ok, detail + fmt("%.1f s (< 300 s)", elapsed)};
}

Outcome crossing_contrast() {
  StudyConfig c;
  c.model = "crossing4";
  c.J = {2, 3};
  c.delta_requested = 0.5;
  c.weights.automatic = true;
  c.weights.epsilon = 0.5;
  c.weights.p = 1.0;
  c.budgets = {0.5, 1.0, 2.0, 4.0};
  c.metric = ErrorMetric::SubspaceAngle;
  c.n_mc = 200;
  c.seed = 0;
  const auto res = run_crossing_demo(c);
  const auto& last = res.records[3];
  const auto& prev = res.records[2];
  const bool contrast = 10.0 * last.error_canonical <= last.error_raw;
  const bool stagnant = last.error_raw >= prev.error_raw;
  std::string series;
  for (const auto& r : res.records) series += fmt(" L=%g:%.3g/%.3g", r.budget, r.error_canonical, r.error_raw);
  return {contrast && stagnant,
          fmt("finest canonical %.3g vs raw %.3g (ratio %.3g, >= 10); raw last two %.4g -> %.4g "
              "(non-decreasing: %s); canonical/raw:%s",
              last.error_canonical, last.error_raw, last.error_raw / last.error_canonical,
              prev.error_raw, last.error_raw, stagnant ? "yes" : "no", series.c_str())};
}

Outcome determinism() {
  const auto again = study_csv(run_convergence_study(convergence_config(1)));
  return {!first_csv.empty() && again == first_csv,
          fmt("seed 1 rerun: %zu-byte CSV %s", again.size(),
              again == first_csv ? "bit-identical" : "differs")};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> expect_fail;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--expect-fail") == 0 && i + 1 < argc) {
      expect_fail.insert(std::atoi(argv[++i]));
    } else {
      std::fprintf(stderr, "usage: %s [--expect-fail N]...\n", argv[0]);
      return 2;
    }
  }

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"eigensolver oracle", eigensolver_oracle},
      {"Weyl envelope", weyl_envelope_check},
      {"isolation bound", isolation_bound_check},
      {"combination exactness", combination_exactness},
      {"grid count and bound", grid_bound},
      {"projector algebra", projector_algebra},
      {"convergence rate", convergence},
      {"crossing contrast", crossing_contrast},
      {"determinism", determinism},
  };

  int unexpected = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const bool expected_red = expect_fail.count(id) != 0;
    std::printf("%s criterion %d (%s): %s%s\n", out.pass ? "PASS" : "FAIL", id, criteria[i].first,
                out.detail.c_str(), expected_red ? " [expected to fail]" : "");
    std::fflush(stdout);
    if (out.pass == expected_red) ++unexpected;
  }
  return unexpected == 0 ? 0 : 1;
}
