#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sceig/collocation.hpp"
#include "sceig/param_operator.hpp"

namespace sceig {

enum class ErrorMetric { VectorL2, SubspaceAngle };

struct WeightsConfig {
  /// "auto" derives rho_m from the analyticity radii; "explicit" uses `rho`.
  bool automatic = true;
  double epsilon = 0.5;
  double p = 1.0;
  /// Isolation parameter used in the radii; defaults to delta_requested.
  std::optional<double> delta;
  std::vector<double> rho;
};

struct StudyConfig {
  std::string model = "diffusion1d";  // diffusion1d | diffusion2d | synthetic-file | crossing4
  int n = 100;                        // elements (1D) or elements per side (2D)
  double c = 0.3;
  double decay_rate = 2.0;
  int M = 4;
  std::string family_file;
  std::vector<int> J{1};
  double delta_requested = 0.5;
  WeightsConfig weights;
  std::vector<double> budgets;
  ErrorMetric metric = ErrorMetric::VectorL2;
  std::size_t n_mc = 200;
  std::uint64_t seed = 0;
  std::string output;
  unsigned threads = 1;
  BasisTarget target = BasisTarget::Canonical;
  double gram_threshold = kDefaultGramThreshold;
  std::size_t check_samples = 200;
  /// Appends a wall-time column to the study CSV; off by default so that
  /// identical configurations produce byte-identical CSV files.
  bool csv_timings = false;

  /// Throws a config error on invalid combinations.
  void validate() const;
};

StudyConfig study_config_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const StudyConfig& config);
StudyConfig load_study_config(const std::filesystem::path& path);

std::shared_ptr<const AffineOperatorFamily> build_family(const StudyConfig& config);

/// tau_m = (1-eps)(1-||kappa||_1) kappa_m^{p-1} / (2 ||kappa||_p (1 + 1/delta)),
/// p taken from kappa.p_exponent.
std::vector<double> compute_tau(const DecaySequence& kappa, double delta, double epsilon);
/// rho_m = tau_m + sqrt(1 + tau_m^2)
std::vector<double> compute_tau_weights(const DecaySequence& kappa, double delta, double epsilon);

/// Anisotropy weights selected by the configuration for `family`.
std::vector<double> study_weights(const StudyConfig& config, const AffineOperatorFamily& family);

struct ErrorEstimate {
  double value = 0.0;
  std::size_t samples = 0;
  std::size_t failures = 0;
};

/// Monte Carlo estimate of the interpolation error against direct solves,
/// sampling y uniformly over all parameters of the family.
ErrorEstimate estimate_error(const CollocatedEigenbasis& cb, ErrorMetric metric, std::size_t n_mc,
                             std::uint64_t seed, unsigned threads = 1);

struct ErrorRecord {
  double budget = 0.0;
  std::size_t card_A = 0;
  std::size_t card_X = 0;
  double error = 0.0;
  double seconds = 0.0;
  std::size_t failures = 0;
  double min_gram_sigma = 0.0;
  double min_relative_gap = 0.0;
};

struct RateFit {
  bool available = false;
  double rate = 0.0;
  std::string note;
};

/// Least-squares fit of log(error) against log(#A); rate = -slope.
RateFit fit_rate(const std::vector<ErrorRecord>& records);

struct StudyResult {
  StudyConfig config;
  std::vector<ErrorRecord> records;
  RateFit rate;
};

StudyResult run_convergence_study(const StudyConfig& config);
std::string study_csv(const StudyResult& result);
nlohmann::json study_summary(const StudyResult& result);
void write_study(const StudyResult& result, const std::filesystem::path& dir);

struct CrossingRecord {
  double budget = 0.0;
  std::size_t card_A = 0;
  std::size_t card_X = 0;
  double error_canonical = 0.0;
  double error_raw = 0.0;
};

struct CrossingResult {
  StudyConfig config;
  std::vector<CrossingRecord> records;
};

/// Runs the budget schedule twice: interpolating canonical bases and raw
/// sorted eigenvectors, with the same metric and samples.
CrossingResult run_crossing_demo(const StudyConfig& config);
std::string crossing_csv(const CrossingResult& result);
void write_crossing(const CrossingResult& result, const std::filesystem::path& dir);

/// Ellipticity, decay, Weyl envelope and isolation diagnostics as JSON.
nlohmann::json run_check(const StudyConfig& config);

/// Builds the collocated basis for the last budget of the schedule.
CollocatedEigenbasis run_collocate(const StudyConfig& config);

std::string format_double(double x);

}  // namespace sceig
