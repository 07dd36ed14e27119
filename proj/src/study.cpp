#include "sceig/study.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "sceig/eigenspace.hpp"
#include "sceig/error.hpp"
#include "sceig/parallel.hpp"
#include "sceig/sampling.hpp"

namespace sceig {

namespace {

constexpr double kErrorFloor = 1e-14;
constexpr double kMaxFailureFraction = 0.1;

std::string metric_name(ErrorMetric m) {
  return m == ErrorMetric::VectorL2 ? "vector-l2" : "subspace-angle";
}

ErrorMetric metric_from_name(const std::string& s) {
  if (s == "vector-l2") return ErrorMetric::VectorL2;
  if (s == "subspace-angle") return ErrorMetric::SubspaceAngle;
  throw Error(ErrorKind::Config, "unknown error metric '" + s + "'");
}

template <typename F>
auto staged(std::size_t budget_index, double budget, const char* stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.kind(), "budget #" + std::to_string(budget_index + 1) + " (L=" +
                              format_double(budget) + "), stage " + stage + ": " + e.what());
  }
}

double column_angle(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::MatrixXd& M) {
  const double na = std::sqrt(std::max(0.0, a.dot(M * a)));
  const double nb = std::sqrt(std::max(0.0, b.dot(M * b)));
  if (!(na > 0.0) || !(nb > 0.0)) return std::numbers::pi / 2;
  const Eigen::VectorXd ua = a / na;
  const Eigen::VectorXd ub = b / nb;
  const double c = std::abs(ua.dot(M * ub));
  const Eigen::VectorXd r = ub - ua * ua.dot(M * ub);
  const double s = std::sqrt(std::max(0.0, r.dot(M * r)));
  return std::atan2(s, c);
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void StudyConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::Config, msg); };
  if (model != "diffusion1d" && model != "diffusion2d" && model != "synthetic-file" &&
      model != "crossing4") {
    fail("unknown model '" + model + "'");
  }
  if (model == "synthetic-file" && family_file.empty()) fail("synthetic-file needs family_file");
  if (J.empty()) fail("cluster J is empty");
  for (std::size_t i = 1; i < budgets.size(); ++i) {
    if (!(budgets[i] > budgets[i - 1])) fail("budgets must be strictly increasing");
  }
  if (n_mc < 1) fail("n_mc must be at least 1");
  if (weights.automatic && !(weights.epsilon > 0.0 && weights.epsilon < 1.0)) {
    fail("epsilon must lie in (0, 1)");
  }
}

StudyConfig study_config_from_json(const nlohmann::json& doc) {
  StudyConfig c;
  try {
    c.model = doc.value("model", c.model);
    c.n = doc.value("n", c.n);
    c.c = doc.value("c", c.c);
    c.decay_rate = doc.value("decay_rate", c.decay_rate);
    c.M = doc.value("M", c.M);
    c.family_file = doc.value("family_file", c.family_file);
    c.J = doc.value("J", c.J);
    c.delta_requested = doc.value("delta_requested", c.delta_requested);
    if (doc.contains("weights")) {
      const auto& w = doc.at("weights");
      const auto source = w.value("source", std::string("auto"));
      if (source == "auto") {
        c.weights.automatic = true;
      } else if (source == "explicit") {
        c.weights.automatic = false;
      } else {
        throw Error(ErrorKind::Config, "weights.source must be 'auto' or 'explicit'");
      }
      c.weights.epsilon = w.value("epsilon", c.weights.epsilon);
      c.weights.p = w.value("p", c.weights.p);
      if (w.contains("delta")) c.weights.delta = w.at("delta").get<double>();
      c.weights.rho = w.value("rho", c.weights.rho);
    }
    c.budgets = doc.value("budgets", c.budgets);
    c.metric = metric_from_name(doc.value("metric", metric_name(c.metric)));
    c.n_mc = doc.value("n_mc", c.n_mc);
    c.seed = doc.value("seed", c.seed);
    c.output = doc.value("output", c.output);
    if (doc.contains("threads")) {
      const auto& t = doc.at("threads");
      c.threads = t.is_string() && t.get<std::string>() == "auto" ? 0u : t.get<unsigned>();
    }
    const auto target = doc.value("interpolate", std::string("canonical"));
    if (target == "canonical") {
      c.target = BasisTarget::Canonical;
    } else if (target == "raw") {
      c.target = BasisTarget::RawEigenvectors;
    } else {
      throw Error(ErrorKind::Config, "interpolate must be 'canonical' or 'raw'");
    }
    c.gram_threshold = doc.value("gram_threshold", c.gram_threshold);
    c.check_samples = doc.value("check_samples", c.check_samples);
    c.csv_timings = doc.value("csv_timings", c.csv_timings);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Config, std::string("malformed study config: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::json to_json(const StudyConfig& c) {
  nlohmann::json w = {{"source", c.weights.automatic ? "auto" : "explicit"},
                      {"epsilon", c.weights.epsilon},
                      {"p", c.weights.p}};
  if (c.weights.delta) w["delta"] = *c.weights.delta;
  if (!c.weights.automatic) w["rho"] = c.weights.rho;
  nlohmann::json doc = {{"model", c.model},
                        {"n", c.n},
                        {"c", c.c},
                        {"decay_rate", c.decay_rate},
                        {"M", c.M},
                        {"J", c.J},
                        {"delta_requested", c.delta_requested},
                        {"weights", w},
                        {"budgets", c.budgets},
                        {"metric", metric_name(c.metric)},
                        {"n_mc", c.n_mc},
                        {"seed", c.seed},
                        {"threads", c.threads},
                        {"interpolate", c.target == BasisTarget::Canonical ? "canonical" : "raw"},
                        {"gram_threshold", c.gram_threshold},
                        {"check_samples", c.check_samples},
                        {"csv_timings", c.csv_timings}};
  if (!c.family_file.empty()) doc["family_file"] = c.family_file;
  if (!c.output.empty()) doc["output"] = c.output;
  return doc;
}

StudyConfig load_study_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Config, path.string() + ": " + e.what());
  }
  auto config = study_config_from_json(doc);
  if (!config.family_file.empty() && std::filesystem::path(config.family_file).is_relative()) {
    config.family_file = (path.parent_path() / config.family_file).string();
  }
  return config;
}

std::shared_ptr<const AffineOperatorFamily> build_family(const StudyConfig& config) {
  if (config.model == "diffusion1d") {
    return std::make_shared<const AffineOperatorFamily>(
        model_diffusion_1d(config.n, config.c, config.decay_rate, config.M));
  }
  if (config.model == "diffusion2d") {
    return std::make_shared<const AffineOperatorFamily>(
        model_diffusion_2d(config.n, config.c, config.decay_rate, config.M));
  }
  if (config.model == "crossing4") {
    return std::make_shared<const AffineOperatorFamily>(designed_crossing_family());
  }
  if (config.model == "synthetic-file") {
    return std::make_shared<const AffineOperatorFamily>(load_family(config.family_file));
  }
  throw Error(ErrorKind::Config, "unknown model '" + config.model + "'");
}

std::vector<double> compute_tau(const DecaySequence& kappa, double delta, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw Error(ErrorKind::Parameter, "epsilon must lie in (0, 1)");
  }
  if (!(delta > 0.0)) throw Error(ErrorKind::Parameter, "delta must be positive");
  kappa.validate();
  const double l1 = kappa.l1();
  const double lp = kappa.lp();
  const double p = kappa.p_exponent;
  std::vector<double> tau;
  tau.reserve(kappa.kappa.size());
  for (double k : kappa.kappa) {
    tau.push_back((1.0 - epsilon) * (1.0 - l1) * std::pow(k, p - 1.0) /
                  (2.0 * lp * (1.0 + 1.0 / delta)));
  }
  return tau;
}

std::vector<double> compute_tau_weights(const DecaySequence& kappa, double delta, double epsilon) {
  auto rho = compute_tau(kappa, delta, epsilon);
  for (auto& t : rho) t = t + std::sqrt(1.0 + t * t);
  return rho;
}

std::vector<double> study_weights(const StudyConfig& config, const AffineOperatorFamily& family) {
  if (!config.weights.automatic) {
    if (config.weights.rho.size() != family.num_terms()) {
      throw Error(ErrorKind::Config, "explicit weights need one rho per parameter (" +
                                         std::to_string(family.num_terms()) + ")");
    }
    return config.weights.rho;
  }
  DecaySequence kappa = family.kappa();
  kappa.p_exponent = config.weights.p;
  return compute_tau_weights(kappa, config.weights.delta.value_or(config.delta_requested),
                             config.weights.epsilon);
}

ErrorEstimate estimate_error(const CollocatedEigenbasis& cb, ErrorMetric metric, std::size_t n_mc,
                             std::uint64_t seed, unsigned threads) {
  const auto& family = cb.family();
  const auto& M = family.mass();
  const auto& J = cb.cluster();
  const Eigen::Index k = std::min<Eigen::Index>(J.back() + 1, family.dim());

  // Samples are drawn up front so the estimate does not depend on scheduling.
  BoxSampler sampler(seed);
  std::vector<std::vector<double>> ys(n_mc);
  for (auto& y : ys) y = sampler.point(family.num_terms());

  std::vector<double> sq(n_mc, 0.0);
  std::vector<char> ok(n_mc, 0);
  parallel_for(n_mc, threads, [&](std::size_t s) {
    const auto& y = ys[s];
    Eigen::MatrixXd truth;
    try {
      const auto decomp = solve_gevp(assemble_at(family, y), M, k);
      if (cb.target() == BasisTarget::Canonical) {
        truth = canonical_basis(decomp, cb.ref_vectors(), J, M, kDefaultGramThreshold).vectors;
      } else {
        truth = aligned_cluster_vectors(decomp, J, cb.ref_vectors(), M);
      }
    } catch (const Error&) {
      return;
    }
    const Eigen::MatrixXd approx = cb.evaluate(y);
    if (metric == ErrorMetric::VectorL2) {
      const Eigen::MatrixXd diff = approx - truth;
      sq[s] = (diff.transpose() * family.b0() * diff).trace();
    } else if (cb.target() == BasisTarget::Canonical) {
      double angle = std::numbers::pi / 2;
      try {
        angle = largest_principal_angle(approx, truth, M);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::Rank) throw;
      }
      sq[s] = angle * angle;
    } else {
      double angle = 0.0;
      for (Eigen::Index i = 0; i < approx.cols(); ++i) {
        angle = std::max(angle, column_angle(approx.col(i), truth.col(i), M));
      }
      sq[s] = angle * angle;
    }
    ok[s] = 1;
  });

  ErrorEstimate est;
  double total = 0.0;
  for (std::size_t s = 0; s < n_mc; ++s) {
    if (ok[s]) {
      total += sq[s];
      ++est.samples;
    } else {
      ++est.failures;
    }
  }
  if (static_cast<double>(est.failures) > kMaxFailureFraction * static_cast<double>(n_mc)) {
    throw Error(ErrorKind::SampleFailures, std::to_string(est.failures) + " of " +
                                               std::to_string(n_mc) +
                                               " reference solves failed");
  }
  est.value = est.samples == 0 ? 0.0 : std::sqrt(total / static_cast<double>(est.samples));
  return est;
}

RateFit fit_rate(const std::vector<ErrorRecord>& records) {
  RateFit fit;
  if (records.size() < 2) {
    fit.note = "not-available: fewer than two budgets";
    return fit;
  }
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& r : records) {
    if (std::isfinite(r.error) && r.error > kErrorFloor && r.card_A > 0) {
      xs.push_back(std::log(static_cast<double>(r.card_A)));
      ys.push_back(std::log(r.error));
    }
  }
  if (xs.size() < 2) {
    fit.note = "degenerate: errors at roundoff level";
    return fit;
  }
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(xs.size());
  my /= static_cast<double>(xs.size());
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) {
    fit.note = "degenerate: set size constant across budgets";
    return fit;
  }
  fit.available = true;
  fit.rate = -sxy / sxx;
  fit.note = "fitted on " + std::to_string(xs.size()) + " budgets";
  return fit;
}

StudyResult run_convergence_study(const StudyConfig& config) {
  config.validate();
  StudyResult result;
  result.config = config;
  const auto family = build_family(config);
  const ClusterSelection J(config.J);
  const auto weights = study_weights(config, *family);
  const unsigned threads = resolve_threads(config.threads);

  CollocationConfig cc;
  cc.threads = threads;
  cc.gram_threshold = config.gram_threshold;
  cc.target = config.target;

  for (std::size_t b = 0; b < config.budgets.size(); ++b) {
    const double L = config.budgets[b];
    const auto start = std::chrono::steady_clock::now();
    const auto set = staged(b, L, "index-set", [&] { return anisotropic_set(weights, L); });
    const auto cb = staged(b, L, "collocate", [&] { return collocate(family, J, set, cc); });
    const auto est = staged(b, L, "estimate", [&] {
      return estimate_error(cb, config.metric, config.n_mc, config.seed, threads);
    });
    const auto stop = std::chrono::steady_clock::now();

    ErrorRecord rec;
    rec.budget = L;
    rec.card_A = set.size();
    rec.card_X = cb.points().size();
    rec.error = est.value;
    rec.failures = est.failures;
    rec.seconds = std::chrono::duration<double>(stop - start).count();
    rec.min_gram_sigma = cb.diagnostics().min_gram_sigma;
    rec.min_relative_gap = cb.diagnostics().min_relative_gap;
    if (rec.card_X > rec.card_A * rec.card_A) {
      throw Error(ErrorKind::Precondition, "grid size " + std::to_string(rec.card_X) +
                                               " exceeds (#A)^2 at budget #" +
                                               std::to_string(b + 1));
    }
    result.records.push_back(rec);
  }
  result.rate = fit_rate(result.records);
  return result;
}

std::string study_csv(const StudyResult& result) {
  std::string out = result.config.csv_timings ? "L,card_A,card_X,error,seconds\n"
                                              : "L,card_A,card_X,error\n";
  for (const auto& r : result.records) {
    out += format_double(r.budget) + ',' + std::to_string(r.card_A) + ',' +
           std::to_string(r.card_X) + ',' + format_double(r.error);
    if (result.config.csv_timings) out += ',' + format_double(r.seconds);
    out += '\n';
  }
  return out;
}

nlohmann::json study_summary(const StudyResult& result) {
  nlohmann::json doc;
  doc["config"] = to_json(result.config);
  doc["seed"] = result.config.seed;
  auto recs = nlohmann::json::array();
  for (const auto& r : result.records) {
    recs.push_back({{"L", r.budget},
                    {"card_A", r.card_A},
                    {"card_X", r.card_X},
                    {"card_A_squared", r.card_A * r.card_A},
                    {"error", r.error},
                    {"seconds", r.seconds},
                    {"failed_samples", r.failures},
                    {"min_gram_sigma", r.min_gram_sigma},
                    {"min_relative_gap", std::isfinite(r.min_relative_gap)
                                             ? nlohmann::json(r.min_relative_gap)
                                             : nlohmann::json(nullptr)}});
  }
  doc["records"] = std::move(recs);
  doc["rate"] = {{"available", result.rate.available},
                 {"value", result.rate.available ? nlohmann::json(result.rate.rate)
                                                 : nlohmann::json(nullptr)},
                 {"note", result.rate.note}};
  return doc;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << text;
}

}  // namespace

void write_study(const StudyResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text(dir / "study.csv", study_csv(result));
  write_text(dir / "summary.json", study_summary(result).dump(2) + "\n");
}

CrossingResult run_crossing_demo(const StudyConfig& config) {
  config.validate();
  CrossingResult result;
  result.config = config;
  const auto family = build_family(config);
  const ClusterSelection J(config.J);
  const auto weights = study_weights(config, *family);
  const unsigned threads = resolve_threads(config.threads);

  for (std::size_t b = 0; b < config.budgets.size(); ++b) {
    const double L = config.budgets[b];
    const auto set = staged(b, L, "index-set", [&] { return anisotropic_set(weights, L); });
    CrossingRecord rec;
    rec.budget = L;
    rec.card_A = set.size();
    for (const auto target : {BasisTarget::Canonical, BasisTarget::RawEigenvectors}) {
      CollocationConfig cc;
      cc.threads = threads;
      cc.gram_threshold = config.gram_threshold;
      cc.target = target;
      const auto cb = staged(b, L, "collocate", [&] { return collocate(family, J, set, cc); });
      rec.card_X = cb.points().size();
      const auto est = staged(b, L, "estimate", [&] {
        return estimate_error(cb, config.metric, config.n_mc, config.seed, threads);
      });
      (target == BasisTarget::Canonical ? rec.error_canonical : rec.error_raw) = est.value;
    }
    result.records.push_back(rec);
  }
  return result;
}

std::string crossing_csv(const CrossingResult& result) {
  std::string out = "L,card_A,card_X,error_canonical,error_raw\n";
  for (const auto& r : result.records) {
    out += format_double(r.budget) + ',' + std::to_string(r.card_A) + ',' +
           std::to_string(r.card_X) + ',' + format_double(r.error_canonical) + ',' +
           format_double(r.error_raw) + '\n';
  }
  return out;
}

void write_crossing(const CrossingResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text(dir / "crossing.csv", crossing_csv(result));
}

nlohmann::json run_check(const StudyConfig& config) {
  config.validate();
  const auto family = build_family(config);
  const ClusterSelection J(config.J);
  nlohmann::json doc;
  doc["config"] = to_json(config);
  doc["dim"] = family->dim();
  doc["terms"] = family->num_terms();
  doc["kappa_l1"] = family->kappa().l1();
  doc["ellipticity"] = to_json(verify_ellipticity(*family, config.check_samples, config.seed));
  doc["decay"] = to_json(verify_decay(*family));

  // Weyl envelopes for the first max(J)+1 eigenvalues on the same samples.
  const Eigen::Index k = std::min<Eigen::Index>(J.back() + 1, family->dim());
  const auto origin = solve_gevp(family->b0(), family->mass(), k);
  std::vector<double> mu0(origin.values.data(), origin.values.data() + origin.values.size());
  const auto envelope = weyl_envelope(mu0, family->kappa().l1());
  std::size_t violations = 0;
  BoxSampler sampler(config.seed);
  for (std::size_t s = 0; s < config.check_samples; ++s) {
    const auto y = sampler.point(family->num_terms());
    const auto d = solve_gevp(assemble_at(*family, y), family->mass(), k);
    for (Eigen::Index i = 0; i < k; ++i) {
      if (!envelope[static_cast<std::size_t>(i)].contains(d.values(i), 1e-12)) ++violations;
    }
  }
  doc["weyl"] = {{"eigenvalues_at_origin", mu0},
                 {"samples", config.check_samples},
                 {"violations", violations}};

  const auto iso =
      check_isolation(*family, J, config.delta_requested, config.check_samples, config.seed);
  doc["isolation"] = to_json(iso);

  // The perturbation bound applies to leading clusters {1..S}.
  const auto S = static_cast<int>(J.size());
  if (J.front() == 1 && J.back() == S && S < family->dim()) {
    const double delta0 = (origin.values(S) - origin.values(S - 1)) / origin.values(S - 1);
    nlohmann::json cor = {{"delta0", delta0}};
    try {
      cor["delta"] = isolation_parameter(delta0, family->kappa().l1());
      cor["provably_isolated"] = true;
    } catch (const Error& e) {
      cor["provably_isolated"] = false;
      cor["reason"] = e.what();
    }
    doc["isolation_bound"] = std::move(cor);
  }
  return doc;
}

CollocatedEigenbasis run_collocate(const StudyConfig& config) {
  config.validate();
  if (config.budgets.empty()) throw Error(ErrorKind::Config, "collocate needs a budget");
  const auto family = build_family(config);
  const auto weights = study_weights(config, *family);
  const auto set = anisotropic_set(weights, config.budgets.back());
  CollocationConfig cc;
  cc.threads = resolve_threads(config.threads);
  cc.gram_threshold = config.gram_threshold;
  cc.target = config.target;
  return collocate(family, ClusterSelection(config.J), set, cc);
}

}  // namespace sceig
