// Command-line driver: isolation/decay checks, collocation, convergence
// studies and the crossing demonstration.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sceig/error.hpp"
#include "sceig/study.hpp"

namespace {

struct CommonOptions {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::string threads;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "JSON study configuration")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", opts.out_dir, "output directory (overrides config.output)");
  cmd->add_option("--seed", opts.seed, "random seed (overrides config.seed)");
  cmd->add_option("--threads", opts.threads, "worker threads: a number or 'auto'");
}

sceig::StudyConfig resolve(const CommonOptions& opts) {
  auto config = sceig::load_study_config(opts.config_path);
  if (opts.seed) config.seed = *opts.seed;
  if (!opts.out_dir.empty()) config.output = opts.out_dir;
  if (!opts.threads.empty()) {
    if (opts.threads == "auto") {
      config.threads = 0;
    } else {
      try {
        config.threads = static_cast<unsigned>(std::stoul(opts.threads));
      } catch (const std::exception&) {
        throw sceig::Error(sceig::ErrorKind::Config, "--threads expects a number or 'auto'");
      }
    }
  }
  return config;
}

std::filesystem::path output_dir(const sceig::StudyConfig& config) {
  return config.output.empty() ? std::filesystem::path(".") : std::filesystem::path(config.output);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse-grid collocation of parametric eigenspaces"};
  app.require_subcommand(1);

  CommonOptions check_opts, colloc_opts, study_opts, demo_opts;
  auto* check = app.add_subcommand("check", "ellipticity, decay, Weyl envelope and isolation report");
  add_common(check, check_opts);
  auto* colloc = app.add_subcommand("collocate", "build and persist the collocated eigenbasis");
  add_common(colloc, colloc_opts);
  auto* study = app.add_subcommand("study", "convergence study over the budget schedule");
  add_common(study, study_opts);
  auto* demo = app.add_subcommand("crossing-demo", "canonical vs raw eigenvector interpolation");
  add_common(demo, demo_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (check->parsed()) {
      const auto config = resolve(check_opts);
      const auto report = sceig::run_check(config);
      if (config.output.empty()) {
        std::cout << report.dump(2) << '\n';
      } else {
        std::filesystem::create_directories(config.output);
        std::ofstream(output_dir(config) / "check.json") << report.dump(2) << '\n';
        std::cout << "wrote " << (output_dir(config) / "check.json").string() << '\n';
      }
    } else if (colloc->parsed()) {
      const auto config = resolve(colloc_opts);
      const auto cb = sceig::run_collocate(config);
      const auto dir = output_dir(config);
      std::filesystem::create_directories(dir);
      sceig::save_collocated(cb, dir / "collocated.json");
      std::cout << "points " << cb.points().size() << ", indices " << cb.set().size()
                << ", min gram sigma " << cb.diagnostics().min_gram_sigma << '\n'
                << "wrote " << (dir / "collocated.json").string() << '\n';
    } else if (study->parsed()) {
      const auto config = resolve(study_opts);
      const auto result = sceig::run_convergence_study(config);
      sceig::write_study(result, output_dir(config));
      std::cout << sceig::study_csv(result);
      if (result.rate.available) {
        std::cout << "fitted rate " << sceig::format_double(result.rate.rate) << '\n';
      } else {
        std::cout << "rate " << result.rate.note << '\n';
      }
    } else if (demo->parsed()) {
      const auto config = resolve(demo_opts);
      const auto result = sceig::run_crossing_demo(config);
      sceig::write_crossing(result, output_dir(config));
      std::cout << sceig::crossing_csv(result);
    }
  } catch (const sceig::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
