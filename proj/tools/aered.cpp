#include "aered/cli/commands.hpp"
#include "aered/core/allocator.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  aered::tune_allocator();
  CLI::App app{"Hyperspectral unmixing with an autoencoder and regularization by denoising"};
  app.require_subcommand(1);

  aered::cli::Overrides overrides;
  std::uint64_t seed = 0;
  int threads = 0;

  std::string synth_config, synth_out;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic scene directory");
  synth->add_option("config", synth_config, "Scene config JSON")->required();
  synth->add_option("out_dir", synth_out, "Output scene directory")->required();
  synth->add_option("--seed", seed, "Override the config seed");

  std::string scene_dir, run_config, unmix_out;
  auto* unmix = app.add_subcommand("unmix", "Run an unmixing method on a scene");
  unmix->add_option("scene_dir", scene_dir, "Scene directory")->required();
  unmix->add_option("run_config", run_config, "Run config JSON")->required();
  unmix->add_option("out_dir", unmix_out, "Run artifacts directory")->required();
  unmix->add_option("--seed", seed, "Override the config seed");
  unmix->add_option("--threads", threads, "Thread cap (also UNMIX_THREADS)")->check(CLI::PositiveNumber);

  std::vector<std::string> run_dirs;
  std::string report_out = ".";
  auto* report = app.add_subcommand("report", "Tabulate run metrics and export abundance maps");
  report->add_option("run_dirs", run_dirs, "Run directories")->required();
  report->add_option("--out", report_out, "Where report.csv and maps/ are written");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : aered::cli::kExitConfig;
  }

  if (app.count_all() > 0) {
    for (auto* sub : {synth, unmix}) {
      if (sub->count("--seed") > 0) overrides.seed = seed;
    }
    if (unmix->count("--threads") > 0) overrides.threads = threads;
  }

  if (*synth) return aered::cli::cmd_synth(synth_config, synth_out, overrides, std::cout, std::cerr);
  if (*unmix) return aered::cli::cmd_unmix(scene_dir, run_config, unmix_out, overrides, std::cout, std::cerr);
  std::vector<std::filesystem::path> dirs(run_dirs.begin(), run_dirs.end());
  return aered::cli::cmd_report(dirs, report_out, std::cout, std::cerr);
}
