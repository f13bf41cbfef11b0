#include <CLI11.hpp>

#include <iostream>

#include "ineqlab/cli/config.hpp"
#include "ineqlab/cli/runner.hpp"

namespace {

int dispatch(const std::string& config, const ineqlab::cli::Options& opt, bool sweep) {
  using namespace ineqlab::cli;
  try {
    const auto status = run_config(load_config(config), opt, sweep);
    for (const auto& line : status.lines) (status.code == kExitOk ? std::cout : std::cerr) << line << '\n';
    return status.code;
  } catch (const UsageError& e) {
    std::cerr << "ineqlab: usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "ineqlab: error: " << e.what() << '\n';
    return kExitFailed;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical experiments on functional inequalities and fast diffusion flows"};
  app.require_subcommand(1);
  ineqlab::cli::Options opt;
  std::string out = opt.out_dir.string();
  std::uint64_t seed = 0;
  app.add_option("--out", out, "Output directory")->capture_default_str();
  auto* seed_opt = app.add_option("--seed", seed, "Override the config seed");
  app.add_option("--tol-scale", opt.tol_scale, "Multiply every assertion tolerance")->capture_default_str();

  std::string config;
  auto* run = app.add_subcommand("run", "Run an experiment, sweep or suite config");
  run->add_option("config", config, "TOML or JSON config")->required();
  auto* sweep = app.add_subcommand("sweep", "Run a parameter-lattice sweep config");
  sweep->add_option("config", config, "TOML or JSON config")->required();
  for (auto* sub : {run, sweep}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "ineqlab: usage error: " << e.what() << '\n';
    return ineqlab::cli::kExitUsage;
  }
  opt.out_dir = out;
  if (*seed_opt) opt.seed = seed;
  return dispatch(config, opt, sweep->parsed());
}
