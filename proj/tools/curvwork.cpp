#include "curvwork/cli/commands.hpp"
#include "curvwork/errors.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

enum ExitCode { kOk = 0, kValidation = 1, kNumerical = 2, kSelfcheck = 3 };

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geometric work and its fluctuations in driven open quantum systems"};
  app.set_version_flag("--version", CURVWORK_VERSION);

  std::string command;
  std::string config_path;
  curvwork::cli::Overrides overrides;
  std::uint64_t seed = 0;
  double tolerance = 0.0;
  unsigned threads = 0;
  std::string out_dir;
  bool quiet = false;

  app.add_option("command", command, "Command to run (defaults to the config's \"command\")");
  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "Base seed (overrides the config)");
  auto* tol_opt = app.add_option("--tolerance", tolerance, "Quadrature tolerance (overrides the config)");
  auto* threads_opt = app.add_option("--threads", threads, "Worker threads (default: CURVWORK_THREADS or 1)");
  auto* out_opt = app.add_option("--out", out_dir, "Output directory");
  app.add_flag("-q,--quiet", quiet, "Suppress the summary on stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kValidation;
  }

  if (*seed_opt) overrides.seed = seed;
  if (*tol_opt) overrides.tolerance = tolerance;
  if (*threads_opt) overrides.threads = threads;
  if (*out_opt) overrides.out_dir = out_dir;
  if (!command.empty()) overrides.command = command;

  try {
    curvwork::cli::Json doc = curvwork::cli::Json::object();
    if (!config_path.empty()) {
      doc = curvwork::cli::load_config_file(config_path);
    } else if (command != "selfcheck") {
      throw curvwork::ValidationError("--config is required for '" + (command.empty() ? "<none>" : command) + "'");
    }
    const auto config = curvwork::cli::make_run_config(std::move(doc), overrides);
    auto result = curvwork::cli::run_command(config);
    const auto files = curvwork::cli::write_outputs(result, config);
    if (!quiet) {
      for (const auto& line : result.summary) std::cout << line << '\n';
      for (const auto& f : files) std::cout << "wrote " << f << '\n';
    }
    return result.failed ? kSelfcheck : kOk;
  } catch (const curvwork::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const curvwork::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  }
}
