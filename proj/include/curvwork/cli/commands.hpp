#pragma once

#include "curvwork/cli/config.hpp"
#include "curvwork/cli/table.hpp"

#include <optional>
#include <string>
#include <vector>

namespace curvwork::cli {

struct Output {
  std::string name;  // file stem
  ResultTable table;
  std::optional<PlotSpec> plot;
};

struct CommandResult {
  std::vector<Output> outputs;
  std::vector<std::string> summary;
  bool failed = false;  // selfcheck only
};

CommandResult cmd_curvature_map(const RunConfig& config);
CommandResult cmd_cycle_work(const RunConfig& config);
CommandResult cmd_radius_sweep(const RunConfig& config);
CommandResult cmd_phase_sweep(const RunConfig& config);
CommandResult cmd_eta_map(const RunConfig& config);
CommandResult cmd_sde_ensemble(const RunConfig& config);
CommandResult cmd_fp_solve(const RunConfig& config);
CommandResult cmd_jarzynski(const RunConfig& config);
CommandResult cmd_selfcheck(const RunConfig& config);

CommandResult run_command(const RunConfig& config);

/// Stamps the run metadata on every table, then writes CSV files and plot
/// scripts into config.out_dir. Returns the written paths.
std::vector<std::string> write_outputs(CommandResult& result, const RunConfig& config);

}  // namespace curvwork::cli
