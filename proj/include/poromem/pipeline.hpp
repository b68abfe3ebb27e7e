#ifndef POROMEM_PIPELINE_HPP
#define POROMEM_PIPELINE_HPP

// Orchestration of the full workflow: cell solves -> tensor files ->
// macroscopic runs. These are the CLI subcommand bodies; they throw
// cfg::ConfigError / geom::GeometryError for configuration problems and
// lin::SolverError for numerical failures.

#include "poromem/config.hpp"

#include <iosfwd>
#include <string>

namespace poromem::pipeline {

struct CommandResult {
    std::string summary;
};

CommandResult cmd_validate(const cfg::RunConfig& cfg, std::ostream& out);
CommandResult cmd_cell_flow(const cfg::RunConfig& cfg, std::ostream& out);
CommandResult cmd_cell_diffusion(const cfg::RunConfig& cfg, std::ostream& out);
CommandResult cmd_macro_run(const cfg::RunConfig& cfg, std::ostream& out);

} // namespace poromem::pipeline

#endif
