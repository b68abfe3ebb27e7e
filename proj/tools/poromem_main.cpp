// Command-line front end: validate a microstructure, solve the cell
// problems, and run the macroscopic models.
//
// Exit codes: 0 success, 2 configuration/geometry error, 3 numerical failure.

#include "poromem/pipeline.hpp"

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    double tol = -1.0;
    int threads = 0;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "JSON run configuration")->required();
    cmd->add_option("--out", opts.out_dir, "output directory (overrides the config)");
    cmd->add_option("--tol", opts.tol, "solver tolerance (overrides the config)");
    cmd->add_option("--threads", opts.threads,
                    "worker thread count (default: POROMEM_THREADS or 1)");
}

poromem::cfg::RunConfig load(const CommonOpts& opts) {
    poromem::cfg::RunConfig cfg = poromem::cfg::load_config(opts.config_path);
    if (!opts.out_dir.empty()) {
        cfg.output_directory = opts.out_dir;
        cfg.flow_tensor_path = cfg.output_directory + "/flow_tensors.json";
        cfg.diffusion_tensor_path = cfg.output_directory + "/d_star.json";
    }
    if (opts.tol > 0.0) {
        cfg.cell_tol = opts.tol;
        cfg.macro_tol = opts.tol;
    }
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"poromem: effective flow and transport across a thin porous membrane"};
    app.require_subcommand(1);

    CommonOpts validate_opts, cellflow_opts, celldiff_opts, macro_opts;
    CLI::App* c_validate =
        app.add_subcommand("validate", "check the microstructure and report measures");
    add_common(c_validate, validate_opts);
    CLI::App* c_cellflow =
        app.add_subcommand("cell-flow", "solve the Stokes cell problems and write the tensors");
    add_common(c_cellflow, cellflow_opts);
    CLI::App* c_celldiff = app.add_subcommand(
        "cell-diffusion", "solve the diffusion correctors and write the homogenized tensor");
    add_common(c_celldiff, celldiff_opts);
    CLI::App* c_macro =
        app.add_subcommand("macro-run", "integrate the effective flow and transport models");
    add_common(c_macro, macro_opts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (c_validate->parsed()) {
            poromem::pipeline::cmd_validate(load(validate_opts), std::cout);
        } else if (c_cellflow->parsed()) {
            poromem::pipeline::cmd_cell_flow(load(cellflow_opts), std::cout);
        } else if (c_celldiff->parsed()) {
            poromem::pipeline::cmd_cell_diffusion(load(celldiff_opts), std::cout);
        } else if (c_macro->parsed()) {
            poromem::pipeline::cmd_macro_run(load(macro_opts), std::cout);
        }
    } catch (const poromem::cfg::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const poromem::geom::GeometryError& e) {
        std::cerr << "geometry error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const poromem::lin::SolverError& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
