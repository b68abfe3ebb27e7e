#include "poromem/pipeline.hpp"

#include "poromem/io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>

namespace poromem::pipeline {

namespace {

namespace fs = std::filesystem;

void ensure_directory(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw cfg::ConfigError("cannot create output directory '" + dir + "': " + ec.message());
}

geom::ReferenceCell build_validated_cell(const cfg::RunConfig& cfg, bool require_clearance,
                                         std::ostream& out) {
    geom::ReferenceCell cell = geom::build_cell(cfg.geometry);
    const geom::ValidationReport rep = geom::validate_cell(cell, require_clearance);
    for (const auto& w : rep.warnings) out << "warning: " << w << "\n";
    if (!rep.valid) {
        throw cfg::ConfigError(rep.fluid_connected
                                   ? "geometry fails the clearance requirement (|S_s^+-| > 0)"
                                   : "fluid phase of the reference cell is disconnected");
    }
    return cell;
}

std::array<lin::Vector, 3> cell_centered_velocity(const mac::StokesProblem& pr,
                                                  const lin::Vector& X) {
    const mac::Grid& g = pr.grid();
    std::array<lin::Vector, 3> v;
    for (auto& c : v) c.assign(g.cells(), 0.0);
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const std::size_t c = g.cell(i, j, k);
                const int ip = (i + 1) % g.nx, jp = (j + 1) % g.ny;
                v[0][c] = 0.5 * (X[g.uidx(i, j, k)] + X[g.uidx(ip, j, k)]);
                v[1][c] = 0.5 * (X[pr.offset_v() + g.vidx(i, j, k)] +
                                 X[pr.offset_v() + g.vidx(i, jp, k)]);
                v[2][c] = 0.5 * (X[pr.offset_w() + g.widx(i, j, k)] +
                                 X[pr.offset_w() + g.widx(i, j, k + 1)]);
            }
    return v;
}

} // namespace

CommandResult cmd_validate(const cfg::RunConfig& cfg, std::ostream& out) {
    geom::ReferenceCell cell = geom::build_cell(cfg.geometry);
    const geom::ValidationReport rep = geom::validate_cell(cell, cfg.geometry.clearance_check);
    const auto& m = rep.measures;
    out << "reference cell " << cell.n << "x" << cell.n << "x" << cell.nz() << "\n";
    out << "|Z_f| = " << io::format_g17(m.zf) << "\n";
    out << "|Z_s| = " << io::format_g17(m.zs) << "\n";
    out << "|Gamma| = " << io::format_g17(m.gamma) << "\n";
    out << "|S_f^+| = " << io::format_g17(m.sf_plus) << ", |S_f^-| = " << io::format_g17(m.sf_minus)
        << "\n";
    out << "|S_s^+| = " << io::format_g17(m.ss_plus) << ", |S_s^-| = " << io::format_g17(m.ss_minus)
        << "\n";
    out << "fluid components: " << rep.fluid_components
        << ", solid components: " << rep.solid_components
        << ", edge-only solid contacts: " << rep.corner_contacts << "\n";
    for (const auto& w : rep.warnings) out << "warning: " << w << "\n";

    std::string mode;
    const bool ss_plus = m.ss_plus > 0.0, ss_minus = m.ss_minus > 0.0;
    if (!ss_plus && !ss_minus) {
        mode = "COUPLED eligible (|S_s^+-| = 0)";
    } else if (ss_plus && ss_minus) {
        mode = "IMPERMEABLE mode (|S_s^+-| > 0): bulk flows decouple";
    } else {
        mode = "mixed clearance (solid touches exactly one side): unsupported for the flow model";
    }
    out << mode << "\n";
    if (!rep.valid) throw cfg::ConfigError("geometry validation failed");
    CommandResult res;
    res.summary = mode;
    return res;
}

CommandResult cmd_cell_flow(const cfg::RunConfig& cfg, std::ostream& out) {
    geom::ReferenceCell cell = build_validated_cell(cfg, cfg.geometry.clearance_check, out);
    ensure_directory(cfg.output_directory);

    cellflow::CellFlowWorkspace ws(cell);
    std::array<cellflow::StokesCellSolution, 5> sols;
    io::TensorFileMeta meta;
    meta.resolution = cell.n;
    meta.tolerance = cfg.cell_tol;
    meta.config_hash = cfg.hash;
    for (std::size_t m = 0; m < cellflow::all_cell_modes.size(); ++m) {
        const auto mode = cellflow::all_cell_modes[m];
        sols[m] = ws.solve(mode, cfg.cell_tol);
        meta.mode_names.push_back(cellflow::mode_name(mode));
        meta.momentum_residuals.push_back(sols[m].momentum_residual);
        meta.divergence_residuals.push_back(sols[m].divergence_residual);
        out << "solved " << cellflow::mode_name(mode) << ": momentum residual "
            << io::format_g17(sols[m].momentum_residual) << ", max divergence "
            << io::format_g17(sols[m].divergence_residual) << "\n";
    }
    const cellflow::EffectiveFlowTensors tensors = cellflow::assemble_effective_tensors(sols, cell);
    meta.coercivity_margin = cellflow::coercivity_margin(tensors);

    const std::string path = cfg.output_directory + "/flow_tensors.json";
    io::write_flow_tensors(path, tensors, meta);
    out << "coercivity margin: " << io::format_g17(meta.coercivity_margin) << "\n";
    out << "wrote " << path << "\n";

    if (cfg.write_vtk) {
        io::write_phase_vtk(cfg.output_directory + "/phase.vtk", cell);
        for (const auto& s : sols) {
            const auto v = cell_centered_velocity(ws.problem(), s.field);
            io::VtkCellField fv, fp;
            fv.name = "velocity";
            fv.vector = &v;
            fp.name = "pressure";
            fp.scalar = &s.pressure;
            const double h = cell.h();
            io::write_vtk_structured_points(
                cfg.output_directory + "/cell_" + cellflow::mode_name(s.mode) + ".vtk",
                {cell.n, cell.n, cell.nz()}, {0.0, 0.0, -1.0}, {h, h, h}, {fv, fp});
        }
    }
    CommandResult res;
    res.summary = "flow tensors written to " + path;
    return res;
}

CommandResult cmd_cell_diffusion(const cfg::RunConfig& cfg, std::ostream& out) {
    geom::ReferenceCell cell = build_validated_cell(cfg, false, out);
    if (cell.solid_count == 0)
        throw cfg::ConfigError("cell diffusion requires a non-empty solid phase (|Z_s| > 0)");
    ensure_directory(cfg.output_directory);

    const auto eta1 = celldiff::solve_cell_diffusion(cell, 0, cfg.d_s, cfg.cell_tol);
    const auto eta2 = celldiff::solve_cell_diffusion(cell, 1, cfg.d_s, cfg.cell_tol);
    const auto tensor = celldiff::assemble_d_star(eta1, eta2, cell, cfg.d_s);

    const std::string path = cfg.output_directory + "/d_star.json";
    io::write_diffusion_tensor(path, tensor, cell.n, cfg.cell_tol, cfg.hash);
    out << "D* = [" << io::format_g17(tensor.d_star[0][0]) << ", "
        << io::format_g17(tensor.d_star[0][1]) << "; " << io::format_g17(tensor.d_star[1][0])
        << ", " << io::format_g17(tensor.d_star[1][1]) << "]\n";
    out << "wrote " << path << "\n";

    if (cfg.write_vtk) {
        const double h = cell.h();
        io::VtkCellField f1, f2;
        f1.name = "eta1";
        f1.scalar = &eta1.eta;
        f2.name = "eta2";
        f2.scalar = &eta2.eta;
        io::write_vtk_structured_points(cfg.output_directory + "/eta.vtk",
                                        {cell.n, cell.n, cell.nz()}, {0.0, 0.0, -1.0}, {h, h, h},
                                        {f1, f2});
    }
    CommandResult res;
    res.summary = "diffusion tensor written to " + path;
    return res;
}

CommandResult cmd_macro_run(const cfg::RunConfig& cfg, std::ostream& out) {
    geom::ReferenceCell cell = build_validated_cell(cfg, false, out);
    ensure_directory(cfg.output_directory);

    // tensor inputs
    cellflow::EffectiveFlowTensors flow_tensors;
    if (cfg.flow_mode == cfg::FlowMode::Coupled) {
        if (!fs::exists(cfg.flow_tensor_path))
            throw cfg::ConfigError("flow tensor file missing: " + cfg.flow_tensor_path +
                                   " (run cell-flow first)");
        flow_tensors = io::read_flow_tensors(cfg.flow_tensor_path);
    }
    celldiff::EffectiveDiffusionTensor d_star;
    const bool need_dstar = cfg.regime == transport::GammaRegime::MinusOne;
    if (need_dstar) {
        if (!fs::exists(cfg.diffusion_tensor_path))
            throw cfg::ConfigError("diffusion tensor file missing: " + cfg.diffusion_tensor_path +
                                   " (run cell-diffusion first)");
        d_star = io::read_diffusion_tensor(cfg.diffusion_tensor_path);
    }

    macroflow::BulkGrid bulk;
    bulk.n_sigma = cfg.sigma_cells;
    bulk.n_layers = cfg.bulk_layers;
    bulk.lateral = cfg.lateral;
    bulk.height = cfg.height;

    std::unique_ptr<macroflow::FlowSystem> flow;
    macroflow::FlowState flow_state;
    if (cfg.flow_mode != cfg::FlowMode::Off) {
        macroflow::InterfaceLaw law;
        law.mode = cfg.flow_mode == cfg::FlowMode::Coupled ? macroflow::InterfaceMode::Coupled
                                                           : macroflow::InterfaceMode::Impermeable;
        law.tensors = flow_tensors;
        flow = std::make_unique<macroflow::FlowSystem>(bulk, law, cfg.dt, cfg.forcing);
        flow_state = flow->initial_state();
    }

    transport::TransportGrid tgrid;
    tgrid.n_sigma = cfg.sigma_cells;
    tgrid.n_layers = cfg.bulk_layers;
    tgrid.lateral = cfg.lateral;
    tgrid.height = cfg.height;
    transport::TransportConfig tconf;
    tconf.regime = cfg.regime;
    tconf.d_f = cfg.d_f;
    tconf.d_s = cfg.d_s;
    tconf.kinetics = cfg.kinetics;
    tconf.dt = cfg.dt;
    transport::TransportSystem tsys(tgrid, tconf, cell, need_dstar ? &d_star : nullptr);
    transport::TransportState tstate = tsys.initial_state(cfg.c_f_init, cfg.c_s_init);

    const int n_steps = static_cast<int>(std::llround(cfg.t_end / cfg.dt));
    std::ofstream flow_csv, transport_csv;
    if (cfg.write_csv) {
        flow_csv.open(cfg.output_directory + "/flow.csv");
        flow_csv << "# config " << cfg.hash << "\n";
        flow_csv << "t,energy,darcy_x,darcy_y,darcy_z\n";
        transport_csv.open(cfg.output_directory + "/transport.csv");
        transport_csv << "# config " << cfg.hash << "\n";
        transport_csv << "t,fluid_mass,solid_mass,total_mass,cf_min,cf_max,cs_min,cs_max\n";
    }

    auto write_snapshot = [&](int step) {
        if (!cfg.write_vtk) return;
        const std::string tag = std::to_string(step);
        if (flow) {
            const auto v = cell_centered_velocity(flow->problem(), flow_state.field);
            io::VtkCellField fv, fp;
            fv.name = "velocity";
            fv.vector = &v;
            fp.name = "pressure";
            fp.scalar = &flow_state.pressure;
            const mac::Grid& g = flow->problem().grid();
            io::write_vtk_structured_points(cfg.output_directory + "/flow_" + tag + ".vtk",
                                            {g.nx, g.ny, g.nz}, {0.0, 0.0, -cfg.height},
                                            {g.hx, g.hy, g.hz}, {fv, fp});
        }
        io::VtkCellField fc;
        fc.name = "c_f";
        fc.scalar = &tstate.c_f;
        const double hx = cfg.lateral / cfg.sigma_cells;
        const double hz = cfg.height / cfg.bulk_layers;
        io::write_vtk_structured_points(cfg.output_directory + "/c_f_" + tag + ".vtk",
                                        {cfg.sigma_cells, cfg.sigma_cells, 2 * cfg.bulk_layers},
                                        {0.0, 0.0, -cfg.height}, {hx, hx, hz}, {fc});
        if (cfg.regime != transport::GammaRegime::One) {
            io::VtkCellField fs;
            fs.name = "c_s";
            fs.scalar = &tstate.c_s;
            io::write_vtk_structured_points(cfg.output_directory + "/c_s_" + tag + ".vtk",
                                            {cfg.sigma_cells, cfg.sigma_cells, 1},
                                            {0.0, 0.0, 0.0}, {hx, hx, hx}, {fs});
        }
    };

    const double mass0 = tsys.total_mass(tstate);
    double energy_first = 0.0, energy_last = 0.0;
    int completed = 0;
    try {
        for (int s = 0; s < n_steps; ++s) {
            macroflow::Vec3 darcy{0, 0, 0};
            double energy = 0.0;
            transport::AdvectingVelocity vel;
            if (flow) {
                flow_state = flow->step(flow_state, cfg.macro_tol);
                energy = flow->energy(flow_state);
                if (cfg.flow_mode == cfg::FlowMode::Coupled) {
                    const auto tr = macroflow::interface_traces(*flow, flow_state);
                    const std::size_t m = tr.plus[0].size();
                    for (std::size_t c = 0; c < m; ++c) {
                        const macroflow::Vec3 vp = {tr.plus[0][c], tr.plus[1][c], tr.plus[2][c]};
                        const macroflow::Vec3 vm = {tr.minus[0][c], tr.minus[1][c], tr.minus[2][c]};
                        const auto d = cellflow::darcy_velocity(flow_tensors, vp, vm);
                        for (int r = 0; r < 3; ++r) darcy[r] += d[r] / m;
                    }
                }
                vel.staggered = &flow_state.field;
            } else {
                vel.uniform = cfg.prescribed_velocity;
            }
            tsys.coupled_step(tstate, vel);
            if (s == 0) energy_first = energy;
            energy_last = energy;
            ++completed;

            if (cfg.write_csv) {
                flow_csv << io::format_g17(cfg.dt * (s + 1)) << "," << io::format_g17(energy) << ","
                         << io::format_g17(darcy[0]) << "," << io::format_g17(darcy[1]) << ","
                         << io::format_g17(darcy[2]) << "\n";
                transport_csv << io::format_g17(tstate.t) << ","
                              << io::format_g17(tsys.total_fluid_mass(tstate)) << ","
                              << io::format_g17(tsys.total_solid_mass(tstate)) << ","
                              << io::format_g17(tsys.total_mass(tstate)) << ","
                              << io::format_g17(tsys.fluid_min(tstate)) << ","
                              << io::format_g17(tsys.fluid_max(tstate)) << ","
                              << io::format_g17(tsys.solid_min(tstate)) << ","
                              << io::format_g17(tsys.solid_max(tstate)) << "\n";
            }
            if (cfg.cadence > 0 && ((s + 1) % cfg.cadence == 0 || s + 1 == n_steps))
                write_snapshot(s + 1);
        }
    } catch (const lin::SolverError&) {
        write_snapshot(completed);  // flush the last good snapshot before propagating
        throw;
    }

    const double drift =
        std::fabs(tsys.total_mass(tstate) - mass0) / (1.0 + std::fabs(mass0));
    std::string trend = "flat";
    if (flow && n_steps > 0) trend = energy_last <= energy_first ? "non-increasing" : "increasing";
    CommandResult res;
    res.summary = "steps " + std::to_string(completed) + ", conservation drift " +
                  io::format_g17(drift) + ", energy trend " + trend;
    out << res.summary << "\n";
    return res;
}

} // namespace poromem::pipeline
