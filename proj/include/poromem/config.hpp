#ifndef POROMEM_CONFIG_HPP
#define POROMEM_CONFIG_HPP

// JSON run configuration: parsing with line/column diagnostics, structural
// validation against the documented schema (docs/config.schema.json), and a
// stable hash embedded in every output file.

#include "poromem/geometry.hpp"
#include "poromem/kinetics.hpp"
#include "poromem/macro_flow.hpp"
#include "poromem/macro_transport.hpp"

#include <array>
#include <stdexcept>
#include <string>

namespace poromem::cfg {

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

enum class FlowMode { Coupled, Impermeable, Off };

struct RunConfig {
    geom::MicrostructureSpec geometry;

    double d_f = 1.0;
    double d_s = 1.0;
    transport::GammaRegime regime = transport::GammaRegime::Intermediate;
    kin::KineticsSpec kinetics;
    macroflow::Forcing forcing;
    FlowMode flow_mode = FlowMode::Off;
    std::array<double, 3> prescribed_velocity{0, 0, 0};

    double cell_tol = 1e-10;
    double macro_tol = 1e-10;
    double dt = 1e-3;
    double t_end = 0.1;
    int sigma_cells = 16;
    int bulk_layers = 8;
    double height = 1.0;
    double lateral = 1.0;

    double c_f_init = 0.0;
    double c_s_init = 0.0;

    std::string output_directory = "out";
    int cadence = 0;  // VTK snapshot cadence in steps; 0 = none
    bool write_csv = true;
    bool write_vtk = false;

    std::string flow_tensor_path;       // defaults to <out>/flow_tensors.json
    std::string diffusion_tensor_path;  // defaults to <out>/d_star.json

    std::string hash;  // FNV-1a of the canonical document
};

RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& text, const std::string& origin);
std::string fnv1a_hex(const std::string& data);

} // namespace poromem::cfg

#endif
