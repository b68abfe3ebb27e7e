#ifndef POROMEM_IO_HPP
#define POROMEM_IO_HPP

// File output: legacy ASCII VTK structured points for fields, JSON for the
// effective tensors. Numeric formatting is fixed at 17 significant digits so
// reruns of a deterministic pipeline are byte-identical.

#include "poromem/cell_diffusion.hpp"
#include "poromem/cell_flow.hpp"
#include "poromem/geometry.hpp"
#include "poromem/linalg.hpp"

#include <array>
#include <string>
#include <vector>

namespace poromem::io {

std::string format_g17(double v);

struct VtkCellField {
    std::string name;
    const lin::Vector* scalar = nullptr;                 // per cell
    const std::array<lin::Vector, 3>* vector = nullptr;  // per cell, component-major
};

void write_vtk_structured_points(const std::string& path, const std::array<int, 3>& cells,
                                 const std::array<double, 3>& origin,
                                 const std::array<double, 3>& spacing,
                                 const std::vector<VtkCellField>& fields);

void write_phase_vtk(const std::string& path, const geom::ReferenceCell& cell);

struct TensorFileMeta {
    int resolution = 0;
    double tolerance = 0.0;
    double coercivity_margin = 0.0;
    std::string config_hash;
    std::vector<std::string> mode_names;
    std::vector<double> momentum_residuals;
    std::vector<double> divergence_residuals;
};

void write_flow_tensors(const std::string& path, const cellflow::EffectiveFlowTensors& t,
                        const TensorFileMeta& meta);
cellflow::EffectiveFlowTensors read_flow_tensors(const std::string& path);

void write_diffusion_tensor(const std::string& path, const celldiff::EffectiveDiffusionTensor& t,
                            int resolution, double tolerance, const std::string& config_hash);
celldiff::EffectiveDiffusionTensor read_diffusion_tensor(const std::string& path);

} // namespace poromem::io

#endif
