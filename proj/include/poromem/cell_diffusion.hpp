#ifndef POROMEM_CELL_DIFFUSION_HPP
#define POROMEM_CELL_DIFFUSION_HPP

// Scalar corrector problems on the solid part of the reference cell and the
// homogenized tangential diffusion tensor assembled from them.

#include "poromem/geometry.hpp"
#include "poromem/linalg.hpp"

#include <array>

namespace poromem::celldiff {

struct DiffusionCellSolution {
    int direction = 0;        // 0 or 1 (tangential directions)
    int n = 0;
    lin::Vector eta;          // per-voxel, zero outside the solid phase
    double residual = 0.0;
    long iterations = 0;
    int solid_components = 1;
};

struct EffectiveDiffusionTensor {
    std::array<std::array<double, 2>, 2> d_star{};
    double zs_measure = 0.0;
    double gamma_measure = 0.0;
    double d_s = 0.0;
};

// Finite-volume corrector solve: fluxes on solid-solid faces only, so the
// interface and the top/bottom carry the no-flux condition for the total
// flux D^s (e_i + grad eta). Disconnected solid phases are solved with a
// per-component zero-mean constraint.
DiffusionCellSolution solve_cell_diffusion(const geom::ReferenceCell& cell, int direction,
                                           double d_s, double tol);

EffectiveDiffusionTensor assemble_d_star(const DiffusionCellSolution& eta1,
                                         const DiffusionCellSolution& eta2,
                                         const geom::ReferenceCell& cell, double d_s);

} // namespace poromem::celldiff

#endif
