#ifndef POROMEM_CELL_FLOW_HPP
#define POROMEM_CELL_FLOW_HPP

// Stationary Stokes cell problems on the fluid part of the reference cell,
// one per boundary mode (tangential top/bottom slides and the normal plug
// mode), and the effective interface tensors assembled from them.

#include "poromem/geometry.hpp"
#include "poromem/linalg.hpp"
#include "poromem/mac.hpp"

#include <array>
#include <memory>
#include <optional>

namespace poromem::cellflow {

enum class CellMode {
    TangentialPlus1,   // q_1^+ : e_1 on S^+, 0 on S^- and Gamma
    TangentialPlus2,   // q_2^+
    TangentialMinus1,  // q_1^-
    TangentialMinus2,  // q_2^-
    Normal             // q_3 : e_3 on S^+ and S^-
};

constexpr std::array<CellMode, 5> all_cell_modes = {
    CellMode::TangentialPlus1, CellMode::TangentialPlus2, CellMode::TangentialMinus1,
    CellMode::TangentialMinus2, CellMode::Normal};

const char* mode_name(CellMode m);
mac::ModeData mode_data(CellMode m);

struct StokesCellSolution {
    CellMode mode = CellMode::Normal;
    int n = 0;                    // lateral resolution of the cell grid
    lin::Vector field;            // full staggered field (u|v|w) incl. boundary data
    lin::Vector pressure;         // per-cell, zero in solid voxels, zero mean over Z_f
    double momentum_residual = 0.0;
    double divergence_residual = 0.0;  // max |div|/V over fluid voxels
    long outer_iterations = 0;
    long inner_iterations = 0;
};

using Mat3 = std::array<std::array<double, 3>, 3>;

struct EffectiveFlowTensors {
    // Strain inner products of the cell solutions. tangential[a][b](i,j) is
    // the (q_i^a, q_j^b) pairing for i,j in {1,2}; a,b index {+,-} as {0,1}.
    std::array<std::array<std::array<std::array<double, 2>, 2>, 2>, 2> g_tangential{};
    std::array<std::array<double, 2>, 2> g_normal_coupling{};  // [a][i]: (q_i^a, q_3)
    double g_normal_normal = 0.0;                              // (q_3, q_3)

    Mat3 K_plus{}, K_minus{};  // K^a_{ij}
    Mat3 M{};                  // symmetric, third row/column zero
    Mat3 A_plus{}, A_minus{};  // cell averages of the modes
    Mat3 Q_plus{}, Q_minus{};  // A^a - e3 (x) e3 / |Z_f|
    double zf_measure = 0.0;
    double gamma_measure = 0.0;
    int resolution = 0;
    double m_asymmetry = 0.0;  // | (q_i^+,q_j^-) - (q_j^+,q_i^-) | before symmetrizing
};

// Builds the masked staggered Stokes problem for a validated cell once and
// solves the five boundary modes against it.
class CellFlowWorkspace {
public:
    explicit CellFlowWorkspace(const geom::ReferenceCell& cell);

    StokesCellSolution solve(CellMode mode, double tol) const;
    const mac::StokesProblem& problem() const { return *problem_; }
    const geom::ReferenceCell& cell() const { return cell_; }

    // Strain-energy pairing of two solutions through the same discrete form
    // the solver used.
    double pairing(const StokesCellSolution& a, const StokesCellSolution& b) const;

private:
    geom::ReferenceCell cell_;
    std::unique_ptr<mac::StokesProblem> problem_;
};

StokesCellSolution solve_cell_stokes(const geom::ReferenceCell& cell, CellMode mode, double tol);

EffectiveFlowTensors assemble_effective_tensors(const std::array<StokesCellSolution, 5>& solutions,
                                                const geom::ReferenceCell& cell);

// Smallest eigenvalue of the interface quadratic form restricted to
// {xi3^+ = xi3^-} (coordinate elimination, dense symmetric eigensolve).
double coercivity_margin(const EffectiveFlowTensors& t);

// Interface average of the layer velocity given the bulk traces on Sigma.
std::array<double, 3> darcy_velocity(const EffectiveFlowTensors& t,
                                     const std::array<double, 3>& v_plus_trace,
                                     const std::array<double, 3>& v_minus_trace);

} // namespace poromem::cellflow

#endif
