#ifndef POROMEM_MACRO_TRANSPORT_HPP
#define POROMEM_MACRO_TRANSPORT_HPP

// Coupled solute transport: advection-diffusion for the fluid concentration
// on the full box (the interface is an interior face layer carrying the
// exchange source) and the regime-dependent solid concentration: surface
// diffusion on Sigma, a pointwise exchange ODE, or a per-point cell problem
// with memory. The exchange is applied with one h sample per step on both
// sides, so the paired source/sink cancels exactly in the mass ledger.

#include "poromem/cell_diffusion.hpp"
#include "poromem/geometry.hpp"
#include "poromem/kinetics.hpp"
#include "poromem/linalg.hpp"

#include <array>
#include <optional>

namespace poromem::transport {

using Vec3 = std::array<double, 3>;

enum class GammaRegime { MinusOne, Intermediate, One };

struct TransportConfig {
    GammaRegime regime = GammaRegime::Intermediate;
    double d_f = 1.0;
    double d_s = 1.0;
    kin::KineticsSpec kinetics;
    double dt = 1e-3;
};

struct TransportGrid {
    int n_sigma = 16;
    int n_layers = 8;       // per box; the fluid grid has 2*n_layers z-cells
    double lateral = 1.0;
    double height = 1.0;
};

struct TransportState {
    lin::Vector c_f;  // n*n*(2*n_layers)
    lin::Vector c_s;  // n*n (MinusOne/Intermediate) or n*n*solid_voxels (One)
    double t = 0.0;
};

// Velocity for the advective flux: either zero/uniform, or a staggered
// field from the flow solver on the identical grid ([u|v|w] layout).
struct AdvectingVelocity {
    Vec3 uniform{0, 0, 0};
    const lin::Vector* staggered = nullptr;
};

struct ExchangeLedger {
    double fluid_sink = 0.0;  // total solute removed from the fluid this step
    double solid_gain = 0.0;  // total solute added to the solid this step
};

class TransportSystem {
public:
    TransportSystem(const TransportGrid& grid, const TransportConfig& config,
                    const geom::ReferenceCell& cell,
                    const celldiff::EffectiveDiffusionTensor* d_star);

    const TransportGrid& grid() const { return grid_; }
    const TransportConfig& config() const { return config_; }
    const geom::ReferenceCell& cell() const { return cell_; }
    std::size_t fluid_cells() const;
    std::size_t solid_unknowns() const;

    TransportState initial_state(double c_f_init, double c_s_init) const;

    // Trace of c_f on Sigma (mean of the two adjacent cell layers).
    lin::Vector sigma_trace(const TransportState& state) const;

    // Individual sub-steps. The solid steps return the exchanged solute per
    // unit Sigma area (positive into the solid).
    lin::Vector step_solid_ode(TransportState& state, const lin::Vector& trace) const;
    lin::Vector step_solid_gamma_minus1(TransportState& state, const lin::Vector& trace) const;
    lin::Vector step_solid_gamma1(TransportState& state, const lin::Vector& trace) const;
    void step_fluid(TransportState& state, const AdvectingVelocity& vel,
                    const lin::Vector& sink_per_area) const;

    // Lie splitting: solid update with the current trace, then the fluid
    // update with the realized exchange.
    ExchangeLedger coupled_step(TransportState& state, const AdvectingVelocity& vel) const;

    double total_fluid_mass(const TransportState& state) const;
    double total_solid_mass(const TransportState& state) const;
    double total_mass(const TransportState& state) const;

    double fluid_min(const TransportState& state) const;
    double fluid_max(const TransportState& state) const;
    double solid_min(const TransportState& state) const;
    double solid_max(const TransportState& state) const;

private:
    void check_cfl(const AdvectingVelocity& vel) const;
    double face_velocity(const AdvectingVelocity& vel, int comp, int i, int j, int k) const;

    TransportGrid grid_;
    TransportConfig config_;
    geom::ReferenceCell cell_;
    std::optional<celldiff::EffectiveDiffusionTensor> d_star_;

    // solid-phase voxel mesh of the reference cell (regime One)
    std::vector<std::int32_t> solid_compact_;  // cell voxel -> compact (-1)
    std::vector<std::int32_t> solid_cells_;    // compact -> voxel
    struct SFace { std::int32_t a, b; };
    std::vector<SFace> solid_faces_;
    std::vector<std::pair<std::int32_t, double>> gamma_sources_;  // compact voxel, face area
    lin::Vector cell_jacobi_;  // per-point implicit operator diagonal
};

double total_mass(const TransportSystem& sys, const TransportState& state);

} // namespace poromem::transport

#endif
