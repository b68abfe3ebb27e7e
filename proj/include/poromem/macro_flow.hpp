#ifndef POROMEM_MACRO_FLOW_HPP
#define POROMEM_MACRO_FLOW_HPP

// Implicit-Euler time integration of the effective bulk flow: transient
// Stokes in the boxes above and below the interface plane, stress-free at
// the outer z-planes, laterally periodic. In coupled mode the boxes
// exchange momentum only through the effective interface form (and share
// the normal face unknowns on the interface); in impermeable mode the
// interface is a no-slip wall and the boxes decouple.

#include "poromem/cell_flow.hpp"
#include "poromem/linalg.hpp"
#include "poromem/mac.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

namespace poromem::macroflow {

using Vec3 = std::array<double, 3>;

struct BulkGrid {
    int n_sigma = 16;       // lateral cells on Sigma
    int n_layers = 8;       // vertical cells per box
    double lateral = 1.0;   // Sigma = (0,lateral)^2
    double height = 1.0;    // box height H
};

enum class InterfaceMode { Coupled, Impermeable };

struct InterfaceLaw {
    cellflow::EffectiveFlowTensors tensors;
    InterfaceMode mode = InterfaceMode::Coupled;
};

struct Forcing {
    Vec3 plus{0, 0, 0};
    Vec3 minus{0, 0, 0};
    double ramp = 0.0;  // linear ramp-in time; 0 = constant
};

struct FlowState {
    lin::Vector field;     // full staggered field of the stacked grid
    lin::Vector pressure;  // per cell
    double t = 0.0;
};

struct SigmaTraces {
    // cell-centered traces per Sigma cell, component-major [3][n*n]
    std::array<lin::Vector, 3> plus, minus;
};

class FlowSystem {
public:
    FlowSystem(const BulkGrid& grid, const InterfaceLaw& law, double dt, const Forcing& forcing);

    const BulkGrid& bulk_grid() const { return grid_; }
    const mac::StokesProblem& problem() const { return *problem_; }
    const InterfaceLaw& law() const { return law_; }
    double dt() const { return dt_; }

    FlowState initial_state() const;
    // One implicit Euler step of the saddle system.
    FlowState step(const FlowState& state, double tol) const;
    // The assembled per-step system (for oracles and direct inspection).
    lin::SaddleSystem saddle(const FlowState& state) const;

    double energy(const FlowState& state) const;
    double divergence_max(const FlowState& state) const;

private:
    void add_interface(const lin::Vector& X, lin::Vector& F) const;
    friend SigmaTraces interface_traces(const FlowSystem&, const FlowState&);

    BulkGrid grid_;
    InterfaceLaw law_;
    double dt_;
    Forcing forcing_;
    std::unique_ptr<mac::StokesProblem> problem_;
    lin::Vector mass_;    // active-ordered mass diagonal
    lin::Vector jacobi_;  // full operator diagonal
};

FlowState step_flow(const FlowSystem& sys, const FlowState& state, double tol);
SigmaTraces interface_traces(const FlowSystem& sys, const FlowState& state);

struct FlowSample {
    double t = 0.0;
    double energy = 0.0;
    Vec3 darcy_mean{0, 0, 0};
};

// Runs n_steps implicit Euler steps; emits one sample per step and invokes
// the callback (if any) at the given cadence.
std::vector<FlowSample> run_flow(const FlowSystem& sys, FlowState& state, int n_steps, double tol,
                                 int cadence = 0,
                                 const std::function<void(const FlowState&)>& on_output = {});

// Deterministic discretely divergence-free noise (curl of a hashed
// potential); used as initial data in decay experiments.
lin::Vector divergence_free_noise(const mac::StokesProblem& pr, std::uint64_t seed);

} // namespace poromem::macroflow

#endif
