#include <doctest.h>

#include "poromem/macro_flow.hpp"
#include "support/dense.hpp"

#include <cmath>

using namespace poromem;
using macroflow::BulkGrid;
using macroflow::FlowSystem;
using macroflow::InterfaceLaw;
using macroflow::InterfaceMode;

namespace {

cellflow::EffectiveFlowTensors cylinder_tensors(int n = 8) {
    geom::Primitive p;
    p.kind = geom::Primitive::Kind::Cylinder;
    p.axis = 2;
    p.center = {0.5, 0.5, 0.0};
    p.radius = 0.3;
    p.lo = -0.6;
    p.hi = 0.6;
    geom::MicrostructureSpec spec;
    spec.resolution = n;
    spec.solids = {p};
    const auto cell = geom::build_cell(spec);
    cellflow::CellFlowWorkspace ws(cell);
    std::array<cellflow::StokesCellSolution, 5> sols;
    for (std::size_t m = 0; m < 5; ++m) sols[m] = ws.solve(cellflow::all_cell_modes[m], 1e-10);
    return cellflow::assemble_effective_tensors(sols, cell);
}

cellflow::EffectiveFlowTensors empty_tensors(int n = 8) {
    geom::MicrostructureSpec spec;
    spec.resolution = n;
    const auto cell = geom::build_cell(spec);
    cellflow::CellFlowWorkspace ws(cell);
    std::array<cellflow::StokesCellSolution, 5> sols;
    for (std::size_t m = 0; m < 5; ++m) sols[m] = ws.solve(cellflow::all_cell_modes[m], 1e-11);
    return cellflow::assemble_effective_tensors(sols, cell);
}

BulkGrid small_grid(int n_sigma = 8, int layers = 4) {
    BulkGrid g;
    g.n_sigma = n_sigma;
    g.n_layers = layers;
    g.lateral = 1.0;
    g.height = 0.5;
    return g;
}

} // namespace

TEST_CASE("zero forcing keeps the zero state") {
    InterfaceLaw law;
    law.mode = InterfaceMode::Coupled;
    law.tensors = cylinder_tensors();
    FlowSystem sys(small_grid(), law, 0.05, {});
    auto st = sys.initial_state();
    for (int s = 0; s < 3; ++s) st = sys.step(st, 1e-11);
    for (double v : st.field) CHECK(v == 0.0);
    for (double v : st.pressure) CHECK(std::fabs(v) < 1e-12);
}

TEST_CASE("indefinite interface tensors are rejected in coupled mode") {
    InterfaceLaw law;
    law.mode = InterfaceMode::Coupled;
    law.tensors = cylinder_tensors();
    for (int i = 0; i < 3; ++i) law.tensors.K_plus[i][i] = -1.0;
    CHECK_THROWS_AS(FlowSystem(small_grid(), law, 0.05, {}), std::invalid_argument);
}

TEST_CASE("obstacle-free tensors are accepted and transmit tangential momentum") {
    InterfaceLaw law;
    law.mode = InterfaceMode::Coupled;
    law.tensors = empty_tensors();
    macroflow::Forcing forcing;
    forcing.plus = {1.0, 0.0, 0.0};  // push only the upper box
    FlowSystem sys(small_grid(4, 2), law, 0.05, forcing);
    auto st = sys.initial_state();
    for (int s = 0; s < 4; ++s) st = sys.step(st, 1e-11);
    const auto tr = macroflow::interface_traces(sys, st);
    double lower = 0.0, upper = 0.0;
    for (std::size_t c = 0; c < tr.minus[0].size(); ++c) {
        lower += tr.minus[0][c];
        upper += tr.plus[0][c];
    }
    CHECK(upper > 1e-4);   // the forced box slides
    CHECK(lower > 1e-6);   // and drags the other through M
    CHECK(sys.divergence_max(st) < 1e-7);
}

TEST_CASE("one implicit step matches the dense KKT solve") {
    InterfaceLaw law;
    law.mode = InterfaceMode::Coupled;
    law.tensors = empty_tensors();
    macroflow::Forcing forcing;
    forcing.plus = {1.0, 0.0, 0.0};
    forcing.minus = {0.0, 0.2, 0.1};
    FlowSystem sys(small_grid(4, 2), law, 0.05, forcing);
    const auto st = sys.initial_state();
    const auto saddle = sys.saddle(st);

    const std::size_t nu = saddle.A.dim, np = saddle.pressure_dim, nn = nu + np;
    std::vector<double> kkt(nn * nn, 0.0), rhs(nn, 0.0);
    lin::Vector e(nu, 0.0), col(nu), dv(np);
    for (std::size_t c = 0; c < nu; ++c) {
        e.assign(nu, 0.0);
        e[c] = 1.0;
        saddle.A.apply(e, col);
        for (std::size_t r = 0; r < nu; ++r) kkt[r * nn + c] = col[r];
        saddle.apply_div(e, dv);
        for (std::size_t r = 0; r < np; ++r) {
            kkt[(nu + r) * nn + c] = dv[r];
            kkt[c * nn + nu + r] = dv[r];
        }
    }
    for (std::size_t i = 0; i < nu; ++i) rhs[i] = saddle.f[i];

    const auto ref = testsupport::dense_solve(kkt, rhs);
    const auto next = sys.step(st, 1e-12);
    const auto active = sys.problem().extract_active(next.field);
    double err = 0.0;
    for (std::size_t i = 0; i < nu; ++i) err = std::max(err, std::fabs(active[i] - ref[i]));
    CHECK(err < 1e-9);
}

TEST_CASE("energy decays monotonically from divergence-free noise") {
    InterfaceLaw law;
    law.mode = InterfaceMode::Coupled;
    law.tensors = cylinder_tensors();
    FlowSystem sys(small_grid(), law, 0.02, {});
    auto st = sys.initial_state();
    st.field = macroflow::divergence_free_noise(sys.problem(), 2024);
    double prev = sys.energy(st);
    CHECK(prev > 0.0);
    for (int s = 0; s < 12; ++s) {
        st = sys.step(st, 1e-11);
        const double e = sys.energy(st);
        CHECK(e <= prev);
        prev = e;
        CHECK(sys.divergence_max(st) < 1e-7);
    }
}

TEST_CASE("normal trace components are shared bit-for-bit") {
    InterfaceLaw law;
    law.mode = InterfaceMode::Coupled;
    law.tensors = cylinder_tensors();
    macroflow::Forcing forcing;
    forcing.plus = {0.3, 0.0, -0.5};
    FlowSystem sys(small_grid(), law, 0.02, forcing);
    auto st = sys.initial_state();
    for (int s = 0; s < 3; ++s) {
        st = sys.step(st, 1e-10);
        const auto tr = macroflow::interface_traces(sys, st);
        for (std::size_t c = 0; c < tr.plus[2].size(); ++c)
            CHECK(tr.plus[2][c] == tr.minus[2][c]);
    }
}

TEST_CASE("impermeable mode: zero interface flux and decoupled boxes") {
    InterfaceLaw law;
    law.mode = InterfaceMode::Impermeable;
    macroflow::Forcing forcing;
    forcing.plus = {1.0, 0.0, 0.0};
    FlowSystem sys(small_grid(), law, 0.05, forcing);
    auto st = sys.initial_state();
    const mac::Grid& g = sys.problem().grid();
    const int lvl = sys.bulk_grid().n_layers;
    for (int s = 0; s < 5; ++s) {
        st = sys.step(st, 1e-11);
        // the shared plane is pinned: identically zero flux
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                CHECK(st.field[sys.problem().offset_w() + g.widx(i, j, lvl)] == 0.0);
        // the unforced lower box never moves
        for (int k = 0; k < lvl; ++k)
            for (int j = 0; j < g.ny; ++j)
                for (int i = 0; i < g.nx; ++i) {
                    CHECK(st.field[g.uidx(i, j, k)] == 0.0);
                    CHECK(st.field[sys.problem().offset_v() + g.vidx(i, j, k)] == 0.0);
                }
    }
    CHECK(sys.energy(st) > 0.0);  // the upper box did move
}

TEST_CASE("interface traces pick the adjacent face values") {
    InterfaceLaw law;
    law.mode = InterfaceMode::Coupled;
    law.tensors = cylinder_tensors();
    FlowSystem sys(small_grid(4, 2), law, 0.05, {});
    auto st = sys.initial_state();
    const auto zero_tr = macroflow::interface_traces(sys, st);
    for (int c = 0; c < 3; ++c)
        for (double v : zero_tr.plus[c]) CHECK(v == 0.0);

    // plug state w = 1 everywhere
    const mac::Grid& g = sys.problem().grid();
    for (int k = 0; k <= g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                st.field[sys.problem().offset_w() + g.widx(i, j, k)] = 1.0;
    const auto plug_tr = macroflow::interface_traces(sys, st);
    for (double v : plug_tr.plus[2]) CHECK(v == 1.0);
    for (double v : plug_tr.minus[2]) CHECK(v == 1.0);

    // tangential shear: uniform u per side
    const int lvl = sys.bulk_grid().n_layers;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            st.field[g.uidx(i, j, lvl)] = 2.0;
            st.field[g.uidx(i, j, lvl - 1)] = -1.0;
        }
    const auto sh_tr = macroflow::interface_traces(sys, st);
    for (double v : sh_tr.plus[0]) CHECK(v == 2.0);
    for (double v : sh_tr.minus[0]) CHECK(v == -1.0);
}

TEST_CASE("dt refinement: first order in time on a forced run") {
    InterfaceLaw law;
    law.mode = InterfaceMode::Coupled;
    law.tensors = cylinder_tensors();
    macroflow::Forcing forcing;
    forcing.plus = {1.0, 0.0, 0.0};
    forcing.minus = {0.0, -0.5, 0.0};

    const double T = 0.08;
    auto run = [&](double dt) {
        FlowSystem sys(small_grid(4, 2), law, dt, forcing);
        auto st = sys.initial_state();
        const int steps = static_cast<int>(std::llround(T / dt));
        for (int s = 0; s < steps; ++s) st = sys.step(st, 1e-12);
        return st.field;
    };
    const auto f1 = run(0.02), f2 = run(0.01), f3 = run(0.005);
    double e12 = 0.0, e23 = 0.0;
    for (std::size_t c = 0; c < f1.size(); ++c) {
        e12 = std::max(e12, std::fabs(f1[c] - f2[c]));
        e23 = std::max(e23, std::fabs(f2[c] - f3[c]));
    }
    const double order = std::log2(e12 / e23);
    CHECK(order >= 0.8);
}

TEST_CASE("run_flow: zero steps and zero data") {
    InterfaceLaw law;
    law.mode = InterfaceMode::Coupled;
    law.tensors = cylinder_tensors();
    FlowSystem sys(small_grid(4, 2), law, 0.05, {});
    auto st = sys.initial_state();
    auto samples = macroflow::run_flow(sys, st, 0, 1e-10);
    CHECK(samples.empty());
    CHECK(st.t == 0.0);
    samples = macroflow::run_flow(sys, st, 3, 1e-10);
    REQUIRE(samples.size() == 3);
    for (const auto& s : samples) {
        CHECK(s.energy == 0.0);
        for (double d : s.darcy_mean) CHECK(d == 0.0);
    }
}

TEST_CASE("interface-averaged tangential velocity is grid-consistent") {
    InterfaceLaw law;
    law.mode = InterfaceMode::Coupled;
    law.tensors = cylinder_tensors();
    macroflow::Forcing forcing;
    forcing.plus = {1.0, 0.0, 0.0};
    auto mean_trace = [&](int n_sigma, int layers) {
        BulkGrid g;
        g.n_sigma = n_sigma;
        g.n_layers = layers;
        g.lateral = 1.0;
        g.height = 0.5;
        FlowSystem sys(g, law, 0.02, forcing);
        auto st = sys.initial_state();
        for (int s = 0; s < 5; ++s) st = sys.step(st, 1e-10);
        const auto tr = macroflow::interface_traces(sys, st);
        double m = 0.0;
        for (double v : tr.plus[0]) m += v / tr.plus[0].size();
        return m;
    };
    const double coarse = mean_trace(8, 4);
    const double fine = mean_trace(16, 8);
    CHECK(std::fabs(coarse - fine) / std::fabs(fine) < 0.10);
}
