#include <doctest.h>

#include "poromem/macro_transport.hpp"
#include "support/ode.hpp"

#include <cmath>

using namespace poromem;
using transport::AdvectingVelocity;
using transport::GammaRegime;
using transport::TransportConfig;
using transport::TransportGrid;
using transport::TransportSystem;

namespace {

geom::ReferenceCell slab_cell(int n = 8) {
    geom::Primitive p;
    p.kind = geom::Primitive::Kind::Box;
    p.min = {0.0, 0.0, -0.25};
    p.max = {1.0, 1.0, 0.25};
    geom::MicrostructureSpec spec;
    spec.resolution = n;
    spec.solids = {p};
    return geom::build_cell(spec);
}

celldiff::EffectiveDiffusionTensor slab_dstar(const geom::ReferenceCell& cell, double d_s) {
    const auto e1 = celldiff::solve_cell_diffusion(cell, 0, d_s, 1e-13);
    const auto e2 = celldiff::solve_cell_diffusion(cell, 1, d_s, 1e-13);
    return celldiff::assemble_d_star(e1, e2, cell, d_s);
}

celldiff::EffectiveDiffusionTensor zero_dstar() {
    celldiff::EffectiveDiffusionTensor t;
    t.d_star = {{{0.0, 0.0}, {0.0, 0.0}}};
    t.zs_measure = 0.5;
    t.d_s = 1.0;
    return t;
}

TransportGrid grid16() {
    TransportGrid g;
    g.n_sigma = 16;
    g.n_layers = 8;
    g.lateral = 1.0;
    g.height = 0.5;
    return g;
}

} // namespace

TEST_CASE("zero kinetics and zero velocity leave uniform fields untouched") {
    const auto cell = slab_cell();
    TransportConfig conf;
    conf.regime = GammaRegime::Intermediate;
    conf.dt = 1e-3;
    TransportSystem sys(grid16(), conf, cell, nullptr);
    auto st = sys.initial_state(0.8, 0.3);
    const auto c_f0 = st.c_f, c_s0 = st.c_s;
    for (int s = 0; s < 5; ++s) sys.coupled_step(st, {});
    CHECK(st.c_f == c_f0);
    CHECK(st.c_s == c_s0);
}

TEST_CASE("pure fluid transport conserves mass for a point blob") {
    const auto cell = slab_cell();
    TransportConfig conf;
    conf.regime = GammaRegime::Intermediate;
    conf.dt = 5e-4;
    conf.d_f = 0.7;
    TransportSystem sys(grid16(), conf, cell, nullptr);
    auto st = sys.initial_state(0.0, 0.0);
    st.c_f[sys.fluid_cells() / 2 + 5] = 1.0;  // one hot voxel
    const double m0 = sys.total_mass(st);
    AdvectingVelocity vel;
    vel.uniform = {0.4, -0.2, 0.1};
    for (int s = 0; s < 30; ++s) sys.coupled_step(st, vel);
    CHECK(std::fabs(sys.total_mass(st) - m0) < 1e-12 * (1.0 + m0) * 30);
    CHECK(sys.fluid_min(st) > -1e-12);
}

TEST_CASE("interface exchange changes only the adjacent layers at first order") {
    const auto cell = slab_cell();  // |Gamma| = 2, |Z_s| = 1/2
    TransportConfig conf;
    conf.regime = GammaRegime::Intermediate;
    conf.dt = 1e-4;
    conf.d_f = 1e-10;  // suppress the diffusive smearing for the layer check
    conf.kinetics = {kin::Variant::Linear, 0.7, 0, 0};
    const auto g = grid16();
    TransportSystem sys(g, conf, cell, nullptr);
    const double a = 2.0, b = 0.5;
    auto st = sys.initial_state(a, b);
    sys.coupled_step(st, {});

    // realized exchange from the closed-form implicit update
    const double lam = conf.dt * cell.measures.gamma / cell.measures.zs;
    const double b_new = (b + lam * conf.kinetics.k * a) / (1.0 + lam * conf.kinetics.k);
    const double e = cell.measures.zs * (b_new - b);
    const double hz = g.height / g.n_layers;

    const int n = g.n_sigma;
    for (int k = 0; k < 2 * g.n_layers; ++k) {
        const double expected =
            (k == g.n_layers - 1 || k == g.n_layers) ? a - 0.5 * e / hz : a;
        const double got = st.c_f[(static_cast<std::size_t>(k) * n) * n];
        CHECK(std::fabs(got - expected) < 1e-9);
    }
    for (double v : st.c_s) CHECK(v == doctest::Approx(b_new).epsilon(1e-14));
    // first-order magnitude: -|Gamma| k (a-b) dt / cell-height across the layer
    const double first_order = cell.measures.gamma * conf.kinetics.k * (a - b) * conf.dt / hz;
    const double applied = e / hz;
    CHECK(std::fabs(applied - first_order) < 5e-3 * first_order);
}

TEST_CASE("ode regime: frozen fluid concentration relaxes exponentially") {
    const auto cell = slab_cell();
    TransportConfig conf;
    conf.regime = GammaRegime::Intermediate;
    conf.dt = 1e-3;
    conf.kinetics = {kin::Variant::Linear, 1.0, 0, 0};
    TransportSystem sys(grid16(), conf, cell, nullptr);
    auto st = sys.initial_state(1.0, 0.0);

    const double a = 1.0;
    double c = 0.0;
    const double lam = conf.dt * cell.measures.gamma / cell.measures.zs * conf.kinetics.k;
    const lin::Vector trace(static_cast<std::size_t>(16) * 16, a);
    for (int s = 0; s < 200; ++s) {
        sys.step_solid_ode(st, trace);
        c = (c + lam * a) / (1.0 + lam);
        CHECK(st.c_s[0] == c);  // implicit Euler closed form, bitwise
    }
    // rate k|Gamma|/|Z_s| = 4: after t=0.2 the gap shrank by about e^{-0.8}
    const double rate = conf.kinetics.k * cell.measures.gamma / cell.measures.zs;
    CHECK(std::fabs((a - st.c_s[0]) - std::exp(-rate * 0.2)) < 2e-3);
}

TEST_CASE("coupled two-compartment trajectory matches the rkf45 oracle") {
    const auto cell = slab_cell();
    TransportConfig conf;
    conf.regime = GammaRegime::Intermediate;
    conf.dt = 1e-3;
    conf.kinetics = {kin::Variant::Linear, 0.002, 0, 0};
    // one layer per box keeps the fluid a single well-mixed compartment
    TransportGrid g;
    g.n_sigma = 16;
    g.n_layers = 1;
    g.lateral = 1.0;
    g.height = 0.5;
    TransportSystem sys(g, conf, cell, nullptr);
    auto st = sys.initial_state(1.0, 0.0);
    for (int s = 0; s < 1000; ++s) sys.coupled_step(st, {});

    const double volume = g.lateral * g.lateral * 2.0 * g.height;
    const double area = g.lateral * g.lateral;
    const double alpha = area * cell.measures.gamma / volume;   // fluid loss rate / k
    const double beta = cell.measures.gamma / cell.measures.zs; // solid gain rate / k
    const double k = conf.kinetics.k;
    auto rhs = [&](double, const std::vector<double>& y) {
        const double h = k * (y[0] - y[1]);
        return std::vector<double>{-alpha * h, beta * h};
    };
    const auto oracle = testsupport::rkf45(rhs, {1.0, 0.0}, 0.0, 1.0, 1e-12);

    // the oracle itself is validated against the closed form of the linear system
    const double lam = k * (alpha + beta);
    const double d_exact = std::exp(-lam * 1.0);
    CHECK(std::fabs((oracle[0] - oracle[1]) - d_exact) < 1e-9);

    CHECK(std::fabs(st.c_f[0] - oracle[0]) < 1e-6);
    CHECK(std::fabs(st.c_s[0] - oracle[1]) < 1e-6);
}

TEST_CASE("surface diffusion regime decays a sinusoid at the Fourier rate") {
    const auto cell = slab_cell();
    const auto dstar = slab_dstar(cell, 1.0);  // D* = 0.5 I, |Z_s| = 0.5
    TransportConfig conf;
    conf.regime = GammaRegime::MinusOne;
    conf.dt = 2e-4;
    const auto g = grid16();  // lateral grid 16x16 for the unit test
    TransportSystem sys(g, conf, cell, &dstar);
    auto st = sys.initial_state(0.0, 0.0);
    const int n = g.n_sigma;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            st.c_s[static_cast<std::size_t>(j) * n + i] = std::sin(2.0 * M_PI * (i + 0.5) / n);

    const int steps = 100;
    const lin::Vector trace(static_cast<std::size_t>(n) * n, 0.0);
    double amp0 = 0.0, amp1 = 0.0;
    for (int j = 0; j < n; ++j) amp0 = std::max(amp0, std::fabs(st.c_s[j * n + 4]));
    for (int s = 0; s < steps; ++s) sys.step_solid_gamma_minus1(st, trace);
    for (int j = 0; j < n; ++j) amp1 = std::max(amp1, std::fabs(st.c_s[j * n + 4]));

    const double t = steps * conf.dt;
    const double rate_exact = (dstar.d_star[0][0] / cell.measures.zs) * 4.0 * M_PI * M_PI;
    const double rate_meas = -std::log(amp1 / amp0) / t;
    CHECK(std::fabs(rate_meas - rate_exact) / rate_exact < 0.05);  // 16^2 lateral grid
}

TEST_CASE("minus-one regime with a vanishing tensor reproduces the ode regime bitwise") {
    const auto cell = slab_cell();
    const auto zt = zero_dstar();
    TransportConfig conf;
    conf.regime = GammaRegime::MinusOne;
    conf.dt = 1e-3;
    conf.kinetics = {kin::Variant::Linear, 1.3, 0, 0};
    TransportSystem minus1(grid16(), conf, cell, &zt);
    conf.regime = GammaRegime::Intermediate;
    TransportSystem inter(grid16(), conf, cell, nullptr);

    auto st1 = minus1.initial_state(0.0, 0.0);
    auto st2 = inter.initial_state(0.0, 0.0);
    // a laterally varying fluid field so the exchange differs per column
    const int n = 16;
    for (std::size_t c = 0; c < st1.c_f.size(); ++c) {
        st1.c_f[c] = 0.5 + 0.25 * std::sin(0.37 * static_cast<double>(c % (n * n)));
        st2.c_f[c] = st1.c_f[c];
    }
    for (int s = 0; s < 10; ++s) {
        minus1.coupled_step(st1, {});
        inter.coupled_step(st2, {});
        CHECK(st1.c_f == st2.c_f);
        CHECK(st1.c_s == st2.c_s);
    }
}

TEST_CASE("per-point cell regime tracks the ode mean for uniform data") {
    const auto cell = slab_cell(8);
    TransportConfig conf;
    conf.regime = GammaRegime::One;
    conf.dt = 1e-3;
    conf.d_s = 1.0;
    conf.kinetics = {kin::Variant::Linear, 0.05, 0, 0};
    TransportGrid g;
    g.n_sigma = 4;
    g.n_layers = 2;
    g.lateral = 1.0;
    g.height = 0.5;
    TransportSystem one(g, conf, cell, nullptr);
    TransportConfig conf2 = conf;
    conf2.regime = GammaRegime::Intermediate;
    TransportSystem inter(g, conf2, cell, nullptr);

    auto st1 = one.initial_state(1.0, 0.0);
    auto st2 = inter.initial_state(1.0, 0.0);
    const std::size_t ns = st1.c_s.size() / (g.n_sigma * g.n_sigma);
    for (int s = 0; s < 400; ++s) {
        one.coupled_step(st1, {});
        inter.coupled_step(st2, {});
    }
    double mean = 0.0;
    for (std::size_t q = 0; q < ns; ++q) mean += st1.c_s[q] / ns;
    CHECK(std::fabs(mean - st2.c_s[0]) < 1e-3);
    // exchange pushes the solid toward the fluid concentration
    CHECK(mean > 0.01);
    CHECK(mean < 1.0);
}

TEST_CASE("coupled conservation and exact exchange pairing in all regimes") {
    const auto cell = slab_cell();
    const auto dstar = slab_dstar(cell, 1.0);
    for (int regime = 0; regime < 3; ++regime) {
        TransportConfig conf;
        conf.regime = static_cast<GammaRegime>(regime);
        conf.dt = 1e-3;
        conf.kinetics = {kin::Variant::Linear, 0.8, 0, 0};
        TransportGrid g;
        g.n_sigma = 8;
        g.n_layers = 4;
        g.lateral = 1.0;
        g.height = 0.5;
        TransportSystem sys(g, conf, cell,
                            conf.regime == GammaRegime::MinusOne ? &dstar : nullptr);
        auto st = sys.initial_state(1.0, 0.0);
        const double m0 = sys.total_mass(st);
        for (int s = 0; s < 25; ++s) {
            const auto ledger = sys.coupled_step(st, {});
            CHECK(ledger.fluid_sink == ledger.solid_gain);
        }
        CHECK(std::fabs(sys.total_mass(st) - m0) / m0 < 1e-11);
        CHECK(sys.total_solid_mass(st) > 0.0);
    }
}

TEST_CASE("nonnegative data stays nonnegative under linear exchange") {
    const auto cell = slab_cell();
    TransportConfig conf;
    conf.regime = GammaRegime::Intermediate;
    conf.dt = 1e-3;
    conf.kinetics = {kin::Variant::Linear, 1.0, 0, 0};
    TransportSystem sys(grid16(), conf, cell, nullptr);
    auto st = sys.initial_state(0.0, 0.0);
    // fluid blob near the interface, empty solid
    const int n = 16;
    st.c_f[(static_cast<std::size_t>(7) * n + 8) * n + 8] = 5.0;
    for (int s = 0; s < 50; ++s) sys.coupled_step(st, {});
    CHECK(sys.fluid_min(st) >= -1e-12);
    CHECK(sys.solid_min(st) >= -1e-12);
}

TEST_CASE("lateral translation equivariance of the coupled step") {
    const auto cell = slab_cell();
    TransportConfig conf;
    conf.regime = GammaRegime::Intermediate;
    conf.dt = 1e-3;
    conf.d_f = 0.5;
    conf.kinetics = {kin::Variant::Saturating, 0, 0.7, 0.4};
    TransportGrid g;
    g.n_sigma = 8;
    g.n_layers = 4;
    g.lateral = 1.0;
    g.height = 0.5;
    TransportSystem sys(g, conf, cell, nullptr);

    const int n = g.n_sigma;
    auto st = sys.initial_state(0.0, 0.0);
    auto stm = sys.initial_state(0.0, 0.0);
    auto fidx = [&](int i, int j, int k) {
        return (static_cast<std::size_t>(k) * n + (j % n)) * n + (i % n);
    };
    for (int k = 0; k < 2 * g.n_layers; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const double val = std::sin(1.7 * i + 0.3 * j) + 0.1 * k;
                st.c_f[fidx(i, j, k)] = val;
                stm.c_f[fidx(i + 1, j, k)] = val;  // shifted by one cell
            }
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const double val = 0.3 + 0.2 * std::cos(0.9 * i - 0.4 * j);
            st.c_s[static_cast<std::size_t>(j) * n + i] = val;
            stm.c_s[static_cast<std::size_t>(j) * n + (i + 1) % n] = val;
        }
    for (int s = 0; s < 5; ++s) {
        sys.coupled_step(st, {});
        sys.coupled_step(stm, {});
    }
    for (int k = 0; k < 2 * g.n_layers; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
                CHECK(std::fabs(st.c_f[fidx(i, j, k)] - stm.c_f[fidx(i + 1, j, k)]) < 1e-12);
}

TEST_CASE("advective CFL violation is reported") {
    const auto cell = slab_cell();
    TransportConfig conf;
    conf.regime = GammaRegime::Intermediate;
    conf.dt = 1.0;
    TransportSystem sys(grid16(), conf, cell, nullptr);
    auto st = sys.initial_state(1.0, 0.0);
    AdvectingVelocity vel;
    vel.uniform = {10.0, 0.0, 0.0};
    CHECK_THROWS_WITH_AS(sys.coupled_step(st, vel), doctest::Contains("CFL"), std::runtime_error);
}

TEST_CASE("regime one requires solid voxels; regime minus-one requires the tensor") {
    geom::MicrostructureSpec spec;
    spec.resolution = 8;
    const auto empty = geom::build_cell(spec);
    TransportConfig conf;
    conf.regime = GammaRegime::One;
    CHECK_THROWS_AS(TransportSystem(grid16(), conf, empty, nullptr), std::invalid_argument);

    const auto cell = slab_cell();
    conf.regime = GammaRegime::MinusOne;
    CHECK_THROWS_AS(TransportSystem(grid16(), conf, cell, nullptr), std::invalid_argument);
}

TEST_CASE("total mass bookkeeping per regime") {
    const auto cell = slab_cell();
    TransportConfig conf;
    conf.regime = GammaRegime::Intermediate;
    conf.dt = 1e-3;
    TransportGrid g = grid16();
    TransportSystem sys(g, conf, cell, nullptr);
    auto st = sys.initial_state(0.0, 0.0);
    CHECK(sys.total_mass(st) == 0.0);
    st = sys.initial_state(1.0, 0.0);
    // uniform c_f = 1 over a box of volume 2H|Sigma|
    CHECK(sys.total_mass(st) == doctest::Approx(2.0 * g.height * 1.0).epsilon(1e-13));
    st = sys.initial_state(0.0, 1.0);
    // uniform c_s = 1 adds |Z_s| |Sigma| = 0.5
    CHECK(sys.total_mass(st) == doctest::Approx(0.5).epsilon(1e-13));
}
