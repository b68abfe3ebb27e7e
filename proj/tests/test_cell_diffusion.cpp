#include <doctest.h>

#include "poromem/cell_diffusion.hpp"

#include <cmath>

using namespace poromem;

namespace {

geom::ReferenceCell slab_cell(int n, double zlo = -0.25, double zhi = 0.25) {
    geom::Primitive p;
    p.kind = geom::Primitive::Kind::Box;
    p.min = {0.0, 0.0, zlo};
    p.max = {1.0, 1.0, zhi};
    geom::MicrostructureSpec spec;
    spec.resolution = n;
    spec.solids = {p};
    return geom::build_cell(spec);
}

// slab whose thickness steps in y1: connected, corrector active along y1
geom::ReferenceCell stepped_cell(int n) {
    geom::Primitive a, b;
    a.kind = geom::Primitive::Kind::Box;
    a.min = {0.0, 0.0, -0.25};
    a.max = {0.5, 1.0, 0.25};
    b.kind = geom::Primitive::Kind::Box;
    b.min = {0.5, 0.0, -0.125};
    b.max = {1.0, 1.0, 0.125};
    geom::MicrostructureSpec spec;
    spec.resolution = n;
    spec.solids = {a, b};
    return geom::build_cell(spec);
}

} // namespace

TEST_CASE("slab corrector vanishes and D* is the slab volume") {
    const auto cell = slab_cell(8);
    const auto e1 = celldiff::solve_cell_diffusion(cell, 0, 1.0, 1e-12);
    const auto e2 = celldiff::solve_cell_diffusion(cell, 1, 1.0, 1e-12);
    for (double v : e1.eta) CHECK(std::fabs(v) < 1e-13);
    const auto t = celldiff::assemble_d_star(e1, e2, cell, 1.0);
    CHECK(std::fabs(t.d_star[0][0] - 0.5) < 1e-12);
    CHECK(std::fabs(t.d_star[1][1] - 0.5) < 1e-12);
    CHECK(std::fabs(t.d_star[0][1]) < 1e-13);
    CHECK(t.zs_measure == 0.5);

    // linear scaling in the scalar coefficient
    const auto t2 = celldiff::assemble_d_star(e1, e2, cell, 2.0);
    CHECK(t2.d_star[0][0] == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("corrector is independent of the scalar coefficient") {
    const auto cell = stepped_cell(8);
    const auto a = celldiff::solve_cell_diffusion(cell, 0, 1.0, 1e-12);
    const auto b = celldiff::solve_cell_diffusion(cell, 0, 5.0, 1e-12);
    for (std::size_t c = 0; c < a.eta.size(); ++c) CHECK(a.eta[c] == b.eta[c]);
}

TEST_CASE("D* symmetry, Voigt bound and positive semidefiniteness") {
    const auto cell = stepped_cell(8);
    const double ds = 1.3;
    const auto e1 = celldiff::solve_cell_diffusion(cell, 0, ds, 1e-12);
    const auto e2 = celldiff::solve_cell_diffusion(cell, 1, ds, 1e-12);
    const auto t = celldiff::assemble_d_star(e1, e2, cell, ds);

    CHECK(t.d_star[0][1] == t.d_star[1][0]);

    const double tr = t.d_star[0][0] + t.d_star[1][1];
    const double det = t.d_star[0][0] * t.d_star[1][1] - t.d_star[0][1] * t.d_star[1][0];
    const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
    const double lo = tr / 2.0 - disc, hi = tr / 2.0 + disc;
    CHECK(lo >= -1e-12);
    CHECK(hi <= cell.measures.zs * ds + 1e-12);

    // the stepped slab really has an active corrector in y1
    CHECK(t.d_star[0][0] < cell.measures.zs * ds - 1e-3);
    // and a trivial one in y2
    CHECK(t.d_star[1][1] == doctest::Approx(cell.measures.zs * ds).epsilon(1e-10));
}

TEST_CASE("D* is invariant under integer-voxel lateral translation") {
    auto shifted = [](int n, double offset) {
        geom::Primitive a, b;
        a.kind = geom::Primitive::Kind::Box;
        a.min = {offset, 0.0, -0.25};
        a.max = {offset + 0.5, 1.0, 0.25};
        b.kind = geom::Primitive::Kind::Box;
        b.min = {offset + 0.5, 0.0, -0.125};
        b.max = {offset + 1.0, 1.0, 0.125};
        geom::MicrostructureSpec spec;
        spec.resolution = n;
        spec.solids = {a, b};
        return geom::build_cell(spec);
    };
    const auto base = shifted(8, 0.0);
    const auto moved = shifted(8, 3.0 / 8.0);
    const auto tb = celldiff::assemble_d_star(celldiff::solve_cell_diffusion(base, 0, 1.0, 1e-13),
                                              celldiff::solve_cell_diffusion(base, 1, 1.0, 1e-13),
                                              base, 1.0);
    const auto tm = celldiff::assemble_d_star(celldiff::solve_cell_diffusion(moved, 0, 1.0, 1e-13),
                                              celldiff::solve_cell_diffusion(moved, 1, 1.0, 1e-13),
                                              moved, 1.0);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            CHECK(std::fabs(tb.d_star[i][j] - tm.d_star[i][j]) < 1e-10);
}

TEST_CASE("stepped slab converges under refinement") {
    double d11[3];
    const int res[3] = {8, 16, 32};
    for (int r = 0; r < 3; ++r) {
        const auto cell = stepped_cell(res[r]);
        const auto e1 = celldiff::solve_cell_diffusion(cell, 0, 1.0, 1e-12);
        const auto e2 = celldiff::solve_cell_diffusion(cell, 1, 1.0, 1e-12);
        d11[r] = celldiff::assemble_d_star(e1, e2, cell, 1.0).d_star[0][0];
    }
    const double e_coarse = std::fabs(d11[0] - d11[2]);
    const double e_mid = std::fabs(d11[1] - d11[2]);
    CHECK(e_mid <= e_coarse);
}

TEST_CASE("empty solid phase is rejected") {
    geom::MicrostructureSpec spec;
    spec.resolution = 8;
    const auto cell = geom::build_cell(spec);
    CHECK_THROWS_AS((void)celldiff::solve_cell_diffusion(cell, 0, 1.0, 1e-12),
                    std::invalid_argument);
}

TEST_CASE("disconnected solid: per-component solve keeps the slab identity") {
    geom::Primitive a, b;
    a.kind = geom::Primitive::Kind::Box;
    a.min = {0.0, 0.0, -0.5};
    a.max = {1.0, 1.0, -0.25};
    b.kind = geom::Primitive::Kind::Box;
    b.min = {0.0, 0.0, 0.25};
    b.max = {1.0, 1.0, 0.5};
    geom::MicrostructureSpec spec;
    spec.resolution = 8;
    spec.solids = {a, b};
    const auto cell = geom::build_cell(spec);
    const auto e1 = celldiff::solve_cell_diffusion(cell, 0, 1.0, 1e-12);
    CHECK(e1.solid_components == 2);
    const auto e2 = celldiff::solve_cell_diffusion(cell, 1, 1.0, 1e-12);
    const auto t = celldiff::assemble_d_star(e1, e2, cell, 1.0);
    // both slabs are laterally uniform: the correctors vanish per component
    CHECK(std::fabs(t.d_star[0][0] - cell.measures.zs) < 1e-12);
    CHECK(std::fabs(t.d_star[1][1] - cell.measures.zs) < 1e-12);
}
