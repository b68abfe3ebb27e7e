#include "poromem/cell_diffusion.hpp"

#include <cmath>
#include <stdexcept>

namespace poromem::celldiff {

namespace {

// Connectivity labels for solid voxels (6-neighbour, lateral wrap).
std::vector<std::int32_t> solid_components(const geom::ReferenceCell& cell, int& count) {
    const int n = cell.n, nz = cell.nz();
    std::vector<std::int32_t> label(cell.phase.size(), -1);
    count = 0;
    std::vector<std::size_t> stack;
    for (std::size_t start = 0; start < cell.phase.size(); ++start) {
        if (cell.phase[start] == 0 || label[start] >= 0) continue;
        const std::int32_t id = count++;
        label[start] = id;
        stack.assign(1, start);
        while (!stack.empty()) {
            const std::size_t c = stack.back();
            stack.pop_back();
            const int i = static_cast<int>(c % n);
            const int j = static_cast<int>((c / n) % n);
            const int k = static_cast<int>(c / (static_cast<std::size_t>(n) * n));
            const int ni[6] = {(i + 1) % n, (i + n - 1) % n, i, i, i, i};
            const int nj[6] = {j, j, (j + 1) % n, (j + n - 1) % n, j, j};
            const int nk[6] = {k, k, k, k, k + 1, k - 1};
            for (int d = 0; d < 6; ++d) {
                if (nk[d] < 0 || nk[d] >= nz) continue;
                const std::size_t cc = cell.cell_index(ni[d], nj[d], nk[d]);
                if (cell.phase[cc] == 0 || label[cc] >= 0) continue;
                label[cc] = id;
                stack.push_back(cc);
            }
        }
    }
    return label;
}

struct SolidFace {
    std::int32_t a, b;  // compact solid indices, flux from a to b along +axis
    std::int8_t axis;
};

struct SolidMesh {
    std::vector<std::int32_t> compact;      // cell -> compact solid index (-1)
    std::vector<std::int32_t> cells;        // compact -> cell
    std::vector<SolidFace> faces;           // solid-solid faces
    std::vector<std::int32_t> component;    // per compact index
    int n_components = 0;
};

SolidMesh build_solid_mesh(const geom::ReferenceCell& cell) {
    const int n = cell.n, nz = cell.nz();
    SolidMesh m;
    m.compact.assign(cell.phase.size(), -1);
    for (std::size_t c = 0; c < cell.phase.size(); ++c) {
        if (cell.phase[c] != 0) {
            m.compact[c] = static_cast<std::int32_t>(m.cells.size());
            m.cells.push_back(static_cast<std::int32_t>(c));
        }
    }
    auto labels = solid_components(cell, m.n_components);
    m.component.resize(m.cells.size());
    for (std::size_t s = 0; s < m.cells.size(); ++s) m.component[s] = labels[m.cells[s]];

    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                if (!cell.solid(i, j, k)) continue;
                const std::int32_t me = m.compact[cell.cell_index(i, j, k)];
                const int ip = (i + 1) % n, jp = (j + 1) % n;
                if (cell.solid(ip, j, k))
                    m.faces.push_back({me, m.compact[cell.cell_index(ip, j, k)], 0});
                if (cell.solid(i, jp, k))
                    m.faces.push_back({me, m.compact[cell.cell_index(i, jp, k)], 1});
                if (k + 1 < nz && cell.solid(i, j, k + 1))
                    m.faces.push_back({me, m.compact[cell.cell_index(i, j, k + 1)], 2});
            }
    return m;
}

void project_component_means(lin::Vector& x, const SolidMesh& m) {
    std::vector<double> sum(m.n_components, 0.0);
    std::vector<long> cnt(m.n_components, 0);
    for (std::size_t s = 0; s < x.size(); ++s) {
        sum[m.component[s]] += x[s];
        ++cnt[m.component[s]];
    }
    for (std::size_t s = 0; s < x.size(); ++s) x[s] -= sum[m.component[s]] / cnt[m.component[s]];
}

} // namespace

DiffusionCellSolution solve_cell_diffusion(const geom::ReferenceCell& cell, int direction,
                                           double d_s, double tol) {
    if (direction < 0 || direction > 1)
        throw std::invalid_argument("solve_cell_diffusion: direction must be 0 or 1");
    if (d_s <= 0.0) throw std::invalid_argument("solve_cell_diffusion: D^s must be positive");
    if (cell.solid_count == 0)
        throw std::invalid_argument("solve_cell_diffusion: empty solid phase");

    const SolidMesh mesh = build_solid_mesh(cell);
    const std::size_t ns = mesh.cells.size();
    const double h = cell.h();
    // face transmissibility h^3/h^2 = h; the scalar D^s cancels from the
    // corrector equation and only enters the assembled tensor
    const double tf = h;

    // rhs_s = sum over faces of e_dir . n contributions (divergence of the
    // constant background flux restricted to solid-solid faces)
    lin::Vector rhs(ns, 0.0);
    for (const auto& f : mesh.faces) {
        if (f.axis == direction) {
            // background flux e_dir through this face: +1 leaving a, entering b
            rhs[f.a] += h * h;
            rhs[f.b] -= h * h;
        }
    }
    // -div(e + grad eta) = 0  =>  L eta = div(e)|_discrete; we assemble
    // L eta = rhs with L the (singular) face-flux Laplacian
    lin::SparseOperator op;
    op.dim = ns;
    op.apply = [&mesh, tf](const lin::Vector& x, lin::Vector& y) {
        y.assign(x.size(), 0.0);
        for (const auto& f : mesh.faces) {
            const double flux = tf * (x[f.b] - x[f.a]);
            y[f.a] -= flux;
            y[f.b] += flux;
        }
    };
    op.jacobi.assign(ns, 1e-300);
    for (const auto& f : mesh.faces) {
        op.jacobi[f.a] += tf;
        op.jacobi[f.b] += tf;
    }
    // isolated voxels have no faces; keep their diagonal harmless
    for (auto& d : op.jacobi)
        if (d < 1e-200) d = 1.0;

    // compatibility per component holds by construction (the rhs telescopes),
    // and the mean is projected every iteration below
    lin::Vector x(ns, 0.0), r = rhs, z(ns), d(ns), ad(ns);
    project_component_means(r, mesh);
    const double target = tol * (1.0 + lin::norm2(rhs));
    double rnorm = lin::norm2(r);
    long it = 0;
    const long max_iter = std::min<long>(50000, 20 * static_cast<long>(std::sqrt((double)ns)) + 200);
    double rho = 0.0;
    while (rnorm > target && it < max_iter) {
        for (std::size_t s = 0; s < ns; ++s) z[s] = r[s] / op.jacobi[s];
        project_component_means(z, mesh);
        const double rho_new = lin::dot(r, z);
        if (it == 0) {
            d = z;
        } else {
            const double beta = rho_new / rho;
            for (std::size_t s = 0; s < ns; ++s) d[s] = z[s] + beta * d[s];
        }
        rho = rho_new;
        op.apply(d, ad);
        const double dad = lin::dot(d, ad);
        if (!(dad > 0.0)) break;  // d in the nullspace: rhs already consistent
        const double alpha = rho / dad;
        lin::axpy(alpha, d, x);
        lin::axpy(-alpha, ad, r);
        project_component_means(r, mesh);
        rnorm = lin::norm2(r);
        ++it;
    }
    if (rnorm > target) {
        throw lin::SolverError("solve_cell_diffusion: no convergence (residual " +
                                   std::to_string(rnorm) + ")",
                               rnorm);
    }
    project_component_means(x, mesh);

    DiffusionCellSolution sol;
    sol.direction = direction;
    sol.n = cell.n;
    sol.eta.assign(cell.phase.size(), 0.0);
    for (std::size_t s = 0; s < ns; ++s) sol.eta[mesh.cells[s]] = x[s];
    sol.residual = rnorm;
    sol.iterations = it;
    sol.solid_components = mesh.n_components;
    return sol;
}

EffectiveDiffusionTensor assemble_d_star(const DiffusionCellSolution& eta1,
                                         const DiffusionCellSolution& eta2,
                                         const geom::ReferenceCell& cell, double d_s) {
    if (eta1.n != cell.n || eta2.n != cell.n)
        throw std::invalid_argument("assemble_d_star: grid mismatch");
    const SolidMesh mesh = build_solid_mesh(cell);
    const double h = cell.h();
    const double vol = h * h * h;
    const DiffusionCellSolution* sols[2] = {&eta1, &eta2};

    EffectiveDiffusionTensor t;
    t.zs_measure = cell.measures.zs;
    t.gamma_measure = cell.measures.gamma;
    t.d_s = d_s;
    // per-face normal component of e_i + grad eta_i, paired across i and j
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            double acc = 0.0;
            for (const auto& f : mesh.faces) {
                const std::size_t ca = mesh.cells[f.a], cb = mesh.cells[f.b];
                const double gi = (f.axis == i ? 1.0 : 0.0) +
                                  (sols[i]->eta[cb] - sols[i]->eta[ca]) / h;
                const double gj = (f.axis == j ? 1.0 : 0.0) +
                                  (sols[j]->eta[cb] - sols[j]->eta[ca]) / h;
                acc += gi * gj;
            }
            t.d_star[i][j] = d_s * vol * acc;
        }
    return t;
}

} // namespace poromem::celldiff
