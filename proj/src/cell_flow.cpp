#include "poromem/cell_flow.hpp"

#include <cmath>
#include <stdexcept>

namespace poromem::cellflow {

const char* mode_name(CellMode m) {
    switch (m) {
        case CellMode::TangentialPlus1: return "q1_plus";
        case CellMode::TangentialPlus2: return "q2_plus";
        case CellMode::TangentialMinus1: return "q1_minus";
        case CellMode::TangentialMinus2: return "q2_minus";
        case CellMode::Normal: return "q3";
    }
    return "?";
}

mac::ModeData mode_data(CellMode m) {
    mac::ModeData md;
    switch (m) {
        case CellMode::TangentialPlus1: md.top.u = 1.0; break;
        case CellMode::TangentialPlus2: md.top.v = 1.0; break;
        case CellMode::TangentialMinus1: md.bottom.u = 1.0; break;
        case CellMode::TangentialMinus2: md.bottom.v = 1.0; break;
        case CellMode::Normal: md.top.w = 1.0; md.bottom.w = 1.0; break;
    }
    return md;
}

CellFlowWorkspace::CellFlowWorkspace(const geom::ReferenceCell& cell) : cell_(cell) {
    const int n = cell.n;
    mac::Grid g;
    g.nx = n;
    g.ny = n;
    g.nz = 2 * n;
    g.hx = g.hy = g.hz = 1.0 / n;
    problem_ = std::make_unique<mac::StokesProblem>(g, cell_.phase.data(), mac::ZKind::Data,
                                                    mac::ZKind::Data);
}

StokesCellSolution CellFlowWorkspace::solve(CellMode mode, double tol) const {
    const mac::StokesProblem& pr = *problem_;
    const mac::ModeData md = mode_data(mode);
    const auto& dofs = pr.dofs();
    if (dofs.n_pressure == 0) throw std::runtime_error("solve_cell_stokes: no fluid voxels");

    lin::SaddleSystem sys;
    sys.A.dim = dofs.n_active;
    sys.A.jacobi = pr.stress_diagonal();
    auto scratch = std::make_shared<std::pair<lin::Vector, lin::Vector>>();
    scratch->first.assign(pr.full_size(), 0.0);   // field buffer
    scratch->second.assign(pr.full_size(), 0.0);  // force buffer
    sys.A.apply = [&pr, scratch](const lin::Vector& x, lin::Vector& y) {
        auto& X = scratch->first;
        auto& F = scratch->second;
        pr.insert_active(x, X);
        std::fill(F.begin(), F.end(), 0.0);
        pr.apply_stress_full(X, F, nullptr);
        pr.extract_active_into(F, y);
    };
    sys.pressure_dim = dofs.n_pressure;
    sys.apply_div = [&pr, scratch](const lin::Vector& u, lin::Vector& d) {
        auto& X = scratch->first;
        pr.insert_active(u, X);
        pr.divergence_full(X, d);
    };
    sys.apply_grad = [&pr](const lin::Vector& p, lin::Vector& f) {
        lin::Vector F(pr.full_size(), 0.0);
        pr.gradient_full(p, F);
        f = pr.extract_active(F);
    };

    // momentum and divergence response of the Dirichlet data
    const lin::Vector data = pr.data_field(md);
    {
        lin::Vector F(pr.full_size(), 0.0);
        pr.apply_stress_full(data, F, &md);
        sys.f = pr.extract_active(F);
        lin::scale(-1.0, sys.f);
        lin::Vector d;
        pr.divergence_full(data, d);
        sys.g = d;
        lin::scale(-1.0, sys.g);
    }
    // compatibility: total boundary influx must vanish for a plug mode
    {
        double net = 0.0;
        for (double v : sys.g) net += v;
        if (std::fabs(net) > 1e-10 * (1.0 + lin::norm2(sys.g))) {
            throw lin::SolverError("solve_cell_stokes: incompatible boundary data (net flux " +
                                       std::to_string(net) + "); |S_f^+| != |S_f^-|",
                                   0.0, std::fabs(net));
        }
    }
    sys.zero_mean_pressure = true;
    sys.pressure_volume.assign(dofs.n_pressure, pr.cell_volume());

    lin::UzawaOptions opt;
    opt.tol = tol;
    lin::UzawaResult res = lin::uzawa_solve(sys, opt);

    StokesCellSolution sol;
    sol.mode = mode;
    sol.n = cell_.n;
    sol.field = pr.full_solution(res.velocity, md);
    // the flux-form multiplier is the physical pressure up to sign:
    // a(u,phi) - (pi, div phi) = (f,phi) vs. the solver's A u + B^T p = f
    sol.pressure.assign(cell_.phase.size(), 0.0);
    for (std::size_t p = 0; p < dofs.n_pressure; ++p)
        sol.pressure[dofs.active_cell[p]] = -res.pressure[p];
    sol.momentum_residual = res.momentum_residual;
    sol.divergence_residual = pr.divergence_max(sol.field);
    sol.outer_iterations = res.outer_iterations;
    sol.inner_iterations = res.inner_iterations;
    return sol;
}

double CellFlowWorkspace::pairing(const StokesCellSolution& a, const StokesCellSolution& b) const {
    return problem_->bilinear(a.field, mode_data(a.mode), b.field, mode_data(b.mode));
}

StokesCellSolution solve_cell_stokes(const geom::ReferenceCell& cell, CellMode mode, double tol) {
    CellFlowWorkspace ws(cell);
    return ws.solve(mode, tol);
}

namespace {

const StokesCellSolution& pick(const std::array<StokesCellSolution, 5>& s, CellMode m) {
    for (const auto& sol : s)
        if (sol.mode == m) return sol;
    throw std::invalid_argument("assemble_effective_tensors: missing cell mode");
}

// volume average of one velocity component of a full staggered field
std::array<double, 3> field_average(const mac::StokesProblem& pr, const lin::Vector& X) {
    const mac::Grid& g = pr.grid();
    std::array<double, 3> acc{0.0, 0.0, 0.0};
    long fluid = 0;
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                if (!pr.is_fluid(i, j, k)) continue;
                ++fluid;
                const int ip = (i + 1) % g.nx, jp = (j + 1) % g.ny;
                acc[0] += 0.5 * (X[g.uidx(i, j, k)] + X[g.uidx(ip, j, k)]);
                acc[1] += 0.5 * (X[pr.offset_v() + g.vidx(i, j, k)] +
                                 X[pr.offset_v() + g.vidx(i, jp, k)]);
                acc[2] += 0.5 * (X[pr.offset_w() + g.widx(i, j, k)] +
                                 X[pr.offset_w() + g.widx(i, j, k + 1)]);
            }
    for (auto& v : acc) v /= static_cast<double>(fluid);
    return acc;
}

} // namespace

EffectiveFlowTensors assemble_effective_tensors(const std::array<StokesCellSolution, 5>& solutions,
                                                const geom::ReferenceCell& cell) {
    for (const auto& s : solutions) {
        if (s.n != cell.n)
            throw std::invalid_argument("assemble_effective_tensors: solution grid mismatch");
    }
    CellFlowWorkspace ws(cell);
    const mac::StokesProblem& pr = ws.problem();

    const CellMode tang[2][2] = {{CellMode::TangentialPlus1, CellMode::TangentialPlus2},
                                 {CellMode::TangentialMinus1, CellMode::TangentialMinus2}};
    const StokesCellSolution& q3 = pick(solutions, CellMode::Normal);

    EffectiveFlowTensors t;
    t.resolution = cell.n;
    t.zf_measure = cell.measures.zf;
    t.gamma_measure = cell.measures.gamma;

    // canonical pairings; the mirrored entries are copies, so the symmetry
    // G^{ab}_{ij} = G^{ba}_{ji} holds bit-exactly in the stored table
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) {
                    if (b * 2 + j < a * 2 + i) {
                        t.g_tangential[a][b][i][j] = t.g_tangential[b][a][j][i];
                    } else {
                        t.g_tangential[a][b][i][j] =
                            ws.pairing(pick(solutions, tang[a][i]), pick(solutions, tang[b][j]));
                    }
                }
    for (int a = 0; a < 2; ++a)
        for (int i = 0; i < 2; ++i)
            t.g_normal_coupling[a][i] = ws.pairing(pick(solutions, tang[a][i]), q3);
    t.g_normal_normal = ws.pairing(q3, q3);

    auto embed_K = [&](int a) {
        Mat3 K{};
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) K[i][j] = t.g_tangential[a][a][i][j];
        for (int i = 0; i < 2; ++i) {
            K[i][2] = t.g_normal_coupling[a][i];
            K[2][i] = t.g_normal_coupling[a][i];
        }
        K[2][2] = 0.5 * t.g_normal_normal;
        return K;
    };
    t.K_plus = embed_K(0);
    t.K_minus = embed_K(1);

    // M from the +/- tangential pairings; the continuous tensor is symmetric,
    // the assembled one is symmetrized and the defect reported
    double asym = 0.0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            asym = std::max(asym, std::fabs(t.g_tangential[0][1][i][j] - t.g_tangential[0][1][j][i]));
            t.M[i][j] = 0.5 * (t.g_tangential[0][1][i][j] + t.g_tangential[0][1][j][i]);
        }
    t.m_asymmetry = asym;
    for (int i = 0; i < 3; ++i) {
        t.M[i][2] = 0.0;
        t.M[2][i] = 0.0;
    }

    // A^a: column j is the Z_f average of mode j on side a, with the plug
    // mode entering both sides at half weight
    const auto avg3 = field_average(pr, q3.field);
    for (int a = 0; a < 2; ++a) {
        Mat3 A{};
        for (int j = 0; j < 2; ++j) {
            const auto avg = field_average(pr, pick(solutions, tang[a][j]).field);
            for (int kcomp = 0; kcomp < 3; ++kcomp) A[kcomp][j] = avg[kcomp];
        }
        for (int kcomp = 0; kcomp < 3; ++kcomp) A[kcomp][2] = 0.5 * avg3[kcomp];
        Mat3 Q = A;
        Q[2][2] -= 1.0 / t.zf_measure;
        if (a == 0) {
            t.A_plus = A;
            t.Q_plus = Q;
        } else {
            t.A_minus = A;
            t.Q_minus = Q;
        }
    }
    return t;
}

double coercivity_margin(const EffectiveFlowTensors& t) {
    // 6x6 form on (xi^+, xi^-), eliminated to 5 coordinates by xi3^- := xi3^+
    double B[6][6] = {};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            B[i][j] = t.K_plus[i][j];
            B[3 + i][3 + j] = t.K_minus[i][j];
            B[i][3 + j] = t.M[i][j];
            B[3 + i][j] = t.M[j][i];
        }
    // coordinates (xi1+, xi2+, xi3, xi1-, xi2-); embedding columns
    const int cols[5][2] = {{0, -1}, {1, -1}, {2, 5}, {3, -1}, {4, -1}};
    std::vector<double> R(25, 0.0);
    for (int a = 0; a < 5; ++a)
        for (int b = 0; b < 5; ++b) {
            double s = 0.0;
            for (int p = 0; p < 2; ++p)
                for (int q = 0; q < 2; ++q) {
                    const int ia = cols[a][p], ib = cols[b][q];
                    if (ia < 0 || ib < 0) continue;
                    s += B[ia][ib];
                }
            R[a * 5 + b] = s;
        }
    const auto ev = lin::symmetric_eigenvalues(R, 5);
    return ev.front();
}

std::array<double, 3> darcy_velocity(const EffectiveFlowTensors& t,
                                     const std::array<double, 3>& vp,
                                     const std::array<double, 3>& vm) {
    const double scale = 1.0 + std::fabs(vp[2]) + std::fabs(vm[2]);
    if (std::fabs(vp[2] - vm[2]) > 1e-9 * scale) {
        throw std::invalid_argument("darcy_velocity: normal trace components differ");
    }
    std::array<double, 3> out{0.0, 0.0, 0.0};
    for (int k = 0; k < 3; ++k)
        for (int j = 0; j < 3; ++j)
            out[k] += t.Q_plus[k][j] * vp[j] + t.Q_minus[k][j] * vm[j];
    out[2] += (2.0 / t.zf_measure) * vp[2];
    return out;
}

} // namespace poromem::cellflow
