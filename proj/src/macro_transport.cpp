#include "poromem/macro_transport.hpp"

#include <cmath>
#include <stdexcept>

namespace poromem::transport {

namespace {

// Scalar implicit-Euler exchange update: solve zs*(c - c0)/dt = gm*h(a, c)
// for c. Damped Newton with a bisection fallback; the Lipschitz bound on h
// makes the map a contraction for moderate dt.
double implicit_exchange(const kin::KineticsSpec& kin, double zs, double gm, double dt, double c0,
                         double a) {
    const double lam = dt * gm / zs;
    if (kin.variant == kin::Variant::Zero) return c0;
    if (kin.variant == kin::Variant::Linear) {
        // closed form of c = c0 + lam*k*(a - c)
        return (c0 + lam * kin.k * a) / (1.0 + lam * kin.k);
    }
    auto F = [&](double c) { return c - c0 - lam * kin::eval_h(kin, a, c); };
    double c = c0 + lam * kin::eval_h(kin, a, c0);  // explicit predictor
    for (int it = 0; it < 50; ++it) {
        const double f = F(c);
        if (std::fabs(f) <= 1e-14 * (1.0 + std::fabs(c))) return c;
        const double eps = 1e-7 * (1.0 + std::fabs(c));
        const double df = (F(c + eps) - F(c - eps)) / (2.0 * eps);
        double step = std::fabs(df) > 1e-12 ? -f / df : -f;
        double cn = c + step;
        // damp until the residual shrinks
        int guard = 0;
        while (std::fabs(F(cn)) > 0.9 * std::fabs(f) && guard++ < 30) {
            step *= 0.5;
            cn = c + step;
        }
        c = cn;
    }
    // bisection fallback on a bracketing interval
    double lo = c0 - (1.0 + std::fabs(c0) + std::fabs(a)) * (1.0 + lam) * 10.0;
    double hi = c0 + (1.0 + std::fabs(c0) + std::fabs(a)) * (1.0 + lam) * 10.0;
    if (F(lo) > 0.0 || F(hi) < 0.0)
        throw std::runtime_error("implicit exchange update failed to bracket a root");
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (F(mid) <= 0.0) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

TransportSystem::TransportSystem(const TransportGrid& grid, const TransportConfig& config,
                                 const geom::ReferenceCell& cell,
                                 const celldiff::EffectiveDiffusionTensor* d_star)
    : grid_(grid), config_(config), cell_(cell) {
    if (config.d_f <= 0.0 || config.d_s <= 0.0)
        throw std::invalid_argument("TransportSystem: diffusivities must be positive");
    if (cell_.solid_count == 0)
        throw std::invalid_argument("TransportSystem: the solid phase is empty (|Z_s| = 0)");
    if (d_star) d_star_ = *d_star;
    if (config.regime == GammaRegime::MinusOne && !d_star_)
        throw std::invalid_argument("TransportSystem: regime -1 requires the homogenized tensor");

    // compact solid mesh for the per-point cell problems
    const int n = cell_.n, nz = cell_.nz();
    solid_compact_.assign(cell_.phase.size(), -1);
    for (std::size_t c = 0; c < cell_.phase.size(); ++c) {
        if (cell_.phase[c] != 0) {
            solid_compact_[c] = static_cast<std::int32_t>(solid_cells_.size());
            solid_cells_.push_back(static_cast<std::int32_t>(c));
        }
    }
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                if (!cell_.solid(i, j, k)) continue;
                const std::int32_t me = solid_compact_[cell_.cell_index(i, j, k)];
                const int ip = (i + 1) % n, jp = (j + 1) % n;
                if (cell_.solid(ip, j, k))
                    solid_faces_.push_back({me, solid_compact_[cell_.cell_index(ip, j, k)]});
                if (cell_.solid(i, jp, k))
                    solid_faces_.push_back({me, solid_compact_[cell_.cell_index(i, jp, k)]});
                if (k + 1 < nz && cell_.solid(i, j, k + 1))
                    solid_faces_.push_back({me, solid_compact_[cell_.cell_index(i, j, k + 1)]});
            }
    const double af = 1.0 / (static_cast<double>(n) * n);
    for (const auto& f : cell_.gamma_faces)
        gamma_sources_.emplace_back(solid_compact_[cell_.cell_index(f.i, f.j, f.k)], af);

    const double h = cell_.h();
    const double vy = h * h * h;
    cell_jacobi_.assign(solid_cells_.size(), vy / config_.dt);
    for (const auto& f : solid_faces_) {
        cell_jacobi_[f.a] += config_.d_s * h;
        cell_jacobi_[f.b] += config_.d_s * h;
    }
}

std::size_t TransportSystem::fluid_cells() const {
    return static_cast<std::size_t>(grid_.n_sigma) * grid_.n_sigma * 2 * grid_.n_layers;
}

std::size_t TransportSystem::solid_unknowns() const {
    const std::size_t ns = static_cast<std::size_t>(grid_.n_sigma) * grid_.n_sigma;
    return config_.regime == GammaRegime::One ? ns * solid_cells_.size() : ns;
}

TransportState TransportSystem::initial_state(double c_f_init, double c_s_init) const {
    TransportState st;
    st.c_f.assign(fluid_cells(), c_f_init);
    st.c_s.assign(solid_unknowns(), c_s_init);
    st.t = 0.0;
    return st;
}

lin::Vector TransportSystem::sigma_trace(const TransportState& state) const {
    const int n = grid_.n_sigma, L = grid_.n_layers;
    lin::Vector tr(static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const std::size_t below = (static_cast<std::size_t>(L - 1) * n + j) * n + i;
            const std::size_t above = (static_cast<std::size_t>(L) * n + j) * n + i;
            tr[static_cast<std::size_t>(j) * n + i] = 0.5 * (state.c_f[below] + state.c_f[above]);
        }
    return tr;
}

lin::Vector TransportSystem::step_solid_ode(TransportState& state, const lin::Vector& trace) const {
    const double zs = cell_.measures.zs, gm = cell_.measures.gamma;
    lin::Vector exchanged(state.c_s.size());
    for (std::size_t s = 0; s < state.c_s.size(); ++s) {
        const double c_new = implicit_exchange(config_.kinetics, zs, gm, config_.dt, state.c_s[s],
                                               trace[s]);
        exchanged[s] = zs * (c_new - state.c_s[s]);
        state.c_s[s] = c_new;
    }
    return exchanged;
}

lin::Vector TransportSystem::step_solid_gamma_minus1(TransportState& state,
                                                     const lin::Vector& trace) const {
    // reaction sub-step shared with the ODE regime, then implicit surface
    // diffusion; a vanishing tensor leaves the ODE path untouched
    lin::Vector exchanged = step_solid_ode(state, trace);
    const auto& D = d_star_->d_star;
    const bool zero = D[0][0] == 0.0 && D[0][1] == 0.0 && D[1][0] == 0.0 && D[1][1] == 0.0;
    if (zero) return exchanged;

    const int n = grid_.n_sigma;
    const double hx = grid_.lateral / n;
    const double zs = cell_.measures.zs;
    const std::size_t m = static_cast<std::size_t>(n) * n;
    auto idx = [&](int i, int j) {
        return static_cast<std::size_t>((j + n) % n) * n + ((i + n) % n);
    };
    // |Z_s| c_t = div(D* grad c): implicit Euler, 5-point plus corner
    // averaging for the cross terms
    lin::SparseOperator op;
    op.dim = m;
    const double adt = config_.dt / (zs * hx * hx);
    op.apply = [&, adt](const lin::Vector& x, lin::Vector& y) {
        y.assign(m, 0.0);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const double c = x[idx(i, j)];
                double lap = D[0][0] * (x[idx(i + 1, j)] - 2 * c + x[idx(i - 1, j)]) +
                             D[1][1] * (x[idx(i, j + 1)] - 2 * c + x[idx(i, j - 1)]);
                const double cross = (x[idx(i + 1, j + 1)] - x[idx(i + 1, j - 1)] -
                                      x[idx(i - 1, j + 1)] + x[idx(i - 1, j - 1)]) * 0.25;
                lap += (D[0][1] + D[1][0]) * cross;
                y[idx(i, j)] = c - adt * lap;
            }
    };
    op.jacobi.assign(m, 1.0 + adt * 2.0 * (D[0][0] + D[1][1]));
    lin::CgOptions copt;
    copt.tol = 1e-13;
    copt.x0 = &state.c_s;
    state.c_s = lin::cg_solve(op, state.c_s, copt);
    return exchanged;
}

lin::Vector TransportSystem::step_solid_gamma1(TransportState& state,
                                               const lin::Vector& trace) const {
    const int n = grid_.n_sigma;
    const std::size_t m = static_cast<std::size_t>(n) * n;
    const std::size_t ns = solid_cells_.size();
    const double h = cell_.h();
    const double vy = h * h * h;
    const double idt = vy / config_.dt;
    const double tf = config_.d_s * h;

    lin::Vector exchanged(m, 0.0);
    lin::Vector rhs(ns), x(ns), r(ns), z(ns), d(ns), ad(ns);
    for (std::size_t s = 0; s < m; ++s) {
        double* cs = state.c_s.data() + s * ns;
        // explicit interface source h(trace, c_s at the face voxel)
        for (std::size_t q = 0; q < ns; ++q) rhs[q] = idt * cs[q];
        double gained = 0.0;
        for (const auto& [voxel, area] : gamma_sources_) {
            const double hv = kin::eval_h(config_.kinetics, trace[s], cs[voxel]);
            rhs[voxel] += hv * area;
            gained += hv * area;
        }
        exchanged[s] = config_.dt * gained;

        // implicit diffusion in the cell: (V/dt) c + D_s L c = rhs
        auto apply = [&](const lin::Vector& in, lin::Vector& out) {
            for (std::size_t q = 0; q < ns; ++q) out[q] = idt * in[q];
            for (const auto& f : solid_faces_) {
                const double flux = tf * (in[f.b] - in[f.a]);
                out[f.a] -= flux;
                out[f.b] += flux;
            }
        };
        for (std::size_t q = 0; q < ns; ++q) x[q] = cs[q];
        apply(x, ad);
        for (std::size_t q = 0; q < ns; ++q) r[q] = rhs[q] - ad[q];
        const double target = 1e-13 * (1.0 + lin::norm2(rhs));
        double rho = 0.0;
        for (long it = 0; it < 10000 && lin::norm2(r) > target; ++it) {
            for (std::size_t q = 0; q < ns; ++q) z[q] = r[q] / cell_jacobi_[q];
            const double rho_new = lin::dot(r, z);
            if (it == 0) d = z;
            else {
                const double beta = rho_new / rho;
                for (std::size_t q = 0; q < ns; ++q) d[q] = z[q] + beta * d[q];
            }
            rho = rho_new;
            apply(d, ad);
            const double alpha = rho / lin::dot(d, ad);
            lin::axpy(alpha, d, x);
            lin::axpy(-alpha, ad, r);
        }
        for (std::size_t q = 0; q < ns; ++q) cs[q] = x[q];
    }
    return exchanged;
}

double TransportSystem::face_velocity(const AdvectingVelocity& vel, int comp, int i, int j,
                                      int k) const {
    if (!vel.staggered) return vel.uniform[comp];
    const int n = grid_.n_sigma, nz = 2 * grid_.n_layers;
    const std::size_t cells = static_cast<std::size_t>(n) * n * nz;
    if (comp == 0) return (*vel.staggered)[(static_cast<std::size_t>(k) * n + j) * n + i];
    if (comp == 1) return (*vel.staggered)[cells + (static_cast<std::size_t>(k) * n + j) * n + i];
    return (*vel.staggered)[2 * cells + (static_cast<std::size_t>(k) * n + j) * n + i];
}

void TransportSystem::check_cfl(const AdvectingVelocity& vel) const {
    const int n = grid_.n_sigma, nz = 2 * grid_.n_layers;
    const double hx = grid_.lateral / n, hz = grid_.height / grid_.n_layers;
    double worst = 0.0;
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const double cu = std::fabs(face_velocity(vel, 0, i, j, k)) / hx +
                                  std::fabs(face_velocity(vel, 1, i, j, k)) / hx +
                                  std::fabs(face_velocity(vel, 2, i, j, k)) / hz;
                worst = std::max(worst, cu);
            }
    if (config_.dt * worst > 1.0) {
        throw std::runtime_error("step_fluid: advective CFL violated (dt*max|v|/h = " +
                                 std::to_string(config_.dt * worst) + ")");
    }
}

void TransportSystem::step_fluid(TransportState& state, const AdvectingVelocity& vel,
                                 const lin::Vector& sink_per_area) const {
    check_cfl(vel);
    const int n = grid_.n_sigma, L = grid_.n_layers, nz = 2 * L;
    const double hx = grid_.lateral / n, hz = grid_.height / grid_.n_layers;
    const double V = hx * hx * hz;
    const std::size_t m = fluid_cells();
    auto cidx = [&](int i, int j, int k) {
        return (static_cast<std::size_t>(k) * n + (j + n) % n) * n + (i + n) % n;
    };

    // explicit first-order upwind advection in conservative flux form;
    // the outer z-planes carry no total flux
    lin::Vector cstar = state.c_f;
    const double ax = hx * hz, az = hx * hx;
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                // x faces
                const double ux = face_velocity(vel, 0, i, j, k);
                if (ux != 0.0) {
                    const double up = ux > 0.0 ? state.c_f[cidx(i - 1, j, k)] : state.c_f[cidx(i, j, k)];
                    const double fl = ux * up * ax * config_.dt / V;
                    cstar[cidx(i, j, k)] += fl;
                    cstar[cidx(i - 1, j, k)] -= fl;
                }
                const double uy = face_velocity(vel, 1, i, j, k);
                if (uy != 0.0) {
                    const double up = uy > 0.0 ? state.c_f[cidx(i, j - 1, k)] : state.c_f[cidx(i, j, k)];
                    const double fl = uy * up * ax * config_.dt / V;
                    cstar[cidx(i, j, k)] += fl;
                    cstar[cidx(i, j - 1, k)] -= fl;
                }
                if (k > 0) {
                    const double uz = face_velocity(vel, 2, i, j, k);
                    if (uz != 0.0) {
                        const double up = uz > 0.0 ? state.c_f[cidx(i, j, k - 1)] : state.c_f[cidx(i, j, k)];
                        const double fl = uz * up * az * config_.dt / V;
                        cstar[cidx(i, j, k)] += fl;
                        cstar[cidx(i, j, k - 1)] -= fl;
                    }
                }
            }

    // interface sink split over the two layers adjacent to Sigma
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const double e = sink_per_area[static_cast<std::size_t>(j) * n + i];
            cstar[cidx(i, j, L - 1)] -= 0.5 * e / hz;
            cstar[cidx(i, j, L)] -= 0.5 * e / hz;
        }

    // implicit diffusion, 7-point, no-flux at the outer z-planes
    lin::SparseOperator op;
    op.dim = m;
    const double adx = config_.dt * config_.d_f / (hx * hx);
    const double adz = config_.dt * config_.d_f / (hz * hz);
    op.apply = [&, adx, adz](const lin::Vector& x, lin::Vector& y) {
        y.assign(m, 0.0);
        for (int k = 0; k < nz; ++k)
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i) {
                    const double c = x[cidx(i, j, k)];
                    double acc = c;
                    acc -= adx * (x[cidx(i + 1, j, k)] - 2 * c + x[cidx(i - 1, j, k)]);
                    acc -= adx * (x[cidx(i, j + 1, k)] - 2 * c + x[cidx(i, j - 1, k)]);
                    double lz = 0.0;
                    if (k + 1 < nz) lz += x[cidx(i, j, k + 1)] - c;
                    if (k > 0) lz += x[cidx(i, j, k - 1)] - c;
                    acc -= adz * lz;
                    y[cidx(i, j, k)] = acc;
                }
    };
    op.jacobi.assign(m, 1.0 + 4.0 * adx + 2.0 * adz);
    lin::CgOptions copt;
    copt.tol = 1e-13;
    copt.x0 = &cstar;
    state.c_f = lin::cg_solve(op, cstar, copt);
    for (double v : state.c_f)
        if (!std::isfinite(v)) throw std::runtime_error("step_fluid: non-finite concentration");
}

ExchangeLedger TransportSystem::coupled_step(TransportState& state,
                                             const AdvectingVelocity& vel) const {
    const lin::Vector trace = sigma_trace(state);
    lin::Vector exchanged;
    switch (config_.regime) {
        case GammaRegime::Intermediate: exchanged = step_solid_ode(state, trace); break;
        case GammaRegime::MinusOne: exchanged = step_solid_gamma_minus1(state, trace); break;
        case GammaRegime::One: exchanged = step_solid_gamma1(state, trace); break;
    }
    step_fluid(state, vel, exchanged);
    state.t += config_.dt;

    const double hx = grid_.lateral / grid_.n_sigma;
    ExchangeLedger ledger;
    for (double e : exchanged) ledger.solid_gain += e * hx * hx;
    for (double e : exchanged) ledger.fluid_sink += e * hx * hx;
    return ledger;
}

double TransportSystem::total_fluid_mass(const TransportState& state) const {
    const double hx = grid_.lateral / grid_.n_sigma;
    const double hz = grid_.height / grid_.n_layers;
    double acc = 0.0;
    for (double c : state.c_f) acc += c;
    return acc * hx * hx * hz;
}

double TransportSystem::total_solid_mass(const TransportState& state) const {
    const double hx = grid_.lateral / grid_.n_sigma;
    if (config_.regime == GammaRegime::One) {
        const double h = cell_.h();
        double acc = 0.0;
        for (double c : state.c_s) acc += c;
        return acc * h * h * h * hx * hx;
    }
    double acc = 0.0;
    for (double c : state.c_s) acc += c;
    return acc * cell_.measures.zs * hx * hx;
}

double TransportSystem::total_mass(const TransportState& state) const {
    return total_fluid_mass(state) + total_solid_mass(state);
}

double TransportSystem::fluid_min(const TransportState& state) const {
    double m = state.c_f.empty() ? 0.0 : state.c_f.front();
    for (double v : state.c_f) m = std::min(m, v);
    return m;
}
double TransportSystem::fluid_max(const TransportState& state) const {
    double m = state.c_f.empty() ? 0.0 : state.c_f.front();
    for (double v : state.c_f) m = std::max(m, v);
    return m;
}
double TransportSystem::solid_min(const TransportState& state) const {
    double m = state.c_s.empty() ? 0.0 : state.c_s.front();
    for (double v : state.c_s) m = std::min(m, v);
    return m;
}
double TransportSystem::solid_max(const TransportState& state) const {
    double m = state.c_s.empty() ? 0.0 : state.c_s.front();
    for (double v : state.c_s) m = std::max(m, v);
    return m;
}

double total_mass(const TransportSystem& sys, const TransportState& state) {
    return sys.total_mass(state);
}

} // namespace poromem::transport
