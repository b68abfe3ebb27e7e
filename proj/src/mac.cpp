#include "poromem/mac.hpp"

#include <cassert>
#include <cmath>
#include <map>
#include <tuple>

namespace poromem::mac {

StokesProblem::StokesProblem(const Grid& g, const std::uint8_t* solid_mask, ZKind bottom,
                             ZKind top, SplitKind split, int split_level)
    : g_(g), mask_(solid_mask), bottom_(bottom), top_(top), split_(split),
      split_level_(split_level) {
    off_v_ = g_.ucount();
    off_w_ = off_v_ + g_.vcount();
    build_dofs();
    build_samples();
    build_diagonal();
}

void StokesProblem::build_dofs() {
    const int nx = g_.nx, ny = g_.ny, nz = g_.nz;
    dofs_.u_dof.assign(g_.ucount(), -1);
    dofs_.v_dof.assign(g_.vcount(), -1);
    dofs_.w_dof.assign(g_.wcount(), -1);
    dofs_.cell_dof.assign(g_.cells(), -1);
    std::int32_t idx = 0;
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                const int im = (i + nx - 1) % nx;
                if (is_fluid(im, j, k) && is_fluid(i, j, k)) {
                    dofs_.u_dof[g_.uidx(i, j, k)] = idx++;
                    dofs_.active.push_back(static_cast<std::int32_t>(g_.uidx(i, j, k)));
                }
            }
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                const int jm = (j + ny - 1) % ny;
                if (is_fluid(i, jm, k) && is_fluid(i, j, k)) {
                    dofs_.v_dof[g_.vidx(i, j, k)] = idx++;
                    dofs_.active.push_back(static_cast<std::int32_t>(off_v_ + g_.vidx(i, j, k)));
                }
            }
    for (int k = 0; k <= nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                bool active = false;
                if (k == 0) {
                    active = bottom_ == ZKind::Open && is_fluid(i, j, 0);
                } else if (k == nz) {
                    active = top_ == ZKind::Open && is_fluid(i, j, nz - 1);
                } else {
                    active = is_fluid(i, j, k - 1) && is_fluid(i, j, k);
                    if (split_ == SplitKind::Wall && k == split_level_) active = false;
                }
                if (active) {
                    dofs_.w_dof[g_.widx(i, j, k)] = idx++;
                    dofs_.active.push_back(static_cast<std::int32_t>(off_w_ + g_.widx(i, j, k)));
                }
            }
    dofs_.n_active = static_cast<std::size_t>(idx);

    std::int32_t pidx = 0;
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i)
                if (is_fluid(i, j, k)) {
                    dofs_.cell_dof[g_.cell(i, j, k)] = pidx++;
                    dofs_.active_cell.push_back(static_cast<std::int32_t>(g_.cell(i, j, k)));
                }
    dofs_.n_pressure = static_cast<std::size_t>(pidx);
}

namespace {
using ClassKey = std::tuple<double, double, double, double, double, double, int, int>;
std::map<ClassKey, int>& class_lookup() {
    thread_local std::map<ClassKey, int> lookup;
    return lookup;
}
} // namespace

int StokesProblem::add_class(const SampleClass& sc) {
    auto& lookup = class_lookup();
    if (classes_.empty()) lookup.clear();
    const ClassKey key{sc.c[0], sc.c[1], sc.c[2], sc.c[3], sc.w2, sc.data_coeff,
                       static_cast<int>(sc.data_plane), static_cast<int>(sc.data_comp)};
    auto it = lookup.find(key);
    if (it != lookup.end()) return it->second;
    classes_.push_back(sc);
    const int id = static_cast<int>(classes_.size()) - 1;
    lookup.emplace(key, id);
    return id;
}

void StokesProblem::add_sample(int cls, std::uint32_t r0, std::uint32_t r1, std::uint32_t r2,
                               std::uint32_t r3) {
    inst_class_.push_back(static_cast<std::uint16_t>(cls));
    inst_refs_.push_back({r0, r1, r2, r3});
}

void StokesProblem::build_samples() {
    const int nx = g_.nx, ny = g_.ny, nz = g_.nz;
    const double V = g_.volume();
    const double ix = 1.0 / g_.hx, iy = 1.0 / g_.hy, iz = 1.0 / g_.hz;
    auto U = [&](int i, int j, int k) { return static_cast<std::uint32_t>(g_.uidx(i, j, k)); };
    auto Vf = [&](int i, int j, int k) {
        return static_cast<std::uint32_t>(off_v_ + g_.vidx(i, j, k));
    };
    auto W = [&](int i, int j, int k) {
        return static_cast<std::uint32_t>(off_w_ + g_.widx(i, j, k));
    };

    // normal strains per fluid cell
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                if (!is_fluid(i, j, k)) continue;
                const int ip = (i + 1) % nx, jp = (j + 1) % ny;
                SampleClass sc;
                sc.w2 = V;
                sc.c = {ix, -ix, 0.0, 0.0};
                add_sample(add_class(sc), U(ip, j, k), U(i, j, k), 0, 0);
                sc.c = {iy, -iy, 0.0, 0.0};
                add_sample(add_class(sc), Vf(i, jp, k), Vf(i, j, k), 0, 0);
                sc.c = {iz, -iz, 0.0, 0.0};
                add_sample(add_class(sc), W(i, j, k + 1), W(i, j, k), 0, 0);
            }

    // s12 at vertical edges
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                const int im = (i + nx - 1) % nx, jm = (j + ny - 1) % ny;
                const bool fa = is_fluid(im, jm, k), fb = is_fluid(i, jm, k);
                const bool fc = is_fluid(im, j, k), fd = is_fluid(i, j, k);
                const int nf = fa + fb + fc + fd;
                if (nf == 0) continue;
                SampleClass sc;
                sc.w2 = 0.5 * V * nf / 4.0;
                double cu_n, cu_s;  // coefficients of u(i,j,k), u(i,jm,k)
                const bool south_solid = !fa && !fb, north_solid = !fc && !fd;
                if (south_solid && !north_solid) {
                    cu_n = 2.0 * iy; cu_s = 0.0;
                } else if (north_solid && !south_solid) {
                    cu_n = 0.0; cu_s = -2.0 * iy;
                } else {
                    cu_n = iy; cu_s = -iy;
                }
                double cv_e, cv_w;
                const bool west_solid = !fa && !fc, east_solid = !fb && !fd;
                if (west_solid && !east_solid) {
                    cv_e = 2.0 * ix; cv_w = 0.0;
                } else if (east_solid && !west_solid) {
                    cv_e = 0.0; cv_w = -2.0 * ix;
                } else {
                    cv_e = ix; cv_w = -ix;
                }
                sc.c = {cu_n, cu_s, cv_e, cv_w};
                add_sample(add_class(sc), U(i, j, k), U(i, jm, k), Vf(i, j, k), Vf(im, j, k));
            }

    // s13 at y-edges (levels k=0..nz), s23 at x-edges; shared z-plane logic
    for (int k = 0; k <= nz; ++k) {
        const bool at_bottom = k == 0, at_top = k == nz;
        if (at_bottom && bottom_ == ZKind::Open) continue;
        if (at_top && top_ == ZKind::Open) continue;
        const bool at_free_split = split_ == SplitKind::Free && k == split_level_;
        if (at_free_split) continue;
        const bool at_wall_split = split_ == SplitKind::Wall && k == split_level_;

        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                const int im = (i + nx - 1) % nx;
                // s13: u-levels k-1 (below) and k (above); w at plane k
                const bool below_a = k > 0 && is_fluid(im, j, k - 1);
                const bool below_b = k > 0 && is_fluid(i, j, k - 1);
                const bool above_a = k < nz && is_fluid(im, j, k);
                const bool above_b = k < nz && is_fluid(i, j, k);

                auto emit_s13 = [&](double cu_up, double cu_dn, double cw_e, double cw_w,
                                    double w2, int plane, double dcoeff) {
                    SampleClass sc;
                    sc.w2 = w2;
                    sc.c = {cu_up, cu_dn, cw_e, cw_w};
                    sc.data_plane = static_cast<std::int8_t>(plane);
                    sc.data_comp = 0;
                    sc.data_coeff = dcoeff;
                    add_sample(add_class(sc), k < nz ? U(i, j, k) : U(i, j, nz - 1),
                               k > 0 ? U(i, j, k - 1) : U(i, j, 0), W(i, j, k), W(im, j, k));
                };

                if (at_bottom) {
                    const int nf = above_a + above_b;
                    if (nf > 0)
                        emit_s13(2.0 * iz, 0.0, ix, -ix, 0.25 * V * nf / 2.0, 0, -2.0 * iz);
                } else if (at_top) {
                    const int nf = below_a + below_b;
                    if (nf > 0)
                        emit_s13(0.0, -2.0 * iz, ix, -ix, 0.25 * V * nf / 2.0, 1, 2.0 * iz);
                } else if (at_wall_split) {
                    const int nfa = above_a + above_b, nfb = below_a + below_b;
                    if (nfa > 0) emit_s13(2.0 * iz, 0.0, ix, -ix, 0.25 * V * nfa / 2.0, -1, 0.0);
                    if (nfb > 0) emit_s13(0.0, -2.0 * iz, ix, -ix, 0.25 * V * nfb / 2.0, -1, 0.0);
                } else {
                    const int nf = below_a + below_b + above_a + above_b;
                    if (nf > 0) {
                        const bool below_solid = !below_a && !below_b;
                        const bool above_solid = !above_a && !above_b;
                        double cu_up, cu_dn;
                        if (below_solid && !above_solid) {
                            cu_up = 2.0 * iz; cu_dn = 0.0;
                        } else if (above_solid && !below_solid) {
                            cu_up = 0.0; cu_dn = -2.0 * iz;
                        } else {
                            cu_up = iz; cu_dn = -iz;
                        }
                        const bool west_solid = !below_a && !above_a;
                        const bool east_solid = !below_b && !above_b;
                        double cw_e, cw_w;
                        if (west_solid && !east_solid) {
                            cw_e = 2.0 * ix; cw_w = 0.0;
                        } else if (east_solid && !west_solid) {
                            cw_e = 0.0; cw_w = -2.0 * ix;
                        } else {
                            cw_e = ix; cw_w = -ix;
                        }
                        emit_s13(cu_up, cu_dn, cw_e, cw_w, 0.5 * V * nf / 4.0, -1, 0.0);
                    }
                }

                // s23 mirrored in y
                const int jm = (j + ny - 1) % ny;
                const bool sb_a = k > 0 && is_fluid(i, jm, k - 1);
                const bool sb_b = k > 0 && is_fluid(i, j, k - 1);
                const bool sa_a = k < nz && is_fluid(i, jm, k);
                const bool sa_b = k < nz && is_fluid(i, j, k);

                auto emit_s23 = [&](double cv_up, double cv_dn, double cw_n, double cw_s,
                                    double w2, int plane, double dcoeff) {
                    SampleClass sc;
                    sc.w2 = w2;
                    sc.c = {cv_up, cv_dn, cw_n, cw_s};
                    sc.data_plane = static_cast<std::int8_t>(plane);
                    sc.data_comp = 1;
                    sc.data_coeff = dcoeff;
                    add_sample(add_class(sc), k < nz ? Vf(i, j, k) : Vf(i, j, nz - 1),
                               k > 0 ? Vf(i, j, k - 1) : Vf(i, j, 0), W(i, j, k), W(i, jm, k));
                };

                if (at_bottom) {
                    const int nf = sa_a + sa_b;
                    if (nf > 0)
                        emit_s23(2.0 * iz, 0.0, iy, -iy, 0.25 * V * nf / 2.0, 0, -2.0 * iz);
                } else if (at_top) {
                    const int nf = sb_a + sb_b;
                    if (nf > 0)
                        emit_s23(0.0, -2.0 * iz, iy, -iy, 0.25 * V * nf / 2.0, 1, 2.0 * iz);
                } else if (at_wall_split) {
                    const int nfa = sa_a + sa_b, nfb = sb_a + sb_b;
                    if (nfa > 0) emit_s23(2.0 * iz, 0.0, iy, -iy, 0.25 * V * nfa / 2.0, -1, 0.0);
                    if (nfb > 0) emit_s23(0.0, -2.0 * iz, iy, -iy, 0.25 * V * nfb / 2.0, -1, 0.0);
                } else {
                    const int nf = sb_a + sb_b + sa_a + sa_b;
                    if (nf > 0) {
                        const bool below_solid = !sb_a && !sb_b;
                        const bool above_solid = !sa_a && !sa_b;
                        double cv_up, cv_dn;
                        if (below_solid && !above_solid) {
                            cv_up = 2.0 * iz; cv_dn = 0.0;
                        } else if (above_solid && !below_solid) {
                            cv_up = 0.0; cv_dn = -2.0 * iz;
                        } else {
                            cv_up = iz; cv_dn = -iz;
                        }
                        const bool south_solid = !sb_a && !sa_a;
                        const bool north_solid = !sb_b && !sa_b;
                        double cw_n, cw_s;
                        if (south_solid && !north_solid) {
                            cw_n = 2.0 * iy; cw_s = 0.0;
                        } else if (north_solid && !south_solid) {
                            cw_n = 0.0; cw_s = -2.0 * iy;
                        } else {
                            cw_n = iy; cw_s = -iy;
                        }
                        emit_s23(cv_up, cv_dn, cw_n, cw_s, 0.5 * V * nf / 4.0, -1, 0.0);
                    }
                }
            }
    }
}

void StokesProblem::build_diagonal() {
    lin::Vector full(full_size(), 0.0);
    for (std::size_t s = 0; s < inst_class_.size(); ++s) {
        const SampleClass& K = classes_[inst_class_[s]];
        const auto& r = inst_refs_[s];
        for (int t = 0; t < 4; ++t) full[r[t]] += K.w2 * K.c[t] * K.c[t];
    }
    diag_.resize(dofs_.n_active);
    for (std::size_t a = 0; a < dofs_.n_active; ++a) diag_[a] = full[dofs_.active[a]];
}

lin::Vector StokesProblem::data_field(const ModeData& md) const {
    lin::Vector full(full_size(), 0.0);
    const int nx = g_.nx, ny = g_.ny, nz = g_.nz;
    if (bottom_ == ZKind::Data) {
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i)
                if (is_fluid(i, j, 0)) full[off_w_ + g_.widx(i, j, 0)] = md.bottom.w;
    }
    if (top_ == ZKind::Data) {
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i)
                if (is_fluid(i, j, nz - 1)) full[off_w_ + g_.widx(i, j, nz)] = md.top.w;
    }
    return full;
}

void StokesProblem::insert_active(const lin::Vector& x, lin::Vector& full) const {
    for (std::size_t a = 0; a < dofs_.n_active; ++a) full[dofs_.active[a]] = x[a];
}

lin::Vector StokesProblem::extract_active(const lin::Vector& full) const {
    lin::Vector x(dofs_.n_active);
    extract_active_into(full, x);
    return x;
}

void StokesProblem::extract_active_into(const lin::Vector& full, lin::Vector& x) const {
    x.resize(dofs_.n_active);
    for (std::size_t a = 0; a < dofs_.n_active; ++a) x[a] = full[dofs_.active[a]];
}

lin::Vector StokesProblem::full_solution(const lin::Vector& x_active, const ModeData& md) const {
    lin::Vector full = data_field(md);
    insert_active(x_active, full);
    return full;
}

void StokesProblem::apply_stress_full(const lin::Vector& X, lin::Vector& F,
                                      const ModeData* md) const {
    const double* x = X.data();
    double* f = F.data();
    const std::size_t m = inst_class_.size();
    for (std::size_t s = 0; s < m; ++s) {
        const SampleClass& K = classes_[inst_class_[s]];
        const auto& r = inst_refs_[s];
        double val = K.c[0] * x[r[0]] + K.c[1] * x[r[1]] + K.c[2] * x[r[2]] + K.c[3] * x[r[3]];
        if (md && K.data_plane >= 0) val += K.data_coeff * plane_value(*md, K.data_plane, K.data_comp);
        const double wv = K.w2 * val;
        f[r[0]] += wv * K.c[0];
        f[r[1]] += wv * K.c[1];
        f[r[2]] += wv * K.c[2];
        f[r[3]] += wv * K.c[3];
    }
}

double StokesProblem::bilinear(const lin::Vector& X1, const ModeData& md1, const lin::Vector& X2,
                               const ModeData& md2) const {
    const double* x1 = X1.data();
    const double* x2 = X2.data();
    double acc = 0.0;
    const std::size_t m = inst_class_.size();
    for (std::size_t s = 0; s < m; ++s) {
        const SampleClass& K = classes_[inst_class_[s]];
        const auto& r = inst_refs_[s];
        double v1 = K.c[0] * x1[r[0]] + K.c[1] * x1[r[1]] + K.c[2] * x1[r[2]] + K.c[3] * x1[r[3]];
        double v2 = K.c[0] * x2[r[0]] + K.c[1] * x2[r[1]] + K.c[2] * x2[r[2]] + K.c[3] * x2[r[3]];
        if (K.data_plane >= 0) {
            v1 += K.data_coeff * plane_value(md1, K.data_plane, K.data_comp);
            v2 += K.data_coeff * plane_value(md2, K.data_plane, K.data_comp);
        }
        // the product is rounded before the weight so the pairing commutes
        // bit-exactly in its arguments
        const double prod = v1 * v2;
        acc += K.w2 * prod;
    }
    return acc;
}

void StokesProblem::divergence_full(const lin::Vector& X, lin::Vector& d) const {
    const int nx = g_.nx, ny = g_.ny;
    const double ax = g_.hy * g_.hz, ay = g_.hx * g_.hz, az = g_.hx * g_.hy;
    d.assign(dofs_.n_pressure, 0.0);
    const double* x = X.data();
    for (std::size_t p = 0; p < dofs_.n_pressure; ++p) {
        const std::size_t c = dofs_.active_cell[p];
        const int i = static_cast<int>(c % nx);
        const int j = static_cast<int>((c / nx) % ny);
        const int k = static_cast<int>(c / (static_cast<std::size_t>(nx) * ny));
        const int ip = (i + 1) % nx, jp = (j + 1) % ny;
        d[p] = ax * (x[g_.uidx(ip, j, k)] - x[g_.uidx(i, j, k)]) +
               ay * (x[off_v_ + g_.vidx(i, jp, k)] - x[off_v_ + g_.vidx(i, j, k)]) +
               az * (x[off_w_ + g_.widx(i, j, k + 1)] - x[off_w_ + g_.widx(i, j, k)]);
    }
}

void StokesProblem::gradient_full(const lin::Vector& p, lin::Vector& F) const {
    const int nx = g_.nx, ny = g_.ny;
    const double ax = g_.hy * g_.hz, ay = g_.hx * g_.hz, az = g_.hx * g_.hy;
    double* f = F.data();
    for (std::size_t q = 0; q < dofs_.n_pressure; ++q) {
        const std::size_t c = dofs_.active_cell[q];
        const int i = static_cast<int>(c % nx);
        const int j = static_cast<int>((c / nx) % ny);
        const int k = static_cast<int>(c / (static_cast<std::size_t>(nx) * ny));
        const int ip = (i + 1) % nx, jp = (j + 1) % ny;
        const double pc = p[q];
        // mirror of divergence_full: scatter +-area * p into the touched faces
        f[g_.uidx(ip, j, k)] += ax * pc;
        f[g_.uidx(i, j, k)] -= ax * pc;
        f[off_v_ + g_.vidx(i, jp, k)] += ay * pc;
        f[off_v_ + g_.vidx(i, j, k)] -= ay * pc;
        f[off_w_ + g_.widx(i, j, k + 1)] += az * pc;
        f[off_w_ + g_.widx(i, j, k)] -= az * pc;
    }
}

double StokesProblem::divergence_max(const lin::Vector& X) const {
    lin::Vector d;
    divergence_full(X, d);
    double m = 0.0;
    for (double v : d) m = std::max(m, std::fabs(v));
    return m / g_.volume();
}

} // namespace poromem::mac
