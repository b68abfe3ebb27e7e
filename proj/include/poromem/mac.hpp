#ifndef POROMEM_MAC_HPP
#define POROMEM_MAC_HPP

// MAC staggered-grid machinery for Stokes-type problems on a voxel domain.
//
// The viscous operator is derived from the discrete strain energy
//     a(u,u) = sum_cells (e11^2+e22^2+e33^2) V + sum_edges (s12^2+s13^2+s23^2) V_e/2
// with s_ab = da u_b + db u_a sampled at edges, so the operator is the exact
// gradient of the energy (symmetric positive semidefinite by construction)
// and tensor assembly can reuse the identical bilinear form. No-slip on
// voxel walls and Dirichlet data on the z-planes enter through one-sided
// wall samples; lateral directions wrap periodically.
//
// Sample lists are flattened into (class, index-tuple) tables at setup so a
// matrix-vector product is a single streaming pass.

#include "poromem/linalg.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace poromem::mac {

struct Grid {
    int nx = 0, ny = 0, nz = 0;
    double hx = 0, hy = 0, hz = 0;

    std::size_t cells() const { return static_cast<std::size_t>(nx) * ny * nz; }
    std::size_t ucount() const { return cells(); }
    std::size_t vcount() const { return cells(); }
    std::size_t wcount() const { return static_cast<std::size_t>(nx) * ny * (nz + 1); }
    std::size_t cell(int i, int j, int k) const {
        return (static_cast<std::size_t>(k) * ny + j) * nx + i;
    }
    std::size_t uidx(int i, int j, int k) const { return cell(i, j, k); }
    std::size_t vidx(int i, int j, int k) const { return cell(i, j, k); }
    std::size_t widx(int i, int j, int k) const {
        return (static_cast<std::size_t>(k) * ny + j) * nx + i;
    }
    double volume() const { return hx * hy * hz; }
};

// z-plane boundary: Dirichlet velocity data or natural (stress-free, open).
enum class ZKind { Data, Open };

// Interior split plane for two stacked bulk boxes: Free decouples the
// tangential stress across the plane (the interface law supplies the
// coupling; the normal face stays one shared unknown), Wall is a no-slip
// plate (normal face pinned to zero, one-sided tangential samples).
enum class SplitKind { None, Free, Wall };

struct PlaneData {
    double u = 0.0, v = 0.0, w = 0.0;
};

// Dirichlet data for the two z-planes of one boundary mode.
struct ModeData {
    PlaneData bottom, top;
};

struct DofMaps {
    std::vector<std::int32_t> u_dof, v_dof, w_dof;  // full index -> active (-1)
    std::vector<std::int32_t> active;               // active -> full (concatenated layout)
    std::vector<std::int32_t> cell_dof;             // cell -> pressure dof (-1 in solid)
    std::vector<std::int32_t> active_cell;          // pressure dof -> cell
    std::size_t n_active = 0;
    std::size_t n_pressure = 0;
};

class StokesProblem {
public:
    StokesProblem(const Grid& g, const std::uint8_t* solid_mask, ZKind bottom, ZKind top,
                  SplitKind split = SplitKind::None, int split_level = -1);

    const Grid& grid() const { return g_; }
    const DofMaps& dofs() const { return dofs_; }
    std::size_t full_size() const { return off_w_ + g_.wcount(); }
    std::size_t offset_u() const { return 0; }
    std::size_t offset_v() const { return off_v_; }
    std::size_t offset_w() const { return off_w_; }
    bool is_fluid(int i, int j, int k) const {
        return !mask_ || mask_[g_.cell(i, j, k)] == 0;
    }

    // Full-size field carrying only the Dirichlet plane data of one mode.
    lin::Vector data_field(const ModeData& md) const;
    // Insert active coefficients into a full-size field (other slots untouched).
    void insert_active(const lin::Vector& x, lin::Vector& full) const;
    lin::Vector extract_active(const lin::Vector& full) const;
    void extract_active_into(const lin::Vector& full, lin::Vector& x) const;
    // Full solution field: data field plus active values.
    lin::Vector full_solution(const lin::Vector& x_active, const ModeData& md) const;

    // F += dE where E = 1/2 a(X,X); `md` supplies wall data constants
    // (nullptr treats them as zero, which is the linear operator part).
    void apply_stress_full(const lin::Vector& X, lin::Vector& F, const ModeData* md) const;
    // a(X1,X2) over full fields with their wall data.
    double bilinear(const lin::Vector& X1, const ModeData& md1, const lin::Vector& X2,
                    const ModeData& md2) const;

    // Jacobi diagonal of the viscous block, active ordering.
    const lin::Vector& stress_diagonal() const { return diag_; }

    // Net outflux of each pressure cell, full-field input.
    void divergence_full(const lin::Vector& X, lin::Vector& d) const;
    // F += B^T p on the full layout.
    void gradient_full(const lin::Vector& p, lin::Vector& F) const;

    double cell_volume() const { return g_.volume(); }
    // max |div|/V over pressure cells for a full field
    double divergence_max(const lin::Vector& X) const;

private:
    struct SampleClass {
        std::array<double, 4> c{};
        double w2 = 0.0;
        double data_coeff = 0.0;
        std::int8_t data_plane = -1;  // 0 bottom, 1 top
        std::uint8_t data_comp = 0;   // 0 u, 1 v
    };

    int add_class(const SampleClass& sc);
    void add_sample(int cls, std::uint32_t r0, std::uint32_t r1, std::uint32_t r2, std::uint32_t r3);
    void build_dofs();
    void build_samples();
    void build_diagonal();
    double plane_value(const ModeData& md, int plane, int comp) const {
        const PlaneData& p = plane == 0 ? md.bottom : md.top;
        return comp == 0 ? p.u : p.v;
    }

    Grid g_;
    const std::uint8_t* mask_;
    ZKind bottom_, top_;
    SplitKind split_;
    int split_level_;
    std::size_t off_v_ = 0, off_w_ = 0;
    DofMaps dofs_;
    std::vector<SampleClass> classes_;
    std::vector<std::uint16_t> inst_class_;
    std::vector<std::array<std::uint32_t, 4>> inst_refs_;
    lin::Vector diag_;
};

} // namespace poromem::mac

#endif
