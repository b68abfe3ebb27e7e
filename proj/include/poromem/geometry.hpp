#ifndef POROMEM_GEOMETRY_HPP
#define POROMEM_GEOMETRY_HPP

// Voxelized reference cell Z = Y x (-1,1), Y = (0,1)^2: phase labels,
// periodic lateral topology, interface-face extraction and measures.

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace poromem::geom {

enum class Phase : std::uint8_t { Fluid = 0, Solid = 1 };

struct Primitive {
    enum class Kind { Box, Sphere, Cylinder };
    Kind kind = Kind::Box;
    // Box: [min,max] in cell coordinates (lateral coordinates may wrap).
    std::array<double, 3> min{0, 0, 0};
    std::array<double, 3> max{0, 0, 0};
    // Sphere / cylinder:
    std::array<double, 3> center{0, 0, 0};
    double radius = 0.0;
    int axis = 2;        // cylinder axis: 0=x, 1=y, 2=z
    double lo = 0.0;     // cylinder extent along the axis
    double hi = 0.0;

    // Closed membership test; ties resolve to solid.
    bool contains(double x, double y, double z) const;
    // Extent along z (axis 2) before any wrapping; used for validation.
    std::array<double, 2> z_extent() const;
    std::string describe() const;
};

struct MicrostructureSpec {
    int resolution = 8;                 // lateral voxels per unit length; grid is N x N x 2N
    std::vector<Primitive> solids;
    bool clearance_check = false;       // require |S_s^+| = |S_s^-| = 0
};

class GeometryError : public std::runtime_error {
public:
    explicit GeometryError(const std::string& what) : std::runtime_error(what) {}
};

struct CellMeasures {
    double zf = 0.0;        // |Z_f|
    double zs = 0.0;        // |Z_s|
    double gamma = 0.0;     // |Gamma|
    double sf_plus = 0.0;   // |S_f^+|
    double sf_minus = 0.0;
    double ss_plus = 0.0;   // |S_s^+|
    double ss_minus = 0.0;
};

// A fluid/solid interface face, stored from the solid side. axis/side give
// the face normal: the fluid neighbour sits at solid cell + side*e_axis.
struct GammaFace {
    std::int32_t i, j, k;   // solid voxel
    std::int8_t axis;       // 0,1,2
    std::int8_t side;       // +1 or -1
};

struct ReferenceCell {
    int n = 0;                       // lateral resolution; nz = 2n
    std::vector<std::uint8_t> phase; // n*n*2n, row-major (i fastest)
    CellMeasures measures;
    std::vector<GammaFace> gamma_faces;
    std::int64_t fluid_count = 0;
    std::int64_t solid_count = 0;

    int nz() const { return 2 * n; }
    std::size_t cell_index(int i, int j, int k) const {
        return (static_cast<std::size_t>(k) * n + j) * n + i;
    }
    bool solid(int i, int j, int k) const { return phase[cell_index(i, j, k)] != 0; }
    bool fluid(int i, int j, int k) const { return phase[cell_index(i, j, k)] == 0; }
    double h() const { return 1.0 / n; }
    // voxel center in cell coordinates
    std::array<double, 3> center(int i, int j, int k) const {
        const double hh = h();
        return {(i + 0.5) * hh, (j + 0.5) * hh, -1.0 + (k + 0.5) * hh};
    }
};

struct ValidationReport {
    bool valid = false;
    bool fluid_connected = false;
    int fluid_components = 0;
    bool solid_connected = false;   // true when no solid phase
    int solid_components = 0;
    bool clearance = false;         // |S_s^+| = |S_s^-| = 0
    long corner_contacts = 0;       // solid pairs touching only along voxel edges
    CellMeasures measures;
    std::vector<std::string> warnings;
};

ReferenceCell build_cell(const MicrostructureSpec& spec);
ValidationReport validate_cell(const ReferenceCell& cell, bool require_clearance);
CellMeasures cell_measures(const ReferenceCell& cell);

} // namespace poromem::geom

#endif
