#include "poromem/geometry.hpp"

#include <cmath>
#include <queue>

namespace poromem::geom {

namespace {

double wrap_unit(double x) {
    double r = std::fmod(x, 1.0);
    if (r < 0.0) r += 1.0;
    return r;
}

// Lateral distance on the unit torus.
double torus_delta(double a, double b) {
    double d = std::fabs(wrap_unit(a) - wrap_unit(b));
    return std::min(d, 1.0 - d);
}

} // namespace

bool Primitive::contains(double x, double y, double z) const {
    switch (kind) {
        case Kind::Box: {
            // Lateral coordinates compare on the torus: shift the sample into
            // the box frame. The box may extend past [0,1) laterally.
            for (int d = 0; d < 2; ++d) {
                const double c = d == 0 ? x : y;
                const double lo_d = d == 0 ? min[0] : min[1];
                const double hi_d = d == 0 ? max[0] : max[1];
                if (hi_d - lo_d >= 1.0) continue;  // spans the torus
                double s = wrap_unit(c - lo_d);
                if (s > hi_d - lo_d) return false;
            }
            return z >= min[2] && z <= max[2];
        }
        case Kind::Sphere: {
            const double dx = torus_delta(x, center[0]);
            const double dy = torus_delta(y, center[1]);
            const double dz = z - center[2];
            return dx * dx + dy * dy + dz * dz <= radius * radius;
        }
        case Kind::Cylinder: {
            double along, da, db;
            if (axis == 2) {
                along = z;
                da = torus_delta(x, center[0]);
                db = torus_delta(y, center[1]);
            } else if (axis == 0) {
                along = x;  // lateral axis: compare on torus
                da = torus_delta(y, center[1]);
                db = z - center[2];
                const double len = hi - lo;
                double s = wrap_unit(along - lo);
                return (len >= 1.0 || s <= len) && da * da + db * db <= radius * radius;
            } else {
                along = y;
                da = torus_delta(x, center[0]);
                db = z - center[2];
                const double len = hi - lo;
                double s = wrap_unit(along - lo);
                return (len >= 1.0 || s <= len) && da * da + db * db <= radius * radius;
            }
            return along >= lo && along <= hi && da * da + db * db <= radius * radius;
        }
    }
    return false;
}

std::array<double, 2> Primitive::z_extent() const {
    switch (kind) {
        case Kind::Box: return {min[2], max[2]};
        case Kind::Sphere: return {center[2] - radius, center[2] + radius};
        case Kind::Cylinder:
            if (axis == 2) return {lo, hi};
            return {center[2] - radius, center[2] + radius};
    }
    return {0.0, 0.0};
}

std::string Primitive::describe() const {
    switch (kind) {
        case Kind::Box: return "box";
        case Kind::Sphere: return "sphere";
        case Kind::Cylinder: return "cylinder";
    }
    return "?";
}

ReferenceCell build_cell(const MicrostructureSpec& spec) {
    if (spec.resolution < 4) {
        throw GeometryError("build_cell: resolution must be >= 4, got " +
                            std::to_string(spec.resolution));
    }
    for (std::size_t p = 0; p < spec.solids.size(); ++p) {
        const auto ze = spec.solids[p].z_extent();
        if (ze[0] < -1.0 || ze[1] > 1.0) {
            throw GeometryError("build_cell: primitive #" + std::to_string(p) + " (" +
                                spec.solids[p].describe() + ") extends outside z in (-1,1): [" +
                                std::to_string(ze[0]) + ", " + std::to_string(ze[1]) + "]");
        }
    }

    ReferenceCell cell;
    const int n = spec.resolution;
    cell.n = n;
    const int nz = 2 * n;
    cell.phase.assign(static_cast<std::size_t>(n) * n * nz, 0);

    for (int k = 0; k < nz; ++k) {
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i) {
                const auto c = cell.center(i, j, k);
                for (const auto& prim : spec.solids) {
                    if (prim.contains(c[0], c[1], c[2])) {
                        cell.phase[cell.cell_index(i, j, k)] = 1;
                        break;
                    }
                }
            }
        }
    }

    // Interface faces: fluid/solid adjacencies, lateral wrap included.
    for (int k = 0; k < nz; ++k) {
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i) {
                if (!cell.solid(i, j, k)) continue;
                const int ip = (i + 1) % n, im = (i + n - 1) % n;
                const int jp = (j + 1) % n, jm = (j + n - 1) % n;
                if (cell.fluid(ip, j, k)) cell.gamma_faces.push_back({i, j, k, 0, +1});
                if (cell.fluid(im, j, k)) cell.gamma_faces.push_back({i, j, k, 0, -1});
                if (cell.fluid(i, jp, k)) cell.gamma_faces.push_back({i, j, k, 1, +1});
                if (cell.fluid(i, jm, k)) cell.gamma_faces.push_back({i, j, k, 1, -1});
                if (k + 1 < nz && cell.fluid(i, j, k + 1)) cell.gamma_faces.push_back({i, j, k, 2, +1});
                if (k > 0 && cell.fluid(i, j, k - 1)) cell.gamma_faces.push_back({i, j, k, 2, -1});
            }
        }
    }

    std::int64_t solid_cells = 0;
    std::int64_t ss_plus = 0, ss_minus = 0;
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            if (cell.solid(i, j, 0)) ++ss_minus;
            if (cell.solid(i, j, nz - 1)) ++ss_plus;
        }
    }
    for (auto v : cell.phase) solid_cells += v;
    cell.solid_count = solid_cells;
    cell.fluid_count = static_cast<std::int64_t>(cell.phase.size()) - solid_cells;

    const double vc = 1.0 / (static_cast<double>(n) * n * n);
    const double af = 1.0 / (static_cast<double>(n) * n);
    cell.measures.zs = solid_cells * vc;
    cell.measures.zf = cell.fluid_count * vc;
    cell.measures.gamma = static_cast<double>(cell.gamma_faces.size()) * af;
    cell.measures.ss_plus = ss_plus * af;
    cell.measures.ss_minus = ss_minus * af;
    cell.measures.sf_plus = (static_cast<std::int64_t>(n) * n - ss_plus) * af;
    cell.measures.sf_minus = (static_cast<std::int64_t>(n) * n - ss_minus) * af;
    return cell;
}

CellMeasures cell_measures(const ReferenceCell& cell) { return cell.measures; }

namespace {

// Count connected components of one phase under 6-neighbour adjacency with
// lateral periodic wrap.
int count_components(const ReferenceCell& cell, bool want_solid) {
    const int n = cell.n, nz = cell.nz();
    std::vector<std::uint8_t> seen(cell.phase.size(), 0);
    int components = 0;
    std::vector<std::size_t> stack;
    for (std::size_t start = 0; start < cell.phase.size(); ++start) {
        if (seen[start] || (cell.phase[start] != 0) != want_solid) continue;
        ++components;
        seen[start] = 1;
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
                if (seen[cc] || (cell.phase[cc] != 0) != want_solid) continue;
                seen[cc] = 1;
                stack.push_back(cc);
            }
        }
    }
    return components;
}

// Solid voxels meeting only along an edge (both shared face-neighbours are
// fluid). These pinch the interface; reported, not rejected.
long count_corner_contacts(const ReferenceCell& cell) {
    const int n = cell.n, nz = cell.nz();
    long contacts = 0;
    auto solid_at = [&](int i, int j, int k) {
        if (k < 0 || k >= nz) return false;
        return cell.solid((i + n) % n, (j + n) % n, k);
    };
    for (int k = 0; k < nz; ++k) {
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i) {
                if (!cell.solid(i, j, k)) continue;
                // diagonal partners in the three coordinate planes, forward only
                const int di[4] = {1, 1, 1, 1};
                // xy-plane diagonals
                for (int s : {+1, -1}) {
                    if (solid_at(i + 1, j + s, k) && !solid_at(i + 1, j, k) && !solid_at(i, j + s, k)) ++contacts;
                }
                // xz-plane
                for (int s : {+1, -1}) {
                    if (solid_at(i + 1, j, k + s) && !solid_at(i + 1, j, k) && !solid_at(i, j, k + s)) ++contacts;
                }
                // yz-plane
                for (int s : {+1, -1}) {
                    if (solid_at(i, j + 1, k + s) && !solid_at(i, j + 1, k) && !solid_at(i, j, k + s)) ++contacts;
                }
                (void)di;
            }
        }
    }
    return contacts;
}

} // namespace

ValidationReport validate_cell(const ReferenceCell& cell, bool require_clearance) {
    ValidationReport rep;
    rep.measures = cell.measures;
    rep.fluid_components = count_components(cell, false);
    rep.fluid_connected = rep.fluid_components == 1;
    rep.solid_components = count_components(cell, true);
    rep.solid_connected = rep.solid_components <= 1;
    rep.clearance = cell.measures.ss_plus == 0.0 && cell.measures.ss_minus == 0.0;
    rep.corner_contacts = count_corner_contacts(cell);

    if (!rep.fluid_connected) {
        rep.warnings.push_back("fluid phase is disconnected (" +
                               std::to_string(rep.fluid_components) + " components)");
    }
    if (!rep.solid_connected) {
        rep.warnings.push_back("solid phase is disconnected (" +
                               std::to_string(rep.solid_components) + " components)");
    }
    if (rep.corner_contacts > 0) {
        rep.warnings.push_back("solid voxels touch along edges only at " +
                               std::to_string(rep.corner_contacts) + " locations");
    }
    if (!rep.clearance) {
        rep.warnings.push_back("solid touches S^+/S^- (|S_s^+|=" +
                               std::to_string(cell.measures.ss_plus) + ", |S_s^-|=" +
                               std::to_string(cell.measures.ss_minus) + ")");
    }
    rep.valid = rep.fluid_connected && (!require_clearance || rep.clearance);
    return rep;
}

} // namespace poromem::geom
