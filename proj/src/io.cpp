#include "poromem/io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace poromem::io {

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

void require_stream(const std::ofstream& out, const std::string& path) {
    if (!out) throw std::runtime_error("cannot open output file: " + path);
}

std::string mat3_json(const cellflow::Mat3& m) {
    std::string s = "[";
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            s += format_g17(m[i][j]);
            if (i != 2 || j != 2) s += ", ";
        }
    s += "]";
    return s;
}

cellflow::Mat3 mat3_from(const nlohmann::json& a) {
    cellflow::Mat3 m{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m[i][j] = a.at(i * 3 + j).get<double>();
    return m;
}

} // namespace

void write_vtk_structured_points(const std::string& path, const std::array<int, 3>& cells,
                                 const std::array<double, 3>& origin,
                                 const std::array<double, 3>& spacing,
                                 const std::vector<VtkCellField>& fields) {
    std::ofstream out(path);
    require_stream(out, path);
    out << "# vtk DataFile Version 3.0\n";
    out << "poromem field\n";
    out << "ASCII\n";
    out << "DATASET STRUCTURED_POINTS\n";
    out << "DIMENSIONS " << cells[0] + 1 << " " << cells[1] + 1 << " " << cells[2] + 1 << "\n";
    out << "ORIGIN " << format_g17(origin[0]) << " " << format_g17(origin[1]) << " "
        << format_g17(origin[2]) << "\n";
    out << "SPACING " << format_g17(spacing[0]) << " " << format_g17(spacing[1]) << " "
        << format_g17(spacing[2]) << "\n";
    const long ncell = static_cast<long>(cells[0]) * cells[1] * cells[2];
    out << "CELL_DATA " << ncell << "\n";
    for (const auto& f : fields) {
        if (f.scalar) {
            out << "SCALARS " << f.name << " double 1\n";
            out << "LOOKUP_TABLE default\n";
            for (double v : *f.scalar) out << format_g17(v) << "\n";
        } else if (f.vector) {
            out << "VECTORS " << f.name << " double\n";
            const auto& vec = *f.vector;
            for (std::size_t c = 0; c < vec[0].size(); ++c)
                out << format_g17(vec[0][c]) << " " << format_g17(vec[1][c]) << " "
                    << format_g17(vec[2][c]) << "\n";
        }
    }
}

void write_phase_vtk(const std::string& path, const geom::ReferenceCell& cell) {
    lin::Vector phase(cell.phase.size());
    for (std::size_t c = 0; c < cell.phase.size(); ++c) phase[c] = cell.phase[c];
    VtkCellField f;
    f.name = "phase";
    f.scalar = &phase;
    const double h = cell.h();
    write_vtk_structured_points(path, {cell.n, cell.n, cell.nz()}, {0.0, 0.0, -1.0}, {h, h, h},
                                {f});
}

void write_flow_tensors(const std::string& path, const cellflow::EffectiveFlowTensors& t,
                        const TensorFileMeta& meta) {
    std::ofstream out(path);
    require_stream(out, path);
    out << "{\n";
    out << "  \"K_plus\": " << mat3_json(t.K_plus) << ",\n";
    out << "  \"K_minus\": " << mat3_json(t.K_minus) << ",\n";
    out << "  \"M\": " << mat3_json(t.M) << ",\n";
    out << "  \"A_plus\": " << mat3_json(t.A_plus) << ",\n";
    out << "  \"A_minus\": " << mat3_json(t.A_minus) << ",\n";
    out << "  \"Q_plus\": " << mat3_json(t.Q_plus) << ",\n";
    out << "  \"Q_minus\": " << mat3_json(t.Q_minus) << ",\n";
    out << "  \"zf_measure\": " << format_g17(t.zf_measure) << ",\n";
    out << "  \"gamma_measure\": " << format_g17(t.gamma_measure) << ",\n";
    out << "  \"resolution\": " << t.resolution << ",\n";
    out << "  \"m_asymmetry\": " << format_g17(t.m_asymmetry) << ",\n";
    // tangential strain pairings; cross couplings between the normal mode
    // and the opposite-side tangential modes never enter the model and are
    // intentionally absent
    out << "  \"G\": {\n";
    const char* ab[2] = {"plus", "minus"};
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            out << "    \"" << ab[a] << "_" << ab[b] << "\": [";
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) {
                    out << format_g17(t.g_tangential[a][b][i][j]);
                    if (i != 1 || j != 1) out << ", ";
                }
            out << "],\n";
        }
    for (int a = 0; a < 2; ++a) {
        out << "    \"" << ab[a] << "_normal\": [" << format_g17(t.g_normal_coupling[a][0]) << ", "
            << format_g17(t.g_normal_coupling[a][1]) << "],\n";
    }
    out << "    \"normal_normal\": " << format_g17(t.g_normal_normal) << "\n";
    out << "  },\n";
    out << "  \"provenance\": {\n";
    out << "    \"tolerance\": " << format_g17(meta.tolerance) << ",\n";
    out << "    \"coercivity_margin\": " << format_g17(meta.coercivity_margin) << ",\n";
    out << "    \"config_hash\": \"" << meta.config_hash << "\",\n";
    out << "    \"modes\": [";
    for (std::size_t m = 0; m < meta.mode_names.size(); ++m) {
        out << "\"" << meta.mode_names[m] << "\"";
        if (m + 1 < meta.mode_names.size()) out << ", ";
    }
    out << "],\n";
    out << "    \"momentum_residuals\": [";
    for (std::size_t m = 0; m < meta.momentum_residuals.size(); ++m) {
        out << format_g17(meta.momentum_residuals[m]);
        if (m + 1 < meta.momentum_residuals.size()) out << ", ";
    }
    out << "],\n";
    out << "    \"divergence_residuals\": [";
    for (std::size_t m = 0; m < meta.divergence_residuals.size(); ++m) {
        out << format_g17(meta.divergence_residuals[m]);
        if (m + 1 < meta.divergence_residuals.size()) out << ", ";
    }
    out << "]\n";
    out << "  }\n";
    out << "}\n";
}

cellflow::EffectiveFlowTensors read_flow_tensors(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open tensor file: " + path);
    nlohmann::json j = nlohmann::json::parse(in);
    cellflow::EffectiveFlowTensors t;
    t.K_plus = mat3_from(j.at("K_plus"));
    t.K_minus = mat3_from(j.at("K_minus"));
    t.M = mat3_from(j.at("M"));
    t.A_plus = mat3_from(j.at("A_plus"));
    t.A_minus = mat3_from(j.at("A_minus"));
    t.Q_plus = mat3_from(j.at("Q_plus"));
    t.Q_minus = mat3_from(j.at("Q_minus"));
    t.zf_measure = j.at("zf_measure").get<double>();
    t.gamma_measure = j.value("gamma_measure", 0.0);
    t.resolution = j.value("resolution", 0);
    t.m_asymmetry = j.value("m_asymmetry", 0.0);
    if (j.contains("G")) {
        const auto& G = j["G"];
        const char* ab[2] = {"plus", "minus"};
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) {
                const auto& arr = G.at(std::string(ab[a]) + "_" + ab[b]);
                for (int i = 0; i < 2; ++i)
                    for (int j2 = 0; j2 < 2; ++j2)
                        t.g_tangential[a][b][i][j2] = arr.at(i * 2 + j2).get<double>();
            }
        for (int a = 0; a < 2; ++a) {
            const auto& arr = G.at(std::string(ab[a]) + "_normal");
            t.g_normal_coupling[a][0] = arr.at(0).get<double>();
            t.g_normal_coupling[a][1] = arr.at(1).get<double>();
        }
        t.g_normal_normal = G.at("normal_normal").get<double>();
    }
    return t;
}

void write_diffusion_tensor(const std::string& path, const celldiff::EffectiveDiffusionTensor& t,
                            int resolution, double tolerance, const std::string& config_hash) {
    std::ofstream out(path);
    require_stream(out, path);
    out << "{\n";
    out << "  \"D_star\": [" << format_g17(t.d_star[0][0]) << ", " << format_g17(t.d_star[0][1])
        << ", " << format_g17(t.d_star[1][0]) << ", " << format_g17(t.d_star[1][1]) << "],\n";
    out << "  \"zs_measure\": " << format_g17(t.zs_measure) << ",\n";
    out << "  \"gamma_measure\": " << format_g17(t.gamma_measure) << ",\n";
    out << "  \"d_s\": " << format_g17(t.d_s) << ",\n";
    out << "  \"resolution\": " << resolution << ",\n";
    out << "  \"tolerance\": " << format_g17(tolerance) << ",\n";
    out << "  \"config_hash\": \"" << config_hash << "\"\n";
    out << "}\n";
}

celldiff::EffectiveDiffusionTensor read_diffusion_tensor(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open tensor file: " + path);
    nlohmann::json j = nlohmann::json::parse(in);
    celldiff::EffectiveDiffusionTensor t;
    const auto& arr = j.at("D_star");
    t.d_star[0][0] = arr.at(0).get<double>();
    t.d_star[0][1] = arr.at(1).get<double>();
    t.d_star[1][0] = arr.at(2).get<double>();
    t.d_star[1][1] = arr.at(3).get<double>();
    t.zs_measure = j.at("zs_measure").get<double>();
    t.gamma_measure = j.value("gamma_measure", 0.0);
    t.d_s = j.value("d_s", 1.0);
    return t;
}

} // namespace poromem::io
