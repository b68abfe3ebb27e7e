#include "poromem/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace poromem::cfg {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& origin, const std::string& what) {
    throw ConfigError(origin + ": " + what);
}

// byte offset -> "line L, column C" for parse diagnostics
std::string locate(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t p = 0; p < byte && p < text.size(); ++p) {
        if (text[p] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

double get_number(const json& j, const char* key, const std::string& origin, double fallback,
                  bool required = false) {
    if (!j.contains(key)) {
        if (required) fail(origin, std::string("missing required number '") + key + "'");
        return fallback;
    }
    if (!j[key].is_number()) fail(origin, std::string("'") + key + "' must be a number");
    return j[key].get<double>();
}

std::array<double, 3> get_vec3(const json& j, const char* key, const std::string& origin,
                               std::array<double, 3> fallback) {
    if (!j.contains(key)) return fallback;
    const auto& a = j[key];
    if (!a.is_array() || a.size() != 3) fail(origin, std::string("'") + key + "' must be [x,y,z]");
    return {a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
}

geom::Primitive parse_primitive(const json& j, std::size_t index, const std::string& origin) {
    geom::Primitive p;
    const std::string where = origin + " (solids[" + std::to_string(index) + "])";
    const std::string type = j.value("type", "");
    if (type == "box") {
        p.kind = geom::Primitive::Kind::Box;
        p.min = get_vec3(j, "min", where, {0, 0, 0});
        p.max = get_vec3(j, "max", where, {0, 0, 0});
        for (int d = 0; d < 3; ++d)
            if (p.min[d] > p.max[d]) fail(where, "box min exceeds max");
    } else if (type == "sphere") {
        p.kind = geom::Primitive::Kind::Sphere;
        p.center = get_vec3(j, "center", where, {0.5, 0.5, 0});
        p.radius = get_number(j, "radius", where, 0.0, true);
        if (p.radius <= 0.0) fail(where, "sphere radius must be positive");
    } else if (type == "cylinder") {
        p.kind = geom::Primitive::Kind::Cylinder;
        p.center = get_vec3(j, "center", where, {0.5, 0.5, 0});
        p.radius = get_number(j, "radius", where, 0.0, true);
        if (p.radius <= 0.0) fail(where, "cylinder radius must be positive");
        const std::string axis = j.value("axis", "z");
        p.axis = axis == "x" ? 0 : axis == "y" ? 1 : 2;
        if (axis != "x" && axis != "y" && axis != "z") fail(where, "axis must be x, y or z");
        p.lo = get_number(j, "from", where, 0.0, true);
        p.hi = get_number(j, "to", where, 0.0, true);
        if (p.lo > p.hi) fail(where, "cylinder 'from' exceeds 'to'");
    } else {
        fail(where, "unknown primitive type '" + type + "' (box, sphere or cylinder)");
    }
    return p;
}

kin::KineticsSpec parse_kinetics(const json& j, const std::string& origin) {
    kin::KineticsSpec spec;
    const std::string variant = j.value("variant", "zero");
    if (variant == "zero") {
        spec.variant = kin::Variant::Zero;
    } else if (variant == "linear") {
        spec.variant = kin::Variant::Linear;
        spec.k = get_number(j, "k", origin, 0.0, true);
        if (spec.k < 0.0) fail(origin, "kinetics rate k must be >= 0");
    } else if (variant == "saturating") {
        spec.variant = kin::Variant::Saturating;
        spec.k1 = get_number(j, "k1", origin, 0.0, true);
        spec.k2 = get_number(j, "k2", origin, 0.0, true);
        if (spec.k1 < 0.0 || spec.k2 < 0.0) fail(origin, "kinetics rates must be >= 0");
    } else {
        fail(origin, "unknown kinetics variant '" + variant + "' (zero, linear or saturating)");
    }
    return spec;
}

} // namespace

std::string fnv1a_hex(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

RunConfig parse_config(const std::string& text, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(origin, "malformed JSON at " + locate(text, e.byte > 0 ? e.byte - 1 : 0) + ": " +
                         e.what());
    }
    if (!doc.is_object()) fail(origin, "top level must be a JSON object");

    RunConfig cfg;
    cfg.hash = fnv1a_hex(doc.dump());

    if (!doc.contains("geometry") || !doc["geometry"].is_object())
        fail(origin, "missing 'geometry' object");
    const auto& geo = doc["geometry"];
    cfg.geometry.resolution =
        static_cast<int>(get_number(geo, "resolution", origin + " (geometry)", 8));
    if (cfg.geometry.resolution < 4) fail(origin, "geometry.resolution must be >= 4");
    cfg.geometry.clearance_check = geo.value("clearance_check", false);
    if (geo.contains("solids")) {
        if (!geo["solids"].is_array()) fail(origin, "geometry.solids must be an array");
        for (std::size_t s = 0; s < geo["solids"].size(); ++s)
            cfg.geometry.solids.push_back(parse_primitive(geo["solids"][s], s, origin));
    }

    if (doc.contains("physics")) {
        const auto& ph = doc["physics"];
        const std::string where = origin + " (physics)";
        cfg.d_f = get_number(ph, "D_f", where, 1.0);
        cfg.d_s = get_number(ph, "D_s", where, 1.0);
        if (cfg.d_f <= 0.0 || cfg.d_s <= 0.0) fail(where, "diffusivities must be positive");
        const std::string regime = ph.value("gamma_regime", "intermediate");
        if (regime == "minus_one") cfg.regime = transport::GammaRegime::MinusOne;
        else if (regime == "intermediate") cfg.regime = transport::GammaRegime::Intermediate;
        else if (regime == "one") cfg.regime = transport::GammaRegime::One;
        else fail(where, "gamma_regime must be minus_one, intermediate or one");
        if (ph.contains("kinetics")) cfg.kinetics = parse_kinetics(ph["kinetics"], where);
        if (ph.contains("forcing")) {
            const auto& fo = ph["forcing"];
            cfg.forcing.plus = get_vec3(fo, "plus", where, {0, 0, 0});
            cfg.forcing.minus = get_vec3(fo, "minus", where, {0, 0, 0});
            cfg.forcing.ramp = get_number(fo, "ramp", where, 0.0);
        }
        const std::string mode = ph.value("flow_mode", "off");
        if (mode == "coupled") cfg.flow_mode = FlowMode::Coupled;
        else if (mode == "impermeable") cfg.flow_mode = FlowMode::Impermeable;
        else if (mode == "off") cfg.flow_mode = FlowMode::Off;
        else fail(where, "flow_mode must be coupled, impermeable or off");
        cfg.prescribed_velocity = get_vec3(ph, "velocity", where, {0, 0, 0});
    }

    if (doc.contains("numerics")) {
        const auto& nu = doc["numerics"];
        const std::string where = origin + " (numerics)";
        cfg.cell_tol = get_number(nu, "cell_tol", where, 1e-10);
        cfg.macro_tol = get_number(nu, "macro_tol", where, 1e-10);
        cfg.dt = get_number(nu, "dt", where, 1e-3);
        cfg.t_end = get_number(nu, "T", where, 0.1);
        cfg.sigma_cells = static_cast<int>(get_number(nu, "sigma_cells", where, 16));
        cfg.bulk_layers = static_cast<int>(get_number(nu, "bulk_layers", where, 8));
        cfg.height = get_number(nu, "height", where, 1.0);
        cfg.lateral = get_number(nu, "lateral", where, 1.0);
        if (cfg.dt <= 0.0 || cfg.t_end < 0.0) fail(where, "dt must be positive and T >= 0");
        if (cfg.sigma_cells < 2 || cfg.bulk_layers < 1) fail(where, "grid sizes too small");
        if (cfg.height <= 0.0 || cfg.lateral <= 0.0) fail(where, "domain extents must be positive");
    }

    if (doc.contains("initial")) {
        const auto& in = doc["initial"];
        cfg.c_f_init = get_number(in, "c_f", origin + " (initial)", 0.0);
        cfg.c_s_init = get_number(in, "c_s", origin + " (initial)", 0.0);
    }

    if (doc.contains("outputs")) {
        const auto& ou = doc["outputs"];
        cfg.output_directory = ou.value("directory", "out");
        cfg.cadence = static_cast<int>(get_number(ou, "cadence", origin + " (outputs)", 0));
        if (ou.contains("formats")) {
            cfg.write_csv = false;
            cfg.write_vtk = false;
            for (const auto& f : ou["formats"]) {
                const std::string fmt = f.get<std::string>();
                if (fmt == "csv") cfg.write_csv = true;
                else if (fmt == "vtk") cfg.write_vtk = true;
                else fail(origin, "unknown output format '" + fmt + "'");
            }
        }
    }

    if (doc.contains("tensors")) {
        const auto& te = doc["tensors"];
        cfg.flow_tensor_path = te.value("flow", "");
        cfg.diffusion_tensor_path = te.value("diffusion", "");
    }
    if (cfg.flow_tensor_path.empty())
        cfg.flow_tensor_path = cfg.output_directory + "/flow_tensors.json";
    if (cfg.diffusion_tensor_path.empty())
        cfg.diffusion_tensor_path = cfg.output_directory + "/d_star.json";
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

} // namespace poromem::cfg
