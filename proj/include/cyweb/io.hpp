#pragma once

#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <variant>

#include <json.hpp>

#include "cyweb/design.hpp"
#include "cyweb/webs.hpp"

namespace cyweb {

using json = nlohmann::ordered_json;

inline constexpr const char* kSchemaId = "cyclide-webs/1";

// ---------------------------------------------------------------------------
// deterministic JSON text: every float printed with %.9g
// ---------------------------------------------------------------------------

inline std::string format_g9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

namespace detail {

inline void write_json(std::ostream& os, const json& j, int indent, int depth) {
    auto pad = [&](int d) {
        for (int i = 0; i < d * indent; ++i) os.put(' ');
    };
    switch (j.type()) {
        case json::value_t::object: {
            if (j.empty()) { os << "{}"; return; }
            os << "{\n";
            size_t n = 0;
            for (auto it = j.begin(); it != j.end(); ++it, ++n) {
                pad(depth + 1);
                os << json(it.key()).dump() << ": ";
                write_json(os, it.value(), indent, depth + 1);
                if (n + 1 < j.size()) os << ',';
                os << '\n';
            }
            pad(depth);
            os << '}';
            return;
        }
        case json::value_t::array: {
            if (j.empty()) { os << "[]"; return; }
            bool flat = true;
            for (const auto& e : j)
                if (e.is_structured()) flat = false;
            if (flat) {
                os << '[';
                for (size_t i = 0; i < j.size(); ++i) {
                    write_json(os, j[i], indent, depth);
                    if (i + 1 < j.size()) os << ", ";
                }
                os << ']';
                return;
            }
            os << "[\n";
            for (size_t i = 0; i < j.size(); ++i) {
                pad(depth + 1);
                write_json(os, j[i], indent, depth + 1);
                if (i + 1 < j.size()) os << ',';
                os << '\n';
            }
            pad(depth);
            os << ']';
            return;
        }
        case json::value_t::number_float:
            os << format_g9(j.get<double>());
            return;
        default:
            os << j.dump();
            return;
    }
}

}  // namespace detail

inline std::string json_text(const json& j) {
    std::ostringstream os;
    detail::write_json(os, j, 2, 0);
    os << '\n';
    return os.str();
}

// ---------------------------------------------------------------------------
// scene parsing
// ---------------------------------------------------------------------------

struct SceneDesign {
    enum class Kind { three_circles, quad, canal } kind = Kind::three_circles;
    DesignInputThreeCircles three;
    DesignInputQuad quad;
    ConicInput canal_g;
    MCircle canal_b;
};

struct Scene {
    std::optional<Cyclide> cyclide;
    std::optional<Pencil> pencil;
    std::optional<SceneDesign> design;
    Tolerance tol{};
    uint64_t seed = 1;

    /// The analysed pencil regardless of the input form.
    Pencil resolve_pencil() const {
        if (pencil) return *pencil;
        if (cyclide) return to_pencil(*cyclide);
        throw Error(ErrorKind::invalid_input, "scene carries a design input, not a surface");
    }
    Cyclide resolve_cyclide() const {
        if (cyclide) return cyclide->normalized();
        if (pencil) return from_pencil(*pencil);
        throw Error(ErrorKind::invalid_input, "scene carries a design input, not a surface");
    }
};

namespace detail {

[[noreturn]] inline void scene_error(const std::string& path, const std::string& what) {
    throw Error(ErrorKind::invalid_input, "scene: " + path + ": " + what);
}

inline double num_at(const json& j, const std::string& path) {
    if (!j.is_number()) scene_error(path, "expected a number");
    return j.get<double>();
}

inline Vec3 vec3_at(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 3) scene_error(path, "expected an array of 3 numbers");
    return Vec3{{num_at(j[0], path), num_at(j[1], path), num_at(j[2], path)}};
}

inline Vec5 vec5_at(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 5) scene_error(path, "expected an array of 5 numbers");
    Vec5 v;
    for (int i = 0; i < 5; ++i) v[i] = num_at(j[size_t(i)], path);
    return v;
}

inline Mat3 mat3_at(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 3) scene_error(path, "expected a 3x3 matrix");
    Mat3 m;
    for (int i = 0; i < 3; ++i) {
        if (!j[size_t(i)].is_array() || j[size_t(i)].size() != 3) scene_error(path, "expected a 3x3 matrix");
        for (int k = 0; k < 3; ++k) m(i, k) = num_at(j[size_t(i)][size_t(k)], path);
    }
    Mat3 sym = m.symmetrized();
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k)
            if (std::abs(m(i, k) - sym(i, k)) > 1e-9 * (1.0 + m.max_abs()))
                scene_error(path, "matrix must be symmetric");
    return sym;
}

inline Mat5 mat5_at(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 5) scene_error(path, "expected a 5x5 matrix");
    Mat5 m;
    for (int i = 0; i < 5; ++i) {
        if (!j[size_t(i)].is_array() || j[size_t(i)].size() != 5) scene_error(path, "expected a 5x5 matrix");
        for (int k = 0; k < 5; ++k) m(i, k) = num_at(j[size_t(i)][size_t(k)], path);
    }
    Mat5 sym = m.symmetrized();
    for (int i = 0; i < 5; ++i)
        for (int k = 0; k < 5; ++k)
            if (std::abs(m(i, k) - sym(i, k)) > 1e-9 * (1.0 + m.max_abs()))
                scene_error(path, "matrix must be symmetric");
    return sym;
}

inline MSphere sphere_at(const json& j, const std::string& path) {
    if (!j.is_object()) scene_error(path, "expected a sphere object");
    if (j.contains("penta")) return MSphere(ProjPoint(vec5_at(j["penta"], path + ".penta")));
    if (j.contains("plane")) {
        const json& p = j["plane"];
        return MSphere::from_plane(vec3_at(p.at("normal"), path + ".plane.normal"),
                                   num_at(p.at("offset"), path + ".plane.offset"));
    }
    if (j.contains("center")) {
        double r2 = j.contains("r2") ? num_at(j["r2"], path + ".r2")
                                     : [&] {
                                           double r = num_at(j.at("radius"), path + ".radius");
                                           return r * r;
                                       }();
        return MSphere::from_center_radius2(vec3_at(j["center"], path + ".center"), r2);
    }
    scene_error(path, "sphere needs penta, plane, or center");
}

inline MCircle circle_at_json(const json& j, const std::string& path) {
    if (!j.is_object()) scene_error(path, "expected a circle object");
    if (j.contains("points")) {
        const json& p = j["points"];
        if (!p.is_array() || p.size() != 3) scene_error(path + ".points", "expected 3 points");
        return MCircle::through_points(vec3_at(p[0], path), vec3_at(p[1], path), vec3_at(p[2], path));
    }
    if (j.contains("spheres")) {
        const json& p = j["spheres"];
        if (!p.is_array() || p.size() != 2) scene_error(path + ".spheres", "expected 2 spheres");
        return MCircle::from_spheres(sphere_at(p[0], path + ".spheres[0]"),
                                     sphere_at(p[1], path + ".spheres[1]"));
    }
    if (j.contains("center")) {
        Vec3 c = vec3_at(j.at("center"), path + ".center");
        Vec3 n = vec3_at(j.at("normal"), path + ".normal");
        if (j.contains("r2"))
            return MCircle::from_center_radius2_normal(c, num_at(j["r2"], path + ".r2"), normalized(n));
        return MCircle::from_center_radius_normal(c, num_at(j.at("radius"), path + ".radius"),
                                                  normalized(n));
    }
    scene_error(path, "circle needs points, spheres, or center/radius/normal");
}

inline ConicInput conic_at(const json& j, const std::string& path) {
    if (!j.is_object()) scene_error(path, "expected a conic object");
    if (j.contains("circle")) {
        const json& c = j["circle"];
        return ConicInput::circle(vec3_at(c.at("center"), path + ".circle.center"),
                                  num_at(c.at("radius"), path + ".circle.radius"),
                                  vec3_at(c.at("normal"), path + ".circle.normal"));
    }
    if (j.contains("ellipse")) {
        const json& c = j["ellipse"];
        return ConicInput::ellipse(vec3_at(c.at("center"), path + ".ellipse.center"),
                                   vec3_at(c.at("e1"), path + ".ellipse.e1"),
                                   vec3_at(c.at("e2"), path + ".ellipse.e2"),
                                   num_at(c.at("a"), path + ".ellipse.a"),
                                   num_at(c.at("b"), path + ".ellipse.b"));
    }
    scene_error(path, "conic needs circle or ellipse");
}

}  // namespace detail

inline Scene parse_scene(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw Error(ErrorKind::invalid_input, std::string("scene: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) detail::scene_error("$", "expected an object");
    if (j.contains("schema") && j["schema"] != kSchemaId)
        detail::scene_error("$.schema", "unsupported schema (want cyclide-webs/1)");

    Scene s;
    int sources = int(j.contains("cyclide")) + int(j.contains("pencil")) + int(j.contains("design"));
    if (sources != 1)
        detail::scene_error("$", "exactly one of cyclide, pencil, design must be present");
    if (j.contains("tol")) s.tol.rel = detail::num_at(j["tol"], "$.tol");
    if (j.contains("seed")) s.seed = j["seed"].get<uint64_t>();

    if (j.contains("cyclide")) {
        const json& c = j["cyclide"];
        Cyclide d;
        d.lambda = c.contains("lambda") ? detail::num_at(c["lambda"], "$.cyclide.lambda") : 0.0;
        if (c.contains("L")) d.L = detail::vec3_at(c["L"], "$.cyclide.L");
        if (c.contains("Qquad")) d.Qquad = detail::mat3_at(c["Qquad"], "$.cyclide.Qquad");
        if (c.contains("Qlin")) d.Qlin = detail::vec3_at(c["Qlin"], "$.cyclide.Qlin");
        d.Qconst = c.contains("Qconst") ? detail::num_at(c["Qconst"], "$.cyclide.Qconst") : 0.0;
        if (d.is_zero()) detail::scene_error("$.cyclide", "all coefficients vanish");
        s.cyclide = d;
        return s;
    }
    if (j.contains("pencil")) {
        Mat5 a = detail::mat5_at(j["pencil"].at("A"), "$.pencil.A");
        a = a + absolute_form() * (-frobenius_j(a) / 5.0);
        s.pencil = Pencil{a};
        return s;
    }
    const json& d = j["design"];
    SceneDesign sd;
    if (d.contains("three_circles")) {
        const json& t = d["three_circles"];
        sd.kind = SceneDesign::Kind::three_circles;
        sd.three.B = detail::sphere_at(t.at("B"), "$.design.three_circles.B");
        const json& cs = t.at("circles");
        if (!cs.is_array() || cs.size() != 3)
            detail::scene_error("$.design.three_circles.circles", "expected 3 circles");
        sd.three.k1 = detail::circle_at_json(cs[0], "$.design.three_circles.circles[0]");
        sd.three.k2 = detail::circle_at_json(cs[1], "$.design.three_circles.circles[1]");
        sd.three.k3 = detail::circle_at_json(cs[2], "$.design.three_circles.circles[2]");
    } else if (d.contains("quad")) {
        const json& t = d["quad"];
        sd.kind = SceneDesign::Kind::quad;
        const json& ps = t.at("P");
        if (!ps.is_array() || ps.size() != 4) detail::scene_error("$.design.quad.P", "expected 4 points");
        for (int i = 0; i < 4; ++i)
            sd.quad.P[size_t(i)] = detail::vec3_at(ps[size_t(i)], "$.design.quad.P");
        sd.quad.B = detail::sphere_at(t.at("B"), "$.design.quad.B");
        sd.quad.extra_point = detail::vec3_at(t.at("point"), "$.design.quad.point");
    } else if (d.contains("canal")) {
        const json& t = d["canal"];
        sd.kind = SceneDesign::Kind::canal;
        sd.canal_g = detail::conic_at(t.at("g"), "$.design.canal.g");
        sd.canal_b = detail::circle_at_json(t.at("b"), "$.design.canal.b");
    } else {
        detail::scene_error("$.design", "expected three_circles, quad, or canal");
    }
    s.design = sd;
    return s;
}

// ---------------------------------------------------------------------------
// reports
// ---------------------------------------------------------------------------

struct Report {
    json body;  // deterministic key order

    std::string text() const { return json_text(body); }
    bool operator==(const Report& o) const { return body == o.body; }
};

inline std::string write_report(const Report& r) { return r.text(); }

inline Report parse_report(const std::string& text) {
    try {
        return Report{json::parse(text)};
    } catch (const std::exception& e) {
        throw Error(ErrorKind::invalid_input, std::string("report: invalid JSON: ") + e.what());
    }
}

inline json cyclide_json(const Cyclide& d) {
    json q = json::array();
    for (int i = 0; i < 3; ++i)
        q.push_back(json::array({d.Qquad(i, 0), d.Qquad(i, 1), d.Qquad(i, 2)}));
    return json{{"lambda", d.lambda},
                {"L", {d.L[0], d.L[1], d.L[2]}},
                {"Qquad", q},
                {"Qlin", {d.Qlin[0], d.Qlin[1], d.Qlin[2]}},
                {"Qconst", d.Qconst}};
}

inline json pencil_json(const Pencil& p) {
    json rows = json::array();
    for (int i = 0; i < 5; ++i) {
        json row = json::array();
        for (int k = 0; k < 5; ++k) row.push_back(p.A(i, k));
        rows.push_back(row);
    }
    return json{{"A", rows}};
}

inline const char* family_class_name(FamilyClass c) {
    switch (c) {
        case FamilyClass::paired_nonspecial: return "paired";
        case FamilyClass::paired_special: return "paired-special";
        default: return "single";
    }
}

inline json families_json(const std::vector<CircleFamily>& fams) {
    json out = json::array();
    for (const auto& f : fams) {
        json cone = {{"t", f.cone.t},
                     {"multiplicity", f.cone.multiplicity},
                     {"inertia", {f.cone.sig.n_plus, f.cone.sig.n_minus, f.cone.sig.n_zero}}};
        json rows = json::array();
        for (int i = 0; i < 5; ++i) {
            json row = json::array();
            for (int k = 0; k < 5; ++k) row.push_back(f.cone.c(i, k));
            rows.push_back(row);
        }
        cone["matrix"] = rows;
        json v = json::array();
        for (const auto& pt : f.cone.vertex) {
            json coords = json::array();
            for (int i = 0; i < 5; ++i) coords.push_back(pt[i]);
            v.push_back(coords);
        }
        out.push_back(json{{"id", f.id},
                           {"class", family_class_name(f.cls)},
                           {"branch", f.branch},
                           {"partner", f.partner},
                           {"cone", cone},
                           {"vertex", v}});
    }
    return out;
}

// ---------------------------------------------------------------------------
// geometry exports
// ---------------------------------------------------------------------------

inline std::string export_obj(const Mesh& mesh) {
    if (mesh.vertices.empty() || mesh.triangles.empty())
        throw Error(ErrorKind::invalid_input, "export_obj: empty mesh");
    std::ostringstream os;
    for (const Vec3& v : mesh.vertices)
        os << "v " << format_g9(v[0]) << ' ' << format_g9(v[1]) << ' ' << format_g9(v[2]) << '\n';
    for (const auto& t : mesh.triangles)
        os << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
    return os.str();
}

inline std::string export_obj(const std::vector<std::vector<Vec3>>& polylines) {
    size_t total = 0;
    for (const auto& p : polylines) total += p.size();
    if (total == 0) throw Error(ErrorKind::invalid_input, "export_obj: empty polyline set");
    std::ostringstream os;
    size_t base = 1;
    std::vector<std::pair<size_t, size_t>> runs;
    for (const auto& p : polylines) {
        for (const Vec3& v : p)
            os << "v " << format_g9(v[0]) << ' ' << format_g9(v[1]) << ' ' << format_g9(v[2]) << '\n';
        runs.push_back({base, p.size()});
        base += p.size();
    }
    for (auto [start, len] : runs) {
        if (len < 2) continue;
        os << 'l';
        for (size_t i = 0; i < len; ++i) os << ' ' << start + i;
        os << ' ' << start;  // circles close up
        os << '\n';
    }
    return os.str();
}

struct SvgView {
    char axis = 'z';      // view direction: drop this coordinate
    double width = 720;   // pixel width of the output
};

inline std::string export_svg(const WebInstance& web, const SvgView& view = {}) {
    if (web.polylines.empty() || web.circles.empty())
        throw Error(ErrorKind::invalid_input, "export_svg: empty web");
    int ax = view.axis == 'x' ? 0 : (view.axis == 'y' ? 1 : 2);
    int u = (ax + 1) % 3, v = (ax + 2) % 3;
    double lo_u = 1e300, hi_u = -1e300, lo_v = 1e300, hi_v = -1e300;
    size_t drawn = 0;
    for (const auto& p : web.polylines)
        for (const Vec3& q : p) {
            lo_u = std::min(lo_u, q[u]); hi_u = std::max(hi_u, q[u]);
            lo_v = std::min(lo_v, q[v]); hi_v = std::max(hi_v, q[v]);
            ++drawn;
        }
    if (drawn == 0) throw Error(ErrorKind::invalid_input, "export_svg: no real points to draw");
    double span_u = std::max(hi_u - lo_u, 1e-9), span_v = std::max(hi_v - lo_v, 1e-9);
    double margin = 0.05 * std::max(span_u, span_v);
    lo_u -= margin; hi_u += margin; lo_v -= margin; hi_v += margin;
    span_u = hi_u - lo_u; span_v = hi_v - lo_v;
    double scale = view.width / span_u;
    double height = span_v * scale;

    // one colour class per family slot of the triple
    const char* colors[3] = {"#c0392b", "#2471a3", "#1e8449"};
    auto slot_of = [&](int family_id) {
        for (int s = 0; s < 3; ++s)
            if (web.triple[size_t(s)] == family_id) return s;
        return 0;
    };
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << format_g9(view.width)
       << "\" height=\"" << format_g9(height) << "\" viewBox=\"0 0 " << format_g9(view.width) << ' '
       << format_g9(height) << "\">\n";
    for (size_t i = 0; i < web.polylines.size(); ++i) {
        const auto& p = web.polylines[i];
        if (p.size() < 2) continue;
        int slot = slot_of(web.circles[i].family_id);
        os << "  <path fill=\"none\" stroke=\"" << colors[slot] << "\" stroke-width=\"1.2\" d=\"";
        for (size_t k = 0; k < p.size(); ++k) {
            double px = (p[k][u] - lo_u) * scale;
            double py = height - (p[k][v] - lo_v) * scale;
            os << (k == 0 ? 'M' : 'L') << format_g9(px) << ' ' << format_g9(py);
        }
        os << "Z\"/>\n";
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace cyweb
