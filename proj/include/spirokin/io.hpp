#pragma once
/**
 * @file io.hpp
 * @brief File formats: spec/params JSON, shape CSV, OBJ mesh, atomic writes.
 *
 * JSON lengths are mm, masses g, angles degrees. Doubles are written in their
 * shortest round-trip form so identical inputs give byte-identical files.
 */

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <unistd.h>

#include <json.hpp>

#include "spirokin/actuation.hpp"
#include "spirokin/errors.hpp"
#include "spirokin/manipulator.hpp"
#include "spirokin/spiral.hpp"
#include "spirokin/validation.hpp"

namespace spirokin {

using json = nlohmann::json;

inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return {buf, res.ptr};
}

/// Write via a sibling temp file and rename, so readers never see a partial file.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path() && !path.parent_path().empty()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DomainError("cannot open " + tmp.string() + " for writing");
        out << content;
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw DomainError("write failed for " + path.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw DomainError("cannot move output into place at " + path.string());
    }
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DomainError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline json parse_json_file(const std::filesystem::path& path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw DomainError(path.string() + ": " + e.what());
    }
}

// ---- spiral parameters ------------------------------------------------------

inline json to_json(const SpiralParams& p) {
    return {{"a_mm", p.a},
            {"b", p.b},
            {"k", p.k},
            {"k_p", p.section_ratio()},
            {"delta_theta_deg", rad2deg(p.delta_theta)},
            {"theta_start_deg", rad2deg(p.theta_start)},
            {"theta_end_deg", rad2deg(p.theta_end)},
            {"sections", p.section_count()}};
}

inline json to_json(const GraspRange& g) {
    return {{"hj_mm", g.hj}, {"gh_mm", g.gh}, {"gripper_max_mm", g.gripper_max}, {"overlap_mm", g.overlap}};
}

// ---- manipulator spec -------------------------------------------------------

inline json to_json(const ManipulatorSpec& s) {
    json j;
    j["joint_limit_deg"] = rad2deg(s.joint_limit);
    j["k_p"] = s.k_p;
    j["torque_exponent"] = s.torque_exponent;
    j["cable_layout_deg"] = {
        {"dorsal", rad2deg(s.cable_layout[0])},
        {"ventral_left", rad2deg(s.cable_layout[1])},
        {"ventral_right", rad2deg(s.cable_layout[2])}};
    j["material"] = {{"youngs_modulus_mpa", s.material.youngs_modulus},
                     {"density_g_cm3", s.material.density},
                     {"gravity_m_s2", s.material.gravity}};
    j["sections"] = json::array();
    for (const auto& sec : s.sections) {
        j["sections"].push_back({{"index", sec.index},
                                 {"link_radius_mm", sec.link_radius},
                                 {"distal_radius_mm", sec.distal_radius},
                                 {"link_length_mm", sec.link_length},
                                 {"mass_g", sec.mass},
                                 {"cg_fraction", sec.cg_fraction}});
    }
    j["joints"] = json::array();
    for (const auto& jt : s.joints) {
        j["joints"].push_back({{"index", jt.index},
                               {"radius_mm", jt.radius},
                               {"length_mm", jt.length},
                               {"hole_radius_mm", jt.hole_radius},
                               {"hole_offset_mm", jt.hole_offset},
                               {"half_gap_mm", jt.half_gap}});
    }
    return j;
}

inline ManipulatorSpec spec_from_json(const json& j) {
    try {
        ManipulatorSpec s;
        s.joint_limit = deg2rad(j.at("joint_limit_deg").get<double>());
        s.k_p = j.at("k_p").get<double>();
        s.torque_exponent = j.value("torque_exponent", -2.5);
        if (j.contains("cable_layout_deg")) {
            const auto& c = j.at("cable_layout_deg");
            s.cable_layout = {deg2rad(c.at("dorsal").get<double>()),
                              deg2rad(c.at("ventral_left").get<double>()),
                              deg2rad(c.at("ventral_right").get<double>())};
        }
        const auto& m = j.at("material");
        s.material.youngs_modulus = m.at("youngs_modulus_mpa").get<double>();
        s.material.density = m.at("density_g_cm3").get<double>();
        s.material.gravity = m.value("gravity_m_s2", 9.81);
        for (const auto& e : j.at("sections")) {
            SectionSpec sec;
            sec.index = e.at("index").get<int>();
            sec.link_radius = e.at("link_radius_mm").get<double>();
            sec.distal_radius = e.at("distal_radius_mm").get<double>();
            sec.link_length = e.at("link_length_mm").get<double>();
            sec.mass = e.at("mass_g").get<double>();
            sec.cg_fraction = e.at("cg_fraction").get<double>();
            s.sections.push_back(sec);
        }
        for (const auto& e : j.at("joints")) {
            JointSpec jt;
            jt.index = e.at("index").get<int>();
            jt.radius = e.at("radius_mm").get<double>();
            jt.length = e.at("length_mm").get<double>();
            jt.hole_radius = e.at("hole_radius_mm").get<double>();
            jt.hole_offset = e.at("hole_offset_mm").get<double>();
            jt.half_gap = e.at("half_gap_mm").get<double>();
            s.joints.push_back(jt);
        }
        s.validate();
        return s;
    } catch (const json::exception& e) {
        throw DomainError(std::string("spec json: ") + e.what());
    }
}

inline ManipulatorSpec load_spec(const std::filesystem::path& path) {
    return spec_from_json(parse_json_file(path));
}

// ---- shapes -----------------------------------------------------------------

inline constexpr const char* kShapeHeader = "joint_index,angle_deg,frame_x_mm,frame_y_mm,frame_z_mm";

/// One row per frame: 0 is the base, N+1 the tip; angle is that joint's rotation.
inline std::string shape_csv(const BackboneShape& shape) {
    std::ostringstream os;
    os << kShapeHeader << '\n';
    const std::size_t n = shape.frames.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double angle =
            (i >= 1 && i <= shape.joint_angles.size()) ? rad2deg(shape.joint_angles[i - 1]) : 0.0;
        const auto& f = shape.frames[i];
        os << i << ',' << format_double(angle) << ',' << format_double(f(0, 3)) << ','
           << format_double(f(1, 3)) << ',' << format_double(f(2, 3)) << '\n';
    }
    return os.str();
}

/// Frame positions from a shape CSV, in row order.
inline std::vector<Eigen::Vector3d> read_shape_points(const std::filesystem::path& path) {
    std::istringstream in(read_file(path));
    std::string line;
    if (!std::getline(in, line) || line != kShapeHeader) {
        throw DomainError(path.string() + ": not a shape CSV");
    }
    std::vector<Eigen::Vector3d> pts;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cells = detail::split_csv(line);
        if (cells.size() != 5) throw DomainError(path.string() + ": bad row " + std::to_string(line_no));
        Eigen::Vector3d p;
        for (int k = 0; k < 3; ++k) {
            p[k] = detail::parse_number<double>(cells[static_cast<std::size_t>(2 + k)], line_no,
                                                "coordinate");
        }
        pts.push_back(p);
    }
    return pts;
}

inline std::string mesh_obj(const TriangleMesh& mesh) {
    std::ostringstream os;
    for (const auto& v : mesh.vertices) {
        os << "v " << format_double(v.x()) << ' ' << format_double(v.y()) << ' '
           << format_double(v.z()) << '\n';
    }
    for (const auto& f : mesh.faces) os << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
    return os.str();
}

// ---- validation -------------------------------------------------------------

inline std::map<int, int> mapping_from_json(const json& j) {
    std::map<int, int> m;
    try {
        for (const auto& [k, v] : j.items()) {
            int frame = 0;
            const auto res = std::from_chars(k.data(), k.data() + k.size(), frame);
            if (res.ec != std::errc{} || res.ptr != k.data() + k.size()) {
                throw DomainError("mapping: key '" + k + "' is not a frame id");
            }
            m[frame] = v.get<int>();
        }
    } catch (const json::exception& e) {
        throw DomainError(std::string("mapping json: ") + e.what());
    }
    return m;
}

inline json to_json(const ComparisonReport& r) {
    json j;
    j["steps"] = r.steps;
    j["step_rmse_mm"] = r.step_rmse;
    j["dropped_markers"] = r.dropped_markers;
    json sec = json::object();
    for (const auto& [k, v] : r.section_errors) sec[std::to_string(k)] = v;
    j["section_errors_mm"] = sec;
    j["mean_rmse_mm"] = r.mean_rmse;
    j["max_deviation_mm"] = r.max_deviation;
    j["alignments"] = json::array();
    for (const auto& a : r.alignments) {
        json rot = json::array();
        for (int i = 0; i < 3; ++i) rot.push_back({a.rotation(i, 0), a.rotation(i, 1), a.rotation(i, 2)});
        j["alignments"].push_back({{"rotation", rot},
                                   {"translation_mm", {a.translation.x(), a.translation.y(), a.translation.z()}},
                                   {"rmse_mm", a.rmse}});
    }
    return j;
}

}  // namespace spirokin
