#pragma once
/**
 * @file strategy.hpp
 * @brief Grasping strategies as keyframe scripts, and their playback into shapes.
 *
 * A script is a JSON file: a list of keyframes, each holding a base pose for the
 * rigid arm, a cable command and a gripper aperture. The base pose rotation is
 * Rz(yaw) Ry(pitch) Rx(roll) with the arm along local x and the dorsal side on
 * local z; the world z axis points up, so pitch 90 deg hangs the arm straight down.
 */

#include <algorithm>
#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <Eigen/SVD>

#include "spirokin/actuation.hpp"
#include "spirokin/errors.hpp"
#include "spirokin/io.hpp"
#include "spirokin/statics.hpp"

#ifndef SPIROKIN_STRATEGY_DIR
#define SPIROKIN_STRATEGY_DIR "strategies"
#endif

namespace spirokin {

inline const std::array<std::string, 4> kPhases{"reaching", "prehension", "transport", "release"};

struct BasePose {
    Eigen::Vector3d position = Eigen::Vector3d::Zero();  ///< mm
    Eigen::Vector3d rpy = Eigen::Vector3d::Zero();       ///< roll, pitch, yaw in radians

    Eigen::Matrix3d rotation() const {
        return (Eigen::AngleAxisd(rpy.z(), Eigen::Vector3d::UnitZ()) *
                Eigen::AngleAxisd(rpy.y(), Eigen::Vector3d::UnitY()) *
                Eigen::AngleAxisd(rpy.x(), Eigen::Vector3d::UnitX()))
            .toRotationMatrix();
    }

    Eigen::Matrix4d matrix() const {
        Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
        m.block<3, 3>(0, 0) = rotation();
        m.block<3, 1>(0, 3) = position;
        return m;
    }
};

struct Keyframe {
    std::string phase;
    BasePose base_pose;
    ActuationCommand command;
    double aperture = 1.0;  ///< gripper opening, 0 closed .. 1 open
    double dwell_s = 0.0;
};

enum class StrategyClass { bending, twisting };

struct StrategyScript {
    std::string name;
    std::string provenance;
    StrategyClass cls = StrategyClass::bending;
    std::array<double, 2> object_size_mm{0.0, 0.0};
    std::vector<Keyframe> keyframes;

    void validate() const {
        if (keyframes.empty()) throw DomainError("strategy " + name + ": no keyframes");
        for (const auto& k : keyframes) {
            if (std::find(kPhases.begin(), kPhases.end(), k.phase) == kPhases.end()) {
                throw DomainError("strategy " + name + ": unknown phase '" + k.phase + "'");
            }
            if (!(k.aperture >= 0.0 && k.aperture <= 1.0)) {
                throw DomainError("strategy " + name + ": aperture must lie in [0, 1]");
            }
            k.command.validate();
        }
    }
};

inline StrategyScript strategy_from_json(const json& j) {
    try {
        StrategyScript s;
        s.name = j.at("name").get<std::string>();
        s.provenance = j.at("provenance").get<std::string>();
        const auto cls = j.at("class").get<std::string>();
        if (cls == "bending") s.cls = StrategyClass::bending;
        else if (cls == "twisting") s.cls = StrategyClass::twisting;
        else throw DomainError("strategy " + s.name + ": class must be bending or twisting");
        const auto size = j.at("object_size_mm").get<std::vector<double>>();
        if (size.size() != 2) throw DomainError("strategy " + s.name + ": object_size_mm needs [min, max]");
        s.object_size_mm = {size[0], size[1]};
        for (const auto& e : j.at("keyframes")) {
            Keyframe k;
            k.phase = e.at("phase").get<std::string>();
            const auto& bp = e.at("base_pose");
            const auto pos = bp.at("position_mm").get<std::vector<double>>();
            const auto rpy = bp.at("rpy_deg").get<std::vector<double>>();
            if (pos.size() != 3 || rpy.size() != 3) {
                throw DomainError("strategy " + s.name + ": base_pose needs 3 position and 3 angle values");
            }
            k.base_pose.position = {pos[0], pos[1], pos[2]};
            k.base_pose.rpy = {deg2rad(rpy[0]), deg2rad(rpy[1]), deg2rad(rpy[2])};
            const auto& c = e.at("command");
            k.command.cable = cable_from_string(c.at("cable").get<std::string>());
            k.command.shorten = c.at("shorten_mm").get<double>();
            if (c.contains("cable2")) {
                k.command.cable2 = cable_from_string(c.at("cable2").get<std::string>());
                k.command.shorten2 = c.at("shorten2_mm").get<double>();
            }
            k.aperture = e.at("aperture").get<double>();
            k.dwell_s = e.value("dwell_s", 0.0);
            s.keyframes.push_back(std::move(k));
        }
        s.validate();
        return s;
    } catch (const json::exception& e) {
        throw DomainError(std::string("strategy json: ") + e.what());
    }
}

inline std::filesystem::path default_strategy_dir() { return SPIROKIN_STRATEGY_DIR; }

/// Every *.json script in @p dir, keyed by name.
inline std::map<std::string, StrategyScript> load_strategies(
    const std::filesystem::path& dir = default_strategy_dir()) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw DomainError("strategy directory not found: " + dir.string());
    std::map<std::string, StrategyScript> out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() != ".json") continue;
        auto s = strategy_from_json(parse_json_file(entry.path()));
        const auto name = s.name;
        if (!out.emplace(name, std::move(s)).second) {
            throw DomainError("strategy '" + name + "' defined twice in " + dir.string());
        }
    }
    return out;
}

inline StrategyScript get_strategy(const std::string& name,
                                   const std::filesystem::path& dir = default_strategy_dir()) {
    auto all = load_strategies(dir);
    auto it = all.find(name);
    if (it == all.end()) {
        std::string msg = "unknown strategy '" + name + "'; available:";
        for (const auto& [n, s] : all) msg += " " + n;
        throw DomainError(msg);
    }
    return it->second;
}

struct PlaybackFrame {
    std::string phase;
    Eigen::Matrix4d base = Eigen::Matrix4d::Identity();
    BackboneShape shape;  ///< world frame
    double aperture = 1.0;
    int saturated_joints = 0;  ///< joints held at a limit by the cable command
};

/// Max distance of the points from their least-squares plane, mm.
inline double planarity_residual(const std::vector<Eigen::Vector3d>& pts) {
    if (pts.size() < 4) return 0.0;
    Eigen::Vector3d c = Eigen::Vector3d::Zero();
    for (const auto& p : pts) c += p;
    c /= static_cast<double>(pts.size());
    Eigen::MatrixXd m(static_cast<Eigen::Index>(pts.size()), 3);
    for (std::size_t i = 0; i < pts.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = (pts[i] - c).transpose();
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinV);
    const Eigen::Vector3d normal = svd.matrixV().col(2);
    double worst = 0.0;
    for (const auto& p : pts) worst = std::max(worst, std::abs((p - c).dot(normal)));
    return worst;
}

inline std::vector<PlaybackFrame> playback(const StrategyScript& script, const ManipulatorSpec& spec,
                                           const StaticsOptions& opt = {}) {
    script.validate();
    std::vector<PlaybackFrame> out;
    out.reserve(script.keyframes.size());
    for (const auto& k : script.keyframes) {
        PlaybackFrame f;
        f.phase = k.phase;
        f.base = k.base_pose.matrix();
        f.aperture = k.aperture;
        const auto rest = solve_rest_shape(spec, k.base_pose.rotation(), opt);
        const auto act = configuration_for(spec, k.command);
        f.saturated_joints = act.saturated_count();
        f.shape = forward_shape(spec, compose_rotations(rest, act));
        for (auto& fr : f.shape.frames) fr = f.base * fr;
        out.push_back(std::move(f));
    }
    return out;
}

}  // namespace spirokin
