#pragma once
/**
 * @file manipulator.hpp
 * @brief Physical manipulator description built from a discrete spiral profile.
 *
 * Links are rigid conical frustums. Joint i sits between link i and link i+1 and
 * is a short elastic cylinder. Cable holes sit on a rim circle of radius
 * hole_offset around the backbone, on the two faces bounding the joint gap. The
 * faces are 2*half_gap apart, with half_gap chosen so that the hole-to-hole chord
 * closes exactly when the joint reaches its limit:
 *
 *     half_gap = hole_offset * tan(joint_limit / 2)
 *     hole_radius = |BE| = hole_offset / cos(joint_limit / 2)
 *
 * so the rest angle BEC equals the joint limit.
 */

#include <array>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "spirokin/errors.hpp"
#include "spirokin/spiral.hpp"

namespace spirokin {

enum class Cable : int { dorsal = 0, ventral_left = 1, ventral_right = 2 };

inline constexpr std::array<Cable, 3> kAllCables{Cable::dorsal, Cable::ventral_left,
                                                 Cable::ventral_right};

inline std::string_view to_string(Cable c) {
    switch (c) {
        case Cable::dorsal: return "dorsal";
        case Cable::ventral_left: return "ventral_left";
        case Cable::ventral_right: return "ventral_right";
    }
    return "?";
}

inline Cable cable_from_string(std::string_view s) {
    for (Cable c : kAllCables) {
        if (to_string(c) == s) return c;
    }
    throw DomainError("unknown cable '" + std::string(s) +
                      "' (expected dorsal, ventral_left, ventral_right)");
}

inline int index_of(Cable c) { return static_cast<int>(c); }

struct MaterialConstants {
    double youngs_modulus = 16.9;  ///< MPa (N/mm^2)
    double density = 1.22;         ///< g/cm^3, TPU-95A
    double gravity = 9.81;         ///< m/s^2

    void validate() const {
        if (!(youngs_modulus > 0.0)) throw DomainError("material: E must be positive");
        if (!(density > 0.0)) throw DomainError("material: density must be positive");
        if (!(gravity > 0.0)) throw DomainError("material: g must be positive");
    }
};

/// One rigid link; index 1 is the base.
struct SectionSpec {
    int index = 1;
    double link_radius = 0.0;    ///< proximal face radius, mm
    double distal_radius = 0.0;  ///< distal face radius, mm
    double link_length = 0.0;    ///< axial length, mm
    double mass = 0.0;           ///< g
    double cg_fraction = 0.5;    ///< CG position along the axis from the proximal face
};

/// Elastic joint between link `index` and link `index + 1`.
struct JointSpec {
    int index = 1;
    double radius = 0.0;       ///< elastic cylinder radius r_i, mm
    double length = 0.0;       ///< elastic cylinder length L_i, mm
    double hole_radius = 0.0;  ///< |BE| = |CE|, mm
    double hole_offset = 0.0;  ///< radial distance of holes from the backbone, mm
    double half_gap = 0.0;     ///< axial distance of each hole face from E, mm
};

struct ManipulatorSpec {
    std::vector<SectionSpec> sections;
    std::vector<JointSpec> joints;
    MaterialConstants material;
    double joint_limit = kPi / 6.0;
    /// Angular hole positions in the cross-section plane (local y-z), radians.
    std::array<double, 3> cable_layout{kPi / 2.0, 7.0 * kPi / 6.0, 11.0 * kPi / 6.0};
    double k_p = 1.0;
    /// Exponent e in M_i = k_p^e M_{i-1}.
    double torque_exponent = -2.5;

    int joint_count() const { return static_cast<int>(joints.size()); }

    const JointSpec& joint(int i) const {
        if (i < 1 || i > joint_count()) {
            throw DomainError("joint index " + std::to_string(i) + " out of range [1, " +
                              std::to_string(joint_count()) + "]");
        }
        return joints[static_cast<std::size_t>(i - 1)];
    }

    double cable_angle(Cable c) const { return cable_layout[static_cast<std::size_t>(index_of(c))]; }

    double arm_length() const {
        double s = 0.0;
        for (const auto& sec : sections) s += sec.link_length;
        return s;
    }

    double total_mass() const {
        double s = 0.0;
        for (const auto& sec : sections) s += sec.mass;
        return s;
    }

    /// Growth of joint-angle increments base to tip: k_p^(e - 3).
    double angle_ratio() const { return std::pow(k_p, torque_exponent - 3.0); }

    void validate() const {
        if (sections.empty()) throw DomainError("spec: no sections");
        if (joints.size() + 1 != sections.size()) {
            throw DomainError("spec: joint count must be section count - 1");
        }
        material.validate();
        if (!(joint_limit > 0.0 && joint_limit < kPi)) {
            throw DomainError("spec: joint_limit must lie in (0, pi)");
        }
        if (!(k_p > 0.0 && k_p <= 1.0)) throw DomainError("spec: k_p must lie in (0, 1]");
        for (const auto& j : joints) {
            if (!(j.length > 0.0) || j.radius < 0.0 || !(j.hole_offset > 0.0)) {
                throw DomainError("spec: joint " + std::to_string(j.index) +
                                  " has non-positive geometry");
            }
        }
    }
};

/// Volume of a conical frustum, mm^3.
inline double frustum_volume(double r0, double r1, double length) {
    return kPi * length / 3.0 * (r0 * r0 + r0 * r1 + r1 * r1);
}

/// Centroid of a conical frustum as a fraction of its length from the r0 face.
inline double frustum_centroid_fraction(double r0, double r1) {
    const double den = 4.0 * (r0 * r0 + r0 * r1 + r1 * r1);
    return (r0 * r0 + 2.0 * r0 * r1 + 3.0 * r1 * r1) / den;
}

struct BuildOptions {
    double joint_fraction = 0.15;         ///< joint length as a fraction of the link length
    double joint_radius_fraction = 0.10;  ///< joint radius as a fraction of the distal link radius
    double hole_fraction = 0.9;    ///< hole rim radius as a fraction of the distal link radius
    double joint_limit = kPi / 6.0;
    double torque_exponent = -2.5;
};

/// Assemble sections, joints, masses and hole geometry from a discrete profile.
inline ManipulatorSpec build_spec(const DiscreteProfile& profile, const MaterialConstants& material,
                                  const BuildOptions& opt = {}) {
    if (profile.cross_sections.empty()) throw DomainError("build_spec: empty profile");
    if (!(opt.joint_fraction > 0.0 && opt.joint_fraction < 0.5)) {
        throw DomainError("build_spec: joint_fraction must lie in (0, 0.5)");
    }
    if (!(opt.joint_radius_fraction > 0.0 && opt.joint_radius_fraction < 1.0)) {
        throw DomainError("build_spec: joint_radius_fraction must lie in (0, 1)");
    }
    if (!(opt.hole_fraction > 0.0 && opt.hole_fraction <= 1.0)) {
        throw DomainError("build_spec: hole_fraction must lie in (0, 1]");
    }
    material.validate();

    ManipulatorSpec spec;
    spec.material = material;
    spec.joint_limit = opt.joint_limit;
    spec.k_p = profile.k_p;
    spec.torque_exponent = opt.torque_exponent;

    constexpr double kGramsPerMm3 = 1e-3;  // g/cm^3 -> g/mm^3
    const int n = static_cast<int>(profile.size());
    for (int i = 0; i < n; ++i) {
        const auto& q = profile.cross_sections[static_cast<std::size_t>(i)];
        SectionSpec s;
        s.index = i + 1;
        s.link_radius = (q[0] - q[3]).norm();
        s.distal_radius = (q[1] - q[2]).norm();
        s.link_length = (q[3] - q[2]).norm();
        s.mass = material.density * kGramsPerMm3 *
                 frustum_volume(s.link_radius, s.distal_radius, s.link_length);
        s.cg_fraction = frustum_centroid_fraction(s.link_radius, s.distal_radius);
        spec.sections.push_back(s);
    }
    const double half = 0.5 * opt.joint_limit;
    for (int i = 0; i + 1 < n; ++i) {
        const auto& s = spec.sections[static_cast<std::size_t>(i)];
        JointSpec j;
        j.index = i + 1;
        j.radius = opt.joint_radius_fraction * s.distal_radius;
        j.length = opt.joint_fraction * s.link_length;
        j.hole_offset = opt.hole_fraction * s.distal_radius;
        j.half_gap = j.hole_offset * std::tan(half);
        j.hole_radius = j.hole_offset / std::cos(half);
        spec.joints.push_back(j);
    }
    spec.validate();
    return spec;
}

/// Rotational stiffness E * (pi/4) r^4 / L of joint i, N*mm/rad.
inline double bending_stiffness(const ManipulatorSpec& spec, int i) {
    const auto& j = spec.joint(i);
    const double second_moment = kPi / 4.0 * std::pow(j.radius, 4);
    return spec.material.youngs_modulus * second_moment / j.length;
}

/// Unit direction of cross-section angle phi in a joint frame (x is the backbone).
inline Eigen::Vector3d radial_direction(double phi) {
    return {0.0, std::cos(phi), std::sin(phi)};
}

/// Hole points and joint centre for one joint, expressed in link i's joint frame (E at origin).
struct JointGeometry {
    Eigen::Vector3d A, B, C, D, E, F, G;
};

/**
 * Geometry of joint i for the driven cable c1 and a second cable c2, with link i+1
 * rotated by @p rotation about E. B/C are c1's holes on the link i / link i+1 faces,
 * A/D the far ends of that cable inside the two links. G/F are c2's holes on the
 * link i / link i+1 faces.
 */
inline JointGeometry joint_geometry(const ManipulatorSpec& spec, int i, Cable c1, Cable c2,
                                    const Eigen::Matrix3d& rotation = Eigen::Matrix3d::Identity()) {
    const auto& j = spec.joint(i);
    const auto& link_prox = spec.sections[static_cast<std::size_t>(i - 1)];
    const auto& link_dist = spec.sections[static_cast<std::size_t>(i)];
    const Eigen::Vector3d x = Eigen::Vector3d::UnitX();
    const Eigen::Vector3d u1 = radial_direction(spec.cable_angle(c1));
    const Eigen::Vector3d u2 = radial_direction(spec.cable_angle(c2));

    JointGeometry g;
    g.E = Eigen::Vector3d::Zero();
    g.B = -j.half_gap * x + j.hole_offset * u1;
    g.A = g.B - link_prox.link_length * x;
    const Eigen::Vector3d c_local = j.half_gap * x + j.hole_offset * u1;
    g.C = rotation * c_local;
    g.D = rotation * (c_local + link_dist.link_length * x);
    g.G = -j.half_gap * x + j.hole_offset * u2;
    g.F = rotation * (j.half_gap * x + j.hole_offset * u2);
    return g;
}

/// Hole-to-hole chord across joint i for cable c, with link i+1 rotated by @p rotation.
inline double cable_chord(const ManipulatorSpec& spec, int i, Cable c,
                          const Eigen::Matrix3d& rotation) {
    const auto& j = spec.joint(i);
    const Eigen::Vector3d u = radial_direction(spec.cable_angle(c));
    const Eigen::Vector3d b = -j.half_gap * Eigen::Vector3d::UnitX() + j.hole_offset * u;
    const Eigen::Vector3d c0 = j.half_gap * Eigen::Vector3d::UnitX() + j.hole_offset * u;
    return (rotation * c0 - b).norm();
}

/// Chord across joint i for cable c in the straight configuration.
inline double rest_chord(const ManipulatorSpec& spec, int i, Cable c) {
    const auto g = joint_geometry(spec, i, c, c);
    return (g.C - g.B).norm();
}

}  // namespace spirokin
