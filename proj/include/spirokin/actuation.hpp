#pragma once
/**
 * @file actuation.hpp
 * @brief Cable shortening -> joint rotations -> backbone frames.
 *
 * Bending: a shortening D of one cable is shared over the joints so that the
 * joint-angle increments follow the torque/stiffness ratio of the tapered arm,
 * k_p^(e-3) per joint from base to tip (e = torque exponent, -5/2 by default), so
 * the tip curls first. Joints that reach the limit keep their full chord budget
 * and the rest of D flows to the joints that still have room.
 *
 * Twisting: the first cable bends as above. The second cable then rotates each
 * joint that is not already saturated at the tip about the line BE through the
 * first cable's proximal hole, which keeps the first cable's chord unchanged.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include "spirokin/errors.hpp"
#include "spirokin/manipulator.hpp"
#include "spirokin/statics.hpp"

namespace spirokin {

/// Joint angle BEC from the hole chord X (cosine theorem, evaluated as 2 asin(X / 2R)).
inline double angle_from_chord(double r_hole, double chord) {
    if (!(r_hole > 0.0)) throw DomainError("angle_from_chord: hole radius must be positive");
    if (chord < 0.0 || chord > 2.0 * r_hole) {
        std::ostringstream os;
        os << "angle_from_chord: chord " << chord << " outside [0, " << 2.0 * r_hole << "]";
        throw DomainError(os.str());
    }
    return 2.0 * std::asin(std::min(1.0, chord / (2.0 * r_hole)));
}

inline double chord_from_angle(double r_hole, double angle) {
    return 2.0 * r_hole * std::sin(0.5 * angle);
}

/// Rotation axis that curls the arm toward cross-section direction psi.
inline Eigen::Vector3d bend_axis(double psi) {
    return Eigen::Vector3d::UnitX().cross(radial_direction(psi));
}

struct JointState {
    double bend_angle = 0.0;
    Eigen::Vector3d axis = Eigen::Vector3d::UnitY();
    bool saturated = false;

    Eigen::Matrix3d rotation() const {
        return Eigen::AngleAxisd(bend_angle, axis).toRotationMatrix();
    }
};

struct JointConfiguration {
    std::vector<JointState> joints;

    std::vector<Eigen::Matrix3d> rotations() const {
        std::vector<Eigen::Matrix3d> r;
        r.reserve(joints.size());
        for (const auto& j : joints) r.push_back(j.rotation());
        return r;
    }

    int saturated_count() const {
        return static_cast<int>(std::count_if(joints.begin(), joints.end(),
                                              [](const JointState& j) { return j.saturated; }));
    }
};

/// frames[0] is the base; frames[i] is the distal end of link i (after joint i's rotation).
struct BackboneShape {
    std::vector<Eigen::Matrix4d> frames;
    std::vector<double> joint_angles;  ///< rotation angle of each joint, radians

    std::vector<Eigen::Vector3d> points() const {
        std::vector<Eigen::Vector3d> p;
        p.reserve(frames.size());
        for (const auto& f : frames) p.emplace_back(f.block<3, 1>(0, 3));
        return p;
    }

    Eigen::Vector3d tip() const { return frames.back().block<3, 1>(0, 3); }
};

struct ActuationCommand {
    Cable cable = Cable::dorsal;
    double shorten = 0.0;  ///< mm
    std::optional<Cable> cable2;
    double shorten2 = 0.0;  ///< mm

    void validate() const {
        if (!(shorten >= 0.0)) throw DomainError("command: shortening must be >= 0 mm");
        if (cable2) {
            if (*cable2 == cable) throw DomainError("command: second cable must differ from the first");
            if (!(shorten2 >= 0.0)) throw DomainError("command: second shortening must be >= 0 mm");
        }
    }
};

namespace detail {

/**
 * Correctly rounded sum: the exact real sum of the entries, rounded once.
 * Shewchuk's non-overlapping partials, finished with the half-way correction.
 */
inline double exact_sum(const std::vector<double>& v) {
    std::vector<double> partials;
    for (double x : v) {
        std::size_t k = 0;
        for (double y : partials) {
            if (std::abs(x) < std::abs(y)) std::swap(x, y);
            const double hi = x + y;
            const double lo = y - (hi - x);
            if (lo != 0.0) partials[k++] = lo;
            x = hi;
        }
        partials.resize(k);
        partials.push_back(x);
    }
    if (partials.empty()) return 0.0;
    std::size_t n = partials.size();
    double hi = partials[--n];
    double lo = 0.0;
    while (n > 0) {
        const double x = hi;
        const double y = partials[--n];
        hi = x + y;
        lo = y - (hi - x);
        if (lo != 0.0) break;
    }
    // Round half-way cases by the sign of the next partial down.
    if (n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0))) {
        const double y = lo * 2.0;
        const double x = hi + y;
        if (y == x - hi) hi = x;
    }
    return hi;
}

}  // namespace detail

/// Per-joint outcome of sharing one cable's shortening.
struct BendDistribution {
    std::vector<double> angles;      ///< bend increment per joint, radians
    std::vector<double> shortening;  ///< chord shortening assigned to each joint, mm
    std::vector<double> budget;      ///< chord shortening available up to the limit, mm
    std::vector<double> new_chord;   ///< chord after shortening, mm
    std::vector<bool> saturated;
    double remainder = 0.0;          ///< part of D beyond the total budget, mm
    double direction = 0.0;          ///< cross-section angle the arm curls toward
    Eigen::Vector3d axis = Eigen::Vector3d::UnitY();

    /// Sums are exact, rounded once, so they do not depend on joint order.
    double distributed() const { return detail::exact_sum(shortening); }
    double total_budget() const { return detail::exact_sum(budget); }
    bool fully_saturated() const {
        return std::all_of(saturated.begin(), saturated.end(), [](bool b) { return b; });
    }

    JointConfiguration configuration() const {
        JointConfiguration c;
        c.joints.reserve(angles.size());
        for (std::size_t i = 0; i < angles.size(); ++i) {
            c.joints.push_back({angles[i], axis, saturated[i]});
        }
        return c;
    }
};

namespace detail {

// Chord of the bookkept cable across joint i (1-based) at bend angle beta.
using ChordFn = std::function<double(int, double)>;

// Nudge one free entry so that the exact sum rounds to target bit for bit.
inline void settle_sum(std::vector<double>& shares, const std::vector<bool>& fixed, double target) {
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < shares.size(); ++i) {
        if (!fixed[i] && shares[i] > 0.0) order.push_back(i);
    }
    // Larger shares first: they absorb a correction with the fewest ulp steps.
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return shares[a] > shares[b]; });
    for (std::size_t pick : order) {
        const double keep = shares[pick];
        for (int it = 0; it < 8; ++it) {
            const double total = exact_sum(shares);
            if (total == target) return;
            shares[pick] += target - total;
        }
        // Step one ulp at a time until the sum lands or crosses. A share in the
        // target's binade can step over it, so fall back to the next share.
        const double start = exact_sum(shares);
        const bool up = start < target;
        const double dir = up ? std::numeric_limits<double>::infinity()
                              : -std::numeric_limits<double>::infinity();
        for (int it = 0; it < 1 << 16; ++it) {
            const double total = exact_sum(shares);
            if (total == target) return;
            if ((total < target) != up) break;
            shares[pick] = std::nextafter(shares[pick], dir);
        }
        shares[pick] = keep;
    }
}

// Largest t in [lo, hi] with f(t) <= target, f non-decreasing.
template <typename F>
double bisect_level(F&& f, double target, double lo, double hi) {
    for (int it = 0; it < 400; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (f(mid) <= target) lo = mid; else hi = mid;
    }
    return lo;
}

/**
 * Share D over the joints so that angles follow t * ratio^(i-1), each clamped at
 * its cap. Joints at their cap take their whole budget. Returns angles and shares.
 */
inline void water_fill(double D, const std::vector<double>& caps, double ratio,
                       const std::vector<bool>& active, const ChordFn& chord,
                       std::vector<double>& angles, std::vector<double>& shares,
                       std::vector<double>& budget, std::vector<bool>& saturated,
                       double& remainder) {
    const std::size_t n = caps.size();
    angles.assign(n, 0.0);
    shares.assign(n, 0.0);
    budget.assign(n, 0.0);
    saturated.assign(n, false);
    remainder = 0.0;

    std::vector<double> x0(n), weight(n);
    double t_max = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const int idx = static_cast<int>(i) + 1;
        x0[i] = chord(idx, 0.0);
        weight[i] = std::pow(ratio, static_cast<double>(i));
        if (active[i]) {
            budget[i] = x0[i] - chord(idx, caps[i]);
            t_max = std::max(t_max, caps[i] / weight[i]);
        }
    }
    const double total = exact_sum(budget);

    if (D >= total) {
        for (std::size_t i = 0; i < n; ++i) {
            if (!active[i]) continue;
            angles[i] = caps[i];
            shares[i] = budget[i];
            saturated[i] = true;
        }
        remainder = D - total;
        return;
    }
    if (D <= 0.0) return;

    auto angle_at = [&](std::size_t i, double t) { return std::min(t * weight[i], caps[i]); };
    auto filled = [&](double t) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!active[i]) continue;
            const double a = angle_at(i, t);
            s += (a >= caps[i]) ? budget[i] : x0[i] - chord(static_cast<int>(i) + 1, a);
        }
        return s;
    };
    const double t = bisect_level(filled, D, 0.0, t_max);
    // Upper end of the bracket: the level where D is reached from above.
    double t_hi = t;
    {
        double lo = t, hi = t_max;
        for (int it = 0; it < 400; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            if (filled(mid) < D) lo = mid; else hi = mid;
        }
        t_hi = hi;
    }
    const double level = (D - filled(t) <= filled(t_hi) - D) ? t : t_hi;

    std::vector<bool> fixed(n, true);
    for (std::size_t i = 0; i < n; ++i) {
        if (!active[i]) continue;
        const double a = angle_at(i, level);
        if (a >= caps[i]) {
            angles[i] = caps[i];
            shares[i] = budget[i];
            saturated[i] = true;
        } else {
            angles[i] = a;
            shares[i] = x0[i] - chord(static_cast<int>(i) + 1, a);
            fixed[i] = false;
        }
    }
    settle_sum(shares, fixed, D);
}

inline void require_nonnegative(double d, const char* what) {
    if (!(d >= 0.0)) {
        std::ostringstream os;
        os << what << ": shortening must be >= 0 mm, got " << d;
        throw DomainError(os.str());
    }
}

inline BendDistribution distribute(const ManipulatorSpec& spec, double D, double direction,
                                   const ChordFn& chord) {
    const std::size_t n = static_cast<std::size_t>(spec.joint_count());
    BendDistribution out;
    out.direction = direction;
    out.axis = bend_axis(direction);
    std::vector<double> caps(n, spec.joint_limit);
    std::vector<bool> active(n, true);
    water_fill(D, caps, spec.angle_ratio(), active, chord, out.angles, out.shortening,
               out.budget, out.saturated, out.remainder);
    out.new_chord.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.new_chord[i] = chord(static_cast<int>(i) + 1, 0.0) - out.shortening[i];
    }
    return out;
}

}  // namespace detail

/**
 * Normalised share of a cable shortening per joint, for angle increments
 * base_angle * ratio^(i-1). base_angle = 0 gives the small-angle limit.
 */
inline std::vector<double> bend_portions(const ManipulatorSpec& spec, double base_angle = 0.0) {
    const int n = spec.joint_count();
    const double ratio = spec.angle_ratio();
    const double half = 0.5 * spec.joint_limit;
    std::vector<double> dx(static_cast<std::size_t>(n));
    for (int i = 1; i <= n; ++i) {
        const auto& j = spec.joint(i);
        const double w = std::pow(ratio, i - 1);
        if (base_angle > 0.0) {
            const double a = std::min(base_angle * w, spec.joint_limit);
            dx[static_cast<std::size_t>(i - 1)] =
                chord_from_angle(j.hole_radius, spec.joint_limit) -
                chord_from_angle(j.hole_radius, spec.joint_limit - a);
        } else {
            dx[static_cast<std::size_t>(i - 1)] = j.hole_radius * std::cos(half) * w;
        }
    }
    double total = 0.0;
    for (double v : dx) total += std::abs(v);
    for (double& v : dx) v /= total;
    return dx;
}

/// Algorithm-1 bending: share D of one cable's shortening over the joints.
inline BendDistribution distribute_bend(const ManipulatorSpec& spec, Cable cable, double D) {
    detail::require_nonnegative(D, "bend");
    const double direction = spec.cable_angle(cable);
    const Eigen::Vector3d axis = bend_axis(direction);
    auto chord = [&spec, cable, axis](int i, double beta) {
        return cable_chord(spec, i, cable, Eigen::AngleAxisd(beta, axis).toRotationMatrix());
    };
    return detail::distribute(spec, D, direction, chord);
}

/// Equal shortening D of two cables: planar bend toward their bisector.
inline BendDistribution distribute_pair_bend(const ManipulatorSpec& spec, Cable c1, Cable c2,
                                             double D) {
    detail::require_nonnegative(D, "pair bend");
    if (c1 == c2) throw DomainError("pair bend: cables must differ");
    const double a1 = spec.cable_angle(c1);
    const double a2 = spec.cable_angle(c2);
    const double direction = std::atan2(std::sin(a1) + std::sin(a2), std::cos(a1) + std::cos(a2));
    const Eigen::Vector3d axis = bend_axis(direction);
    auto chord = [&spec, c1, axis](int i, double beta) {
        return cable_chord(spec, i, c1, Eigen::AngleAxisd(beta, axis).toRotationMatrix());
    };
    auto out = detail::distribute(spec, D, direction, chord);
    return out;
}

/// Chain joint rotations into frames: translate along link i, then rotate at joint i.
inline BackboneShape forward_shape(const ManipulatorSpec& spec,
                                   const std::vector<Eigen::Matrix3d>& joint_rotations) {
    if (static_cast<int>(joint_rotations.size()) != spec.joint_count()) {
        throw DomainError("forward_shape: need one rotation per joint");
    }
    BackboneShape shape;
    Eigen::Matrix4d frame = Eigen::Matrix4d::Identity();
    shape.frames.push_back(frame);
    for (std::size_t i = 0; i < spec.sections.size(); ++i) {
        Eigen::Matrix4d step = Eigen::Matrix4d::Identity();
        step(0, 3) = spec.sections[i].link_length;
        if (i < joint_rotations.size()) step.block<3, 3>(0, 0) = joint_rotations[i];
        frame = frame * step;
        shape.frames.push_back(frame);
    }
    shape.joint_angles.reserve(joint_rotations.size());
    for (const auto& r : joint_rotations) shape.joint_angles.push_back(Eigen::AngleAxisd(r).angle());
    return shape;
}

inline BackboneShape forward_shape(const ManipulatorSpec& spec, const JointConfiguration& config) {
    auto shape = forward_shape(spec, config.rotations());
    for (std::size_t i = 0; i < config.joints.size(); ++i) {
        shape.joint_angles[i] = config.joints[i].bend_angle;
    }
    return shape;
}

/// Planar shape: every joint rotates about the same axis (curling toward direction psi).
inline BackboneShape forward_shape(const ManipulatorSpec& spec, const std::vector<double>& angles,
                                   double psi = 3.0 * kPi / 2.0) {
    JointConfiguration c;
    for (double a : angles) c.joints.push_back({a, bend_axis(psi), a >= spec.joint_limit});
    return forward_shape(spec, c);
}

/// Result of two-cable actuation.
struct TwistResult {
    JointConfiguration config;
    BendDistribution stage1;
    std::vector<double> twist_angles;  ///< stage-2 rotation about BE, radians
    std::vector<double> theta_max;     ///< stage-2 rotation cap per joint, radians
    std::vector<double> shortening2;   ///< cable-2 chord shortening per joint, mm
    std::vector<double> budget2;
    double remainder2 = 0.0;
    int free_joints = 0;  ///< m: joints above m were saturated by the first cable
    bool symmetric = false;  ///< equal shortening handled as a planar pair bend

    double distributed2() const { return detail::exact_sum(shortening2); }
};

namespace detail {

// Rim-contact margin of link i+1's face against link i's face: < 0 means overlap.
inline double rim_clearance(const JointSpec& j, const Eigen::Matrix3d& r) {
    return r(0, 0) * j.half_gap - j.hole_offset * std::hypot(r(0, 1), r(0, 2)) + j.half_gap;
}

struct TwistJoint {
    Eigen::Vector3d axis2;
    Eigen::Matrix3d stage1;
    double sign = 0.0;
    double cap = 0.0;
};

inline TwistJoint twist_joint(const ManipulatorSpec& spec, int i, Cable c1, Cable c2, double beta,
                              const Eigen::Vector3d& axis1) {
    const auto& j = spec.joint(i);
    TwistJoint tj;
    const Eigen::Vector3d b = -j.half_gap * Eigen::Vector3d::UnitX() +
                              j.hole_offset * radial_direction(spec.cable_angle(c1));
    tj.axis2 = (-b).normalized();
    tj.stage1 = Eigen::AngleAxisd(beta, axis1).toRotationMatrix();

    auto rot = [&](double g) {
        return (Eigen::AngleAxisd(g, tj.axis2).toRotationMatrix() * tj.stage1).eval();
    };
    auto chord2 = [&](double g) { return cable_chord(spec, i, c2, rot(g)); };

    const double c0 = chord2(0.0);
    constexpr double probe = 1e-6;
    if (chord2(probe) < c0) tj.sign = 1.0;
    else if (chord2(-probe) < c0) tj.sign = -1.0;
    else return tj;

    auto clearance = [&](double g) { return rim_clearance(j, rot(tj.sign * g)); };
    auto chord_s = [&](double g) { return chord2(tj.sign * g); };
    if (clearance(probe) < 0.0) return tj;

    constexpr double step = kPi / 720.0;
    double cap = kPi;
    double prev = 0.0;
    double prev_chord = c0;
    for (double g = step; g <= kPi + 1e-12; g += step) {
        const double cl = clearance(g);
        const double ch = chord_s(g);
        if (cl < 0.0) {
            double lo = prev, hi = g;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (mid <= lo || mid >= hi) break;
                if (clearance(mid) < 0.0) hi = mid; else lo = mid;
            }
            cap = lo;
            break;
        }
        if (ch >= prev_chord) {
            // Chord passed its minimum between prev - step and g.
            double lo = std::max(0.0, prev - step), hi = g;
            const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
            for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
                const double m1 = hi - phi * (hi - lo);
                const double m2 = lo + phi * (hi - lo);
                if (chord_s(m1) < chord_s(m2)) hi = m2; else lo = m1;
            }
            cap = 0.5 * (lo + hi);
            break;
        }
        prev = g;
        prev_chord = ch;
    }
    tj.cap = cap;
    return tj;
}

}  // namespace detail

/**
 * Algorithm-2 twisting. The first cable bends via distribute_bend; the second
 * rotates the joints at or below m about their BE axes, sharing D2 with the
 * same angle pattern and clamping each joint where its link rims touch.
 */
inline TwistResult apply_twist(const ManipulatorSpec& spec, Cable c1, double D1, Cable c2,
                               double D2) {
    detail::require_nonnegative(D1, "twist (cable 1)");
    detail::require_nonnegative(D2, "twist (cable 2)");
    if (c1 == c2) throw DomainError("twist: cables must differ");

    const std::size_t n = static_cast<std::size_t>(spec.joint_count());
    TwistResult out;
    out.twist_angles.assign(n, 0.0);
    out.theta_max.assign(n, 0.0);
    out.shortening2.assign(n, 0.0);
    out.budget2.assign(n, 0.0);

    if (D1 == D2) {
        out.symmetric = true;
        out.stage1 = distribute_pair_bend(spec, c1, c2, D1);
        out.config = out.stage1.configuration();
        out.free_joints = spec.joint_count();
        out.shortening2 = out.stage1.shortening;
        out.budget2 = out.stage1.budget;
        out.remainder2 = out.stage1.remainder;
        return out;
    }

    out.stage1 = distribute_bend(spec, c1, D1);
    out.config = out.stage1.configuration();

    int m = spec.joint_count();
    while (m >= 1 && out.stage1.saturated[static_cast<std::size_t>(m - 1)]) --m;
    out.free_joints = m;
    if (D2 == 0.0 || m == 0) {
        // Nothing to twist: the shape is the plain bend, bit for bit.
        out.remainder2 = D2;
        return out;
    }

    std::vector<detail::TwistJoint> tj;
    tj.reserve(n);
    std::vector<bool> active(n, false);
    std::vector<double> caps(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const int idx = static_cast<int>(i) + 1;
        if (idx <= m) {
            tj.push_back(detail::twist_joint(spec, idx, c1, c2, out.stage1.angles[i], out.stage1.axis));
            active[i] = tj.back().sign != 0.0 && tj.back().cap > 0.0;
            caps[i] = tj.back().cap;
        } else {
            tj.push_back({});
        }
    }
    auto chord = [&](int idx, double g) {
        const auto& t = tj[static_cast<std::size_t>(idx - 1)];
        const Eigen::Matrix3d r =
            Eigen::AngleAxisd(t.sign * g, t.axis2).toRotationMatrix() * t.stage1;
        return cable_chord(spec, idx, c2, r);
    };
    std::vector<bool> sat2;
    detail::water_fill(D2, caps, spec.angle_ratio(), active, chord, out.twist_angles,
                       out.shortening2, out.budget2, sat2, out.remainder2);
    out.theta_max = caps;

    for (std::size_t i = 0; i < n; ++i) {
        const double g = out.twist_angles[i];
        if (g == 0.0) continue;
        const Eigen::Matrix3d r =
            Eigen::AngleAxisd(tj[i].sign * g, tj[i].axis2).toRotationMatrix() * tj[i].stage1;
        const Eigen::AngleAxisd aa(r);
        auto& js = out.config.joints[i];
        js.bend_angle = aa.angle();
        js.axis = aa.axis();
        js.saturated = js.saturated || sat2[i];
    }
    return out;
}

/// Rotation matrix per joint for a command (single cable, twist, or equal pair).
inline JointConfiguration configuration_for(const ManipulatorSpec& spec,
                                            const ActuationCommand& cmd) {
    cmd.validate();
    if (cmd.cable2) return apply_twist(spec, cmd.cable, cmd.shorten, *cmd.cable2, cmd.shorten2).config;
    return distribute_bend(spec, cmd.cable, cmd.shorten).configuration();
}

/// Total hole-to-hole chord length of each cable across all joints, mm.
inline std::array<double, 3> passive_cable_lengths(const ManipulatorSpec& spec,
                                                   const JointConfiguration& config) {
    std::array<double, 3> total{0.0, 0.0, 0.0};
    const auto rots = config.rotations();
    for (Cable c : kAllCables) {
        double s = 0.0;
        for (int i = 1; i <= spec.joint_count(); ++i) {
            s += cable_chord(spec, i, c, rots[static_cast<std::size_t>(i - 1)]);
        }
        total[static_cast<std::size_t>(index_of(c))] = s;
    }
    return total;
}

/// Gravity rest rotations composed with actuation rotations (rest first) per joint.
inline std::vector<Eigen::Matrix3d> compose_rotations(const RestState& rest,
                                                      const JointConfiguration& act) {
    if (rest.joint_angles.size() != act.joints.size()) {
        throw DomainError("actuate: rest state and configuration disagree on joint count");
    }
    const Eigen::Vector3d rest_axis = bend_axis(rest.bend_direction);
    std::vector<Eigen::Matrix3d> r;
    r.reserve(act.joints.size());
    for (std::size_t i = 0; i < act.joints.size(); ++i) {
        const double th = rest.joint_angles[i];
        const Eigen::Matrix3d act_r = act.joints[i].rotation();
        if (th == 0.0) {
            r.push_back(act_r);
        } else {
            r.push_back(Eigen::AngleAxisd(th, rest_axis).toRotationMatrix() * act_r);
        }
    }
    return r;
}

/// Shape in the base frame for a command applied on top of a gravity rest state.
inline BackboneShape actuate_from_rest(const ManipulatorSpec& spec, const RestState& rest,
                                       const ActuationCommand& cmd) {
    const auto act = configuration_for(spec, cmd);
    return forward_shape(spec, compose_rotations(rest, act));
}

}  // namespace spirokin
