#pragma once
/**
 * @file spiral.hpp
 * @brief Logarithmic-spiral design geometry shared by the trunk and the tip gripper.
 *
 * The outer contour is r = a e^{b theta}, written in Cartesian form as
 * (-a e^{b theta} cos theta, a e^{b theta} sin theta). The inner contour is the
 * outer one scaled by k. The region between them, cut every delta_theta, gives
 * the cross-sections of the manipulator links.
 */

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <boost/math/tools/toms748_solve.hpp>

#include "spirokin/errors.hpp"

namespace spirokin {

inline constexpr double kPi = std::numbers::pi;

inline constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

struct SpiralParams {
    double a = 1.0;
    double b = 0.0;
    double k = 0.5;
    double delta_theta = kPi / 6.0;
    double theta_start = kPi / 2.0;
    double theta_end = 7.0 * kPi / 2.0;

    /// Number of cross-sections between theta_start and theta_end.
    int section_count() const {
        const double steps = (theta_end - theta_start) / delta_theta;
        return static_cast<int>(std::lround(steps));
    }

    /// Adjacent-section similarity ratio e^{-b delta_theta}.
    double section_ratio() const { return std::exp(-b * delta_theta); }

    void validate() const {
        if (!(a > 0.0)) throw DomainError("spiral: a must be positive");
        if (!(b >= 0.0)) throw DomainError("spiral: b must be non-negative");
        if (!(k > 0.0 && k < 1.0)) throw DomainError("spiral: k must lie in (0, 1)");
        if (!(delta_theta > 0.0)) throw DomainError("spiral: delta_theta must be positive");
        if (!(theta_end > theta_start)) throw DomainError("spiral: empty theta range");
        const double steps = (theta_end - theta_start) / delta_theta;
        if (std::abs(steps - std::round(steps)) > 1e-9 || std::round(steps) < 1.0) {
            throw DomainError("spiral: theta span is not an integer multiple of delta_theta");
        }
    }

    static SpiralParams trunk_defaults() { return {}; }

    /// Finger profile: golden-ratio growth, 60 degree steps over one turn.
    static SpiralParams gripper_defaults() {
        SpiralParams p;
        p.b = 0.618;
        p.k = 0.5 + 0.5 * std::exp(-2.0 * 0.618 * kPi);
        p.delta_theta = kPi / 3.0;
        p.theta_start = kPi / 2.0;
        p.theta_end = kPi / 2.0 + 2.0 * kPi;
        return p;
    }
};

struct DesignConstraints {
    double m = 1.53;          ///< gripper-max to gripper-base ratio
    double r_rigid = 31.5;    ///< rigid arm end-link radius, mm
    double r_soft = 0.0;      ///< base radius in spiral units; 0 = derive from the solved profile
    double delta_theta = kPi / 6.0;
    double theta_start = kPi / 2.0;
    double theta_end = 7.0 * kPi / 2.0;
};

struct DiscreteProfile {
    SpiralParams params;
    /// Per section, proximal to distal: A (outer, proximal cut), B (outer, distal cut),
    /// C (inner, distal cut), D (inner, proximal cut). Section 0 is the base.
    std::vector<std::array<Eigen::Vector2d, 4>> cross_sections;
    double k_p = 1.0;

    std::size_t size() const { return cross_sections.size(); }
};

struct GraspRange {
    double hj = 0.0;           ///< minimum graspable size of the body, mm
    double gh = 0.0;           ///< gripper base width, mm
    double gripper_max = 0.0;  ///< m * gh
    double overlap = 0.0;      ///< gripper_max - hj
};

namespace detail {

inline Eigen::Vector2d outer_point(const SpiralParams& p, double theta) {
    const double r = p.a * std::exp(p.b * theta);
    return {-r * std::cos(theta), r * std::sin(theta)};
}

// Homothetic inner contour k * P(theta); this is the contour that encloses the
// body together with the outer one.
inline Eigen::Vector2d inner_point(const SpiralParams& p, double theta) {
    return p.k * outer_point(p, theta);
}

}  // namespace detail

/**
 * Point on the design spiral at polar angle theta, in mm.
 * With @p scaled the coordinates are multiplied componentwise by (-k, k).
 */
inline Eigen::Vector2d spiral_point(const SpiralParams& p, double theta, bool scaled) {
    constexpr double slack = 1e-12;
    if (theta < p.theta_start - slack || theta > p.theta_end + slack) {
        std::ostringstream os;
        os << "spiral_point: theta " << theta << " outside [" << p.theta_start << ", "
           << p.theta_end << "]";
        throw DomainError(os.str());
    }
    Eigen::Vector2d pt = detail::outer_point(p, theta);
    if (scaled) {
        pt.x() *= -p.k;
        pt.y() *= p.k;
    }
    return pt;
}

/// Left-hand side of the gripper-overlap equation once k has been eliminated.
inline double overlap_equation(double b) {
    const double k = 0.5 + 0.5 * std::exp(-2.0 * kPi * b);
    return (std::exp(-2.0 * kPi * b) + std::exp(-kPi * b)) / (2.0 * (1.0 - k));
}

/// Residuals of the two design equations (compactness, overlap) at (b, k).
inline std::array<double, 2> design_residuals(double b, double k, double m) {
    return {k - (0.5 + 0.5 * std::exp(-2.0 * b * kPi)),
            (std::exp(-2.0 * kPi * b) + std::exp(-kPi * b)) / (2.0 * (1.0 - k)) - m};
}

/**
 * Solve the compactness and overlap constraints for (b, k), then fix the scale a
 * from the rigid-arm radius. Bracketed solve on b over [1e-4, 2].
 */
inline SpiralParams solve_design_parameters(const DesignConstraints& c) {
    if (!(c.m > 1.0)) throw DomainError("design: m must exceed 1");
    if (!(c.r_rigid > 0.0)) throw DomainError("design: r_rigid must be positive");

    constexpr double lo = 1e-4;
    constexpr double hi = 2.0;
    auto f = [&](double b) { return overlap_equation(b) - c.m; };
    const double f_lo = f(lo);
    const double f_hi = f(hi);
    if (f_lo * f_hi > 0.0) {
        std::ostringstream os;
        os << "design: no root for m=" << c.m << " in b bracket [" << lo << ", " << hi
           << "], residuals " << f_lo << ", " << f_hi;
        throw SolverError(os.str(), {f_lo, f_hi});
    }

    std::uintmax_t max_iter = 200;
    const auto bracket = boost::math::tools::toms748_solve(
        f, lo, hi, f_lo, f_hi, boost::math::tools::eps_tolerance<double>(52), max_iter);
    double b = 0.5 * (bracket.first + bracket.second);
    if (std::abs(f(bracket.first)) < std::abs(f(b))) b = bracket.first;
    if (std::abs(f(bracket.second)) < std::abs(f(b))) b = bracket.second;

    SpiralParams p;
    p.b = b;
    p.k = 0.5 + 0.5 * std::exp(-2.0 * b * kPi);
    p.delta_theta = c.delta_theta;
    p.theta_start = c.theta_start;
    p.theta_end = c.theta_end;

    const auto res = design_residuals(p.b, p.k, c.m);
    if (std::abs(res[0]) >= 1e-10 || std::abs(res[1]) >= 1e-10) {
        throw SolverError("design: residual above 1e-10 after bracketed solve",
                          {res[0], res[1]});
    }

    // Base radius of the unit spiral: width of the outermost cut.
    const double r_soft =
        c.r_soft > 0.0 ? c.r_soft : (1.0 - p.k) * std::exp(p.b * p.theta_end);
    p.a = c.r_rigid / r_soft;
    p.validate();
    return p;
}

/// Max deviation of the inner contour from the midpoint of two successive outer loops, mm.
inline double compactness_residual(const SpiralParams& p, int grid_points = 1000) {
    double worst = 0.0;
    for (int i = 0; i < grid_points; ++i) {
        const double t = static_cast<double>(i) / (grid_points - 1);
        const double theta = p.theta_start + t * (p.theta_end - p.theta_start);
        const double y_inside =
            p.a * std::exp(p.b * (theta - 2.0 * kPi)) * std::sin(theta - 2.0 * kPi);
        const double y_outside = p.a * std::exp(p.b * theta) * std::sin(theta);
        const double y_k = p.k * p.a * std::exp(p.b * theta) * std::sin(theta);
        worst = std::max(worst, std::abs(y_k - 0.5 * (y_inside + y_outside)));
    }
    return worst;
}

/// Chord widths at theta_start: across the centre (HJ) and across one full turn (GH).
inline GraspRange grasp_range(const SpiralParams& p, double m) {
    const double t0 = p.theta_start;
    GraspRange g;
    g.hj = (detail::outer_point(p, t0) - detail::outer_point(p, t0 + kPi)).norm();
    g.gh = (detail::outer_point(p, t0) - detail::outer_point(p, t0 + 2.0 * kPi)).norm();
    g.gripper_max = m * g.gh;
    g.overlap = g.gripper_max - g.hj;
    return g;
}

/// Cut the region between the contours every delta_theta, base (largest) section first.
inline DiscreteProfile discretize_profile(const SpiralParams& p) {
    p.validate();
    DiscreteProfile prof;
    prof.params = p;
    prof.k_p = p.section_ratio();
    const int n = p.section_count();
    prof.cross_sections.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double th_prox = p.theta_end - i * p.delta_theta;
        const double th_dist = p.theta_end - (i + 1) * p.delta_theta;
        prof.cross_sections.push_back({detail::outer_point(p, th_prox),
                                       detail::outer_point(p, th_dist),
                                       detail::inner_point(p, th_dist),
                                       detail::inner_point(p, th_prox)});
    }
    return prof;
}

struct TriangleMesh {
    std::vector<Eigen::Vector3d> vertices;
    std::vector<std::array<int, 3>> faces;  // zero-based
};

/// Revolve each section's quadrilateral about its inner-contour edge (D -> C).
inline TriangleMesh revolve_profile(const DiscreteProfile& prof, int segments = 32) {
    if (segments < 3) throw DomainError("mesh: need at least 3 segments");
    TriangleMesh mesh;
    auto lift = [](const Eigen::Vector2d& v) { return Eigen::Vector3d(v.x(), v.y(), 0.0); };

    for (const auto& q : prof.cross_sections) {
        const Eigen::Vector3d a = lift(q[0]), b = lift(q[1]), c = lift(q[2]), d = lift(q[3]);
        const Eigen::Vector3d axis = (c - d).normalized();
        const int base = static_cast<int>(mesh.vertices.size());
        for (int s = 0; s < segments; ++s) {
            const Eigen::AngleAxisd rot(2.0 * kPi * s / segments, axis);
            mesh.vertices.push_back(d + rot * (a - d));
        }
        for (int s = 0; s < segments; ++s) {
            const Eigen::AngleAxisd rot(2.0 * kPi * s / segments, axis);
            mesh.vertices.push_back(c + rot * (b - c));
        }
        mesh.vertices.push_back(d);
        mesh.vertices.push_back(c);
        const int cap_prox = base + 2 * segments;
        const int cap_dist = cap_prox + 1;
        for (int s = 0; s < segments; ++s) {
            const int s1 = (s + 1) % segments;
            const int a0 = base + s, a1 = base + s1;
            const int b0 = base + segments + s, b1 = base + segments + s1;
            mesh.faces.push_back({a0, b0, b1});
            mesh.faces.push_back({a0, b1, a1});
            mesh.faces.push_back({cap_prox, a1, a0});
            mesh.faces.push_back({cap_dist, b0, b1});
        }
    }
    return mesh;
}

}  // namespace spirokin
