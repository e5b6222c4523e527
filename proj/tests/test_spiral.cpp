#include <catch_amalgamated.hpp>

#include <cmath>

#include "spirokin/spiral.hpp"

using namespace spirokin;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Independent reduction of the two design equations: with u = e^{-pi b} the
// overlap condition collapses to u / (1 - u) = m.
struct ClosedForm {
    double b, k, kp;
};
ClosedForm closed_form(double m) {
    const double u = m / (1.0 + m);
    const double b = -std::log(u) / M_PI;
    return {b, 0.5 + 0.5 * u * u, std::pow(u, 1.0 / 6.0)};
}

SpiralParams unit_params(double b, double k) {
    SpiralParams p;
    p.a = 1.0;
    p.b = b;
    p.k = k;
    return p;
}

}  // namespace

TEST_CASE("spiral_point evaluates the logarithmic spiral", "[spiral]") {
    SECTION("b = 0 is the unit circle") {
        auto p = unit_params(0.0, 0.5);
        const auto pt = spiral_point(p, M_PI / 2.0, false);
        CHECK_THAT(pt.x(), WithinAbs(0.0, 1e-15));
        CHECK_THAT(pt.y(), WithinAbs(1.0, 1e-15));
    }
    SECTION("theta = pi lands on the positive x axis") {
        auto p = unit_params(0.37, 0.5);
        const auto pt = spiral_point(p, M_PI, false);
        CHECK_THAT(pt.x(), WithinRel(std::exp(0.37 * M_PI), 1e-14));
        CHECK_THAT(pt.y(), WithinAbs(0.0, 1e-14));
    }
    SECTION("scaled point multiplies by (-k, k)") {
        auto p = unit_params(0.1601, 0.6829);
        const auto pt = spiral_point(p, M_PI / 2.0, true);
        CHECK_THAT(pt.x(), WithinAbs(0.0, 1e-15));
        CHECK_THAT(pt.y(), WithinRel(0.6829 * std::exp(0.1601 * M_PI / 2.0), 1e-14));
    }
    SECTION("polar radius and angle agree with r = a e^{b theta}") {
        auto p = unit_params(0.2, 0.6);
        p.a = 3.5;
        for (double th = p.theta_start; th <= p.theta_end; th += 0.1) {
            const auto pt = spiral_point(p, th, false);
            CHECK_THAT(pt.norm(), WithinRel(3.5 * std::exp(0.2 * th), 1e-13));
            // (-cos, sin) is the direction pi - theta.
            const double ang = std::atan2(pt.y(), pt.x());
            CHECK_THAT(std::cos(ang), WithinAbs(std::cos(M_PI - th), 1e-12));
            CHECK_THAT(std::sin(ang), WithinAbs(std::sin(M_PI - th), 1e-12));
        }
    }
    SECTION("out-of-range theta is a domain error") {
        auto p = unit_params(0.16, 0.68);
        CHECK_THROWS_AS(spiral_point(p, p.theta_start - 0.01, false), DomainError);
        CHECK_THROWS_AS(spiral_point(p, p.theta_end + 0.01, true), DomainError);
    }
}

TEST_CASE("design solve matches the closed-form reduction", "[spiral][design]") {
    for (double m : {1.1, 1.53, 2.0, 3.7, 10.0}) {
        DesignConstraints c;
        c.m = m;
        const auto p = solve_design_parameters(c);
        const auto ref = closed_form(m);
        INFO("m = " << m);
        CHECK_THAT(p.b, WithinAbs(ref.b, 1e-9));
        CHECK_THAT(p.k, WithinAbs(ref.k, 1e-9));
        const auto res = design_residuals(p.b, p.k, m);
        CHECK(std::abs(res[0]) < 1e-10);
        CHECK(std::abs(res[1]) < 1e-10);
    }
}

TEST_CASE("design solve reproduces the trunk similarity ratio", "[spiral][design]") {
    const auto p = solve_design_parameters({});
    CHECK_THAT(p.b, WithinAbs(0.1601, 1e-4));
    CHECK_THAT(p.k, WithinAbs(0.6829, 1e-4));
    CHECK_THAT(std::exp(-p.b * M_PI / 6.0), WithinAbs(0.9196, 1e-3));
    CHECK_THAT(p.section_ratio(), WithinAbs(closed_form(1.53).kp, 1e-12));
}

TEST_CASE("design scale follows the rigid-arm radius", "[spiral][design]") {
    DesignConstraints c;
    c.r_rigid = 40.0;
    const auto p = solve_design_parameters(c);
    const auto prof = discretize_profile(p);
    // Base cut width equals the rigid radius.
    const auto& q = prof.cross_sections.front();
    CHECK_THAT((q[0] - q[3]).norm(), WithinRel(40.0, 1e-12));
}

TEST_CASE("design solve rejects bad constraints", "[spiral][design]") {
    DesignConstraints c;
    c.m = 1.0;
    CHECK_THROWS_AS(solve_design_parameters(c), DomainError);
    c.m = 0.5;
    CHECK_THROWS_AS(solve_design_parameters(c), DomainError);
    c.m = 1.53;
    c.r_rigid = -1.0;
    CHECK_THROWS_AS(solve_design_parameters(c), DomainError);
    // b -> 0 drives k -> 1, which the parameter invariant rejects.
    CHECK_THROWS_AS(unit_params(0.0, 1.0).validate(), DomainError);
}

TEST_CASE("compactness midpoint identity", "[spiral][compactness]") {
    SECTION("solved parameters") {
        const auto p = solve_design_parameters({});
        CHECK(compactness_residual(p, 1000) < 1e-9);
    }
    SECTION("holds for any b with the matching k") {
        for (double b : {0.05, 0.16, 0.3, 0.618}) {
            auto p = unit_params(b, 0.5 + 0.5 * std::exp(-2.0 * b * M_PI));
            p.a = 7.0;
            CHECK(compactness_residual(p, 1000) < 1e-9);
        }
    }
    SECTION("perturbed k breaks it") {
        auto p = solve_design_parameters({});
        p.k += 0.01;
        CHECK(compactness_residual(p, 1000) > 1e-3);
    }
    SECTION("single grid point by direct substitution") {
        const double b = 0.1601, k = 0.6829;
        const double direct = std::abs(k - 0.5 * (std::exp(-2.0 * M_PI * b) + 1.0)) * std::exp(b * M_PI / 2.0);
        CHECK(direct < 1e-4);
    }
}

TEST_CASE("grasp range chords", "[spiral][grasp]") {
    auto p = solve_design_parameters({});
    const double t0 = p.theta_start;
    const auto g = grasp_range(p, 1.53);
    // Opposite points through the origin, and two points on one ray.
    CHECK_THAT(g.hj, WithinRel(p.a * (std::exp(p.b * t0) + std::exp(p.b * (t0 + M_PI))), 1e-12));
    CHECK_THAT(g.gh, WithinRel(p.a * (std::exp(p.b * (t0 + 2 * M_PI)) - std::exp(p.b * t0)), 1e-12));
    CHECK_THAT(g.gripper_max, WithinRel(1.53 * g.gh, 1e-15));

    SECTION("m = 1 gives gripper_max = GH") {
        CHECK(grasp_range(p, 1.0).gripper_max == g.gh);
    }
    SECTION("gripper_max grows with m, HJ does not depend on m") {
        double prev = 0.0;
        for (double m : {1.1, 1.3, 1.53, 2.0}) {
            const auto gm = grasp_range(p, m);
            CHECK(gm.gripper_max > prev);
            CHECK(gm.hj == g.hj);
            prev = gm.gripper_max;
        }
    }
}

TEST_CASE("discretized profile is self-similar", "[spiral][profile]") {
    const auto p = solve_design_parameters({});
    const auto prof = discretize_profile(p);
    REQUIRE(prof.size() == 18);
    CHECK(prof.size() * 4 == 72);
    const double kp = std::exp(-p.b * p.delta_theta);
    CHECK_THAT(prof.k_p, WithinRel(kp, 1e-15));
    for (std::size_t i = 0; i + 1 < prof.size(); ++i) {
        const auto& q0 = prof.cross_sections[i];
        const auto& q1 = prof.cross_sections[i + 1];
        for (int e = 0; e < 4; ++e) {
            const double l0 = (q0[e] - q0[(e + 1) % 4]).norm();
            const double l1 = (q1[e] - q1[(e + 1) % 4]).norm();
            CHECK_THAT(l1 / l0, WithinRel(kp, 1e-12));
        }
    }
    SECTION("doubling a doubles every vertex exactly") {
        auto p2 = p;
        p2.a *= 2.0;
        const auto prof2 = discretize_profile(p2);
        for (std::size_t i = 0; i < prof.size(); ++i) {
            for (int e = 0; e < 4; ++e) CHECK((prof2.cross_sections[i][e] - 2.0 * prof.cross_sections[i][e]).norm() == 0.0);
        }
    }
    SECTION("gripper profile is coarser") {
        const auto g = discretize_profile(SpiralParams::gripper_defaults());
        CHECK(g.size() == 6);
        CHECK(g.size() < prof.size());
    }
}

TEST_CASE("revolved mesh", "[spiral][mesh]") {
    const auto prof = discretize_profile(solve_design_parameters({}));
    const int seg = 16;
    const auto mesh = revolve_profile(prof, seg);
    CHECK(mesh.vertices.size() == prof.size() * (2 * seg + 2));
    CHECK(mesh.faces.size() == prof.size() * 4 * seg);
    for (const auto& f : mesh.faces) {
        for (int v : f) {
            CHECK(v >= 0);
            CHECK(static_cast<std::size_t>(v) < mesh.vertices.size());
        }
    }
    // Ring vertices keep the distance of A from the section axis.
    const auto& q = prof.cross_sections.front();
    const Eigen::Vector3d a(q[0].x(), q[0].y(), 0.0), d(q[3].x(), q[3].y(), 0.0), c(q[2].x(), q[2].y(), 0.0);
    const Eigen::Vector3d axis = (c - d).normalized();
    auto off_axis = [&](const Eigen::Vector3d& v) { return ((v - d) - (v - d).dot(axis) * axis).norm(); };
    const double r = off_axis(a);
    for (int s = 0; s < seg; ++s) CHECK_THAT(off_axis(mesh.vertices[static_cast<std::size_t>(s)]), WithinRel(r, 1e-12));
    CHECK_THROWS_AS(revolve_profile(prof, 2), DomainError);
}
