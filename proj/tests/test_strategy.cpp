#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "spirokin/strategy.hpp"

using namespace spirokin;
using Catch::Matchers::ContainsSubstring;

namespace {

const ManipulatorSpec& trunk() {
    static const ManipulatorSpec s = build_spec(discretize_profile(solve_design_parameters({})), {});
    return s;
}

double arm_length(const ManipulatorSpec& s) {
    double l = 0.0;
    for (const auto& sec : s.sections) l += sec.link_length;
    return l;
}

// Distance of the farthest point from the best plane, via the smallest
// eigenvalue direction of the scatter matrix.
double plane_distance(const std::vector<Eigen::Vector3d>& pts) {
    Eigen::Vector3d c = Eigen::Vector3d::Zero();
    for (const auto& p : pts) c += p;
    c /= static_cast<double>(pts.size());
    Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
    for (const auto& p : pts) scatter += (p - c) * (p - c).transpose();
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(scatter);
    const Eigen::Vector3d n = eig.eigenvectors().col(0);
    double worst = 0.0;
    for (const auto& p : pts) worst = std::max(worst, std::abs((p - c).dot(n)));
    return worst;
}

// Indices of the joints held at the limit by a keyframe command.
std::vector<bool> saturated_joints(const Keyframe& k) {
    std::vector<bool> out;
    for (const auto& j : configuration_for(trunk(), k.command).joints) out.push_back(j.saturated);
    return out;
}

// True when the saturated joints form one block that ends at the tip.
bool distal_block(const std::vector<bool>& sat) {
    auto first = std::find(sat.begin(), sat.end(), true);
    return std::all_of(first, sat.end(), [](bool b) { return b; });
}

json keyframe_json(const std::string& phase, double aperture) {
    return {{"phase", phase},
            {"base_pose", {{"position_mm", {0, 0, 0}}, {"rpy_deg", {0, 0, 0}}}},
            {"command", {{"cable", "dorsal"}, {"shorten_mm", 0.0}}},
            {"aperture", aperture}};
}

json script_json() {
    return {{"name", "probe"},
            {"provenance", "test"},
            {"class", "bending"},
            {"object_size_mm", {1, 2}},
            {"keyframes", json::array({keyframe_json("reaching", 1.0)})}};
}

}  // namespace

TEST_CASE("all nine strategies load", "[strategy]") {
    const auto all = load_strategies();
    const std::set<std::string> expect{"tip_pinch",          "tip_grip", "distal_wrap_vertical",
                                       "twist_wrap_oblique", "twist_wrap_horizontal",
                                       "trunk_kick",         "sweep",    "distal_flip_transport",
                                       "release_propagation"};
    std::set<std::string> names;
    for (const auto& [n, s] : all) {
        names.insert(n);
        CHECK(!s.provenance.empty());
        CHECK(s.object_size_mm[0] <= s.object_size_mm[1]);
        // Phases appear in task order.
        int last = 0;
        for (const auto& k : s.keyframes) {
            const int at = static_cast<int>(std::find(kPhases.begin(), kPhases.end(), k.phase) - kPhases.begin());
            CHECK(at >= last);
            last = at;
        }
    }
    CHECK(names == expect);
}

TEST_CASE("playback shapes per strategy class", "[strategy][playback]") {
    const auto& s = trunk();
    const double len = arm_length(s);
    for (const auto& [name, script] : load_strategies()) {
        INFO(name);
        const auto frames = playback(script, s);
        REQUIRE(frames.size() == script.keyframes.size());
        double worst = 0.0;
        for (const auto& f : frames) {
            REQUIRE(f.shape.frames.size() == s.sections.size() + 1);
            worst = std::max(worst, plane_distance(f.shape.points()));
            // The library metric agrees with the eigen-based one.
            CHECK(std::abs(planarity_residual(f.shape.points()) - plane_distance(f.shape.points())) < 1e-9 * len);
        }
        if (script.cls == StrategyClass::bending) {
            CHECK(worst < 1e-6 * len);
        } else {
            CHECK(worst > 0.05 * len);
        }
    }
}

TEST_CASE("transport engages inward and release unwinds", "[strategy][propagation]") {
    for (const auto& [name, script] : load_strategies()) {
        INFO(name);
        const auto frames = playback(script, trunk());
        std::vector<int> transport, release;
        for (const auto& f : frames) {
            if (f.phase == "transport") transport.push_back(f.saturated_joints);
            if (f.phase == "release") release.push_back(f.saturated_joints);
        }
        CHECK(std::is_sorted(transport.begin(), transport.end()));
        CHECK(std::is_sorted(release.rbegin(), release.rend()));
        if (!transport.empty() && !release.empty()) CHECK(release.front() <= transport.back());
    }
}

TEST_CASE("distal wrap curls from the tip", "[strategy][propagation]") {
    const auto script = get_strategy("distal_wrap_vertical");
    int prev = 0;
    bool grew = false;
    for (const auto& k : script.keyframes) {
        const auto sat = saturated_joints(k);
        CHECK(distal_block(sat));
        const int n = static_cast<int>(std::count(sat.begin(), sat.end(), true));
        if (k.phase == "prehension" || k.phase == "transport") {
            CHECK(n >= prev);
            grew = grew || n > prev;
            prev = n;
        }
    }
    CHECK(grew);

    // Releasing lets go of the proximal joints first.
    const auto rel = get_strategy("release_propagation");
    for (const auto& k : rel.keyframes) CHECK(distal_block(saturated_joints(k)));
}

TEST_CASE("twisting scripts use a second cable", "[strategy]") {
    for (const auto* name : {"twist_wrap_horizontal", "twist_wrap_oblique"}) {
        const auto script = get_strategy(name);
        CHECK(script.cls == StrategyClass::twisting);
        const bool twisted = std::any_of(script.keyframes.begin(), script.keyframes.end(), [](const Keyframe& k) {
            return k.command.cable2 && k.command.shorten2 > 0.0 && k.command.shorten2 != k.command.shorten;
        });
        CHECK(twisted);
    }
}

TEST_CASE("unknown strategy lists the available names", "[strategy]") {
    try {
        get_strategy("foo");
        FAIL("expected an error");
    } catch (const DomainError& e) {
        CHECK_THAT(e.what(), ContainsSubstring("foo"));
        CHECK_THAT(e.what(), ContainsSubstring("tip_pinch"));
        CHECK_THAT(e.what(), ContainsSubstring("release_propagation"));
    }
}

TEST_CASE("zero command with identity base plays back the rest shape", "[strategy][playback]") {
    const auto& s = trunk();
    const auto script = strategy_from_json(script_json());
    const auto frames = playback(script, s);
    REQUIRE(frames.size() == 1);
    CHECK(frames[0].saturated_joints == 0);

    // Horizontal base with z up: the arm sags downward in the x-z plane.
    const auto rest = solve_rest_shape(s, 0.0);
    std::vector<Eigen::Vector3d> expect{Eigen::Vector3d::Zero()};
    double phi = 0.0;
    for (std::size_t i = 0; i < s.sections.size(); ++i) {
        const double l = s.sections[i].link_length;
        expect.push_back(expect.back() + l * Eigen::Vector3d(std::cos(phi), 0.0, -std::sin(phi)));
        if (i < rest.joint_angles.size()) phi += rest.joint_angles[i];
    }
    const auto pts = frames[0].shape.points();
    REQUIRE(pts.size() == expect.size());
    for (std::size_t i = 0; i < pts.size(); ++i) CHECK((pts[i] - expect[i]).norm() < 1e-9);
    CHECK(expect.back().z() < -10.0);
}

TEST_CASE("base pose moves the shape rigidly", "[strategy][playback]") {
    auto j = script_json();
    j["keyframes"][0]["command"] = {{"cable", "dorsal"}, {"shorten_mm", 15.0}};
    const auto a = playback(strategy_from_json(j), trunk());
    j["keyframes"][0]["base_pose"]["position_mm"] = {100.0, -20.0, 350.0};
    const auto b = playback(strategy_from_json(j), trunk());
    const auto pa = a[0].shape.points(), pb = b[0].shape.points();
    for (std::size_t i = 0; i < pa.size(); ++i) {
        CHECK((pb[i] - pa[i] - Eigen::Vector3d(100.0, -20.0, 350.0)).norm() < 1e-9);
    }
}

TEST_CASE("malformed scripts are rejected", "[strategy]") {
    auto j = script_json();
    CHECK_NOTHROW(strategy_from_json(j));

    auto bad = j;
    bad["keyframes"][0]["aperture"] = 1.5;
    CHECK_THROWS_AS(strategy_from_json(bad), DomainError);
    bad = j;
    bad["keyframes"][0]["phase"] = "chewing";
    CHECK_THROWS_AS(strategy_from_json(bad), DomainError);
    bad = j;
    bad["class"] = "suction";
    CHECK_THROWS_AS(strategy_from_json(bad), DomainError);
    bad = j;
    bad["keyframes"] = json::array();
    CHECK_THROWS_AS(strategy_from_json(bad), DomainError);
    bad = j;
    bad["keyframes"][0]["command"]["shorten_mm"] = -1.0;
    CHECK_THROWS_AS(strategy_from_json(bad), DomainError);
    bad = j;
    bad["keyframes"][0]["command"]["cable"] = "lateral";
    CHECK_THROWS_AS(strategy_from_json(bad), DomainError);
    bad = j;
    bad.erase("provenance");
    CHECK_THROWS_AS(strategy_from_json(bad), DomainError);
    bad = j;
    bad["keyframes"][0]["base_pose"]["rpy_deg"] = {0, 0};
    CHECK_THROWS_AS(strategy_from_json(bad), DomainError);
}
