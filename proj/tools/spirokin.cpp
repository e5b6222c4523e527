// Command-line front end for the spiral manipulator kinematics library.
//
// Exit codes: 0 success, 1 usage error, 2 domain or solver error.

#include <algorithm>
#include <array>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "spirokin/spirokin.hpp"

namespace fs = std::filesystem;
using namespace spirokin;

namespace {

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("spirokin");
    logger->set_pattern("spirokin: %l: %v");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
    if (const char* env = std::getenv("SPIROKIN_LOG")) {
        const std::string v = env;
        if (v == "error") spdlog::set_level(spdlog::level::err);
        else if (v == "warn") spdlog::set_level(spdlog::level::warn);
        else if (v == "info") spdlog::set_level(spdlog::level::info);
        else if (v == "debug") spdlog::set_level(spdlog::level::debug);
        else spdlog::warn("ignoring SPIROKIN_LOG={} (expected error|warn|info|debug)", v);
    }
}

std::string one_line(std::string s) {
    for (char& c : s) {
        if (c == '\n' || c == '\r') c = ' ';
    }
    return s;
}

void emit(const std::string& out, const std::string& content) {
    if (out.empty() || out == "-") {
        std::cout << content;
    } else {
        write_atomic(out, content);
        spdlog::info("wrote {}", out);
    }
}

ManipulatorSpec spec_or_default(const std::string& path) {
    if (!path.empty()) return load_spec(path);
    spdlog::info("no --spec given, using the default trunk design");
    return build_spec(discretize_profile(solve_design_parameters({})), {});
}

std::optional<RestState> rest_for(const ManipulatorSpec& spec, const std::optional<double>& tilt_deg) {
    if (!tilt_deg) return std::nullopt;
    auto rest = solve_rest_shape(spec, deg2rad(*tilt_deg));
    spdlog::info("rest shape at tilt {} deg: {} saturated joints", *tilt_deg, rest.saturated_count());
    return rest;
}

BackboneShape shape_for(const ManipulatorSpec& spec, const std::optional<RestState>& rest,
                        const JointConfiguration& cfg) {
    if (rest) return forward_shape(spec, compose_rotations(*rest, cfg));
    return forward_shape(spec, cfg);
}

std::string two_digit(int i) {
    std::ostringstream os;
    os << (i < 10 ? "0" : "") << i;
    return os.str();
}

// ---- design -----------------------------------------------------------------

struct DesignArgs {
    double m = 1.53;
    double r_rigid = 31.5;
    double delta_theta_deg = 30.0;
    double theta_span_deg = 540.0;
    double density = 1.22;
    double youngs = 16.9;
    double joint_fraction = 0.15;
    double joint_radius_fraction = 0.10;
    std::string out, mesh, spec_out;
};

int run_design(const DesignArgs& a) {
    DesignConstraints c;
    c.m = a.m;
    c.r_rigid = a.r_rigid;
    c.delta_theta = deg2rad(a.delta_theta_deg);
    c.theta_end = c.theta_start + deg2rad(a.theta_span_deg);
    const auto p = solve_design_parameters(c);
    const auto res = design_residuals(p.b, p.k, a.m);
    json j;
    j["params"] = to_json(p);
    j["design_residuals"] = {res[0], res[1]};
    j["compactness_residual_mm"] = compactness_residual(p, 1000);
    j["grasp_range"] = to_json(grasp_range(p, a.m));
    emit(a.out, j.dump(2) + "\n");

    const auto prof = discretize_profile(p);
    if (!a.mesh.empty()) write_atomic(a.mesh, mesh_obj(revolve_profile(prof)));
    if (!a.spec_out.empty()) {
        MaterialConstants mat;
        mat.density = a.density;
        mat.youngs_modulus = a.youngs;
        BuildOptions opt;
        opt.joint_fraction = a.joint_fraction;
        opt.joint_radius_fraction = a.joint_radius_fraction;
        write_atomic(a.spec_out, to_json(build_spec(prof, mat, opt)).dump(2) + "\n");
    }
    return 0;
}

// ---- rest / bend / twist ----------------------------------------------------

struct ShapeArgs {
    std::string spec, out, cable = "dorsal", cable2 = "ventral_right";
    std::optional<double> tilt_deg;
    double d1 = 0.0, d2 = 0.0;
};

int run_rest(const ShapeArgs& a) {
    const auto spec = spec_or_default(a.spec);
    const auto rest = solve_rest_shape(spec, deg2rad(a.tilt_deg.value_or(90.0)));
    JointConfiguration zero;
    zero.joints.assign(static_cast<std::size_t>(spec.joint_count()), JointState{});
    emit(a.out, shape_csv(forward_shape(spec, compose_rotations(rest, zero))));
    return 0;
}

int run_bend(const ShapeArgs& a) {
    const auto spec = spec_or_default(a.spec);
    BendDistribution dist;
    if (a.cable == "ventral_pair") {
        dist = distribute_pair_bend(spec, Cable::ventral_left, Cable::ventral_right, a.d1);
    } else {
        dist = distribute_bend(spec, cable_from_string(a.cable), a.d1);
    }
    if (dist.remainder > 0.0) {
        spdlog::warn("all joints saturated; {} mm of shortening left unused", dist.remainder);
    }
    emit(a.out, shape_csv(shape_for(spec, rest_for(spec, a.tilt_deg), dist.configuration())));
    return 0;
}

int run_twist(const ShapeArgs& a) {
    const auto spec = spec_or_default(a.spec);
    const auto tw = apply_twist(spec, cable_from_string(a.cable), a.d1, cable_from_string(a.cable2), a.d2);
    if (tw.stage1.remainder > 0.0 || tw.remainder2 > 0.0) {
        spdlog::warn("saturation left {} mm (cable 1) and {} mm (cable 2) unused", tw.stage1.remainder,
                     tw.remainder2);
    }
    emit(a.out, shape_csv(shape_for(spec, rest_for(spec, a.tilt_deg), tw.config)));
    return 0;
}

// ---- sweep ------------------------------------------------------------------

struct SweepArgs {
    std::string spec, out_dir = "sweep", cable = "dorsal";
    int steps = 26;
    double step_mm = 5.0;
    std::optional<double> tilt_deg;
};

int run_sweep(const SweepArgs& a) {
    if (a.steps < 1) throw DomainError("sweep: --steps must be >= 1");
    if (!(a.step_mm >= 0.0)) throw DomainError("sweep: --step-mm must be >= 0");
    const auto spec = spec_or_default(a.spec);
    const Cable active = cable_from_string(a.cable);
    const auto rest = rest_for(spec, a.tilt_deg);
    const fs::path dir = a.out_dir;

    std::ostringstream relax, schedule;
    relax << "step,cable,relax_mm\n";
    schedule << "step,cable,shorten_mm\n";
    std::array<double, 3> prev{};
    for (int s = 0; s <= a.steps; ++s) {
        const auto dist = distribute_bend(spec, active, a.step_mm * s);
        const auto cfg = dist.configuration();
        write_atomic(dir / ("step_" + two_digit(s) + ".csv"), shape_csv(shape_for(spec, rest, cfg)));
        const auto len = passive_cable_lengths(spec, cfg);
        if (s > 0) {
            schedule << s << ',' << to_string(active) << ',' << format_double(a.step_mm) << '\n';
            for (Cable c : kAllCables) {
                if (c == active) continue;
                const auto k = static_cast<std::size_t>(index_of(c));
                relax << s << ',' << to_string(c) << ',' << format_double(len[k] - prev[k]) << '\n';
            }
        }
        prev = len;
    }
    write_atomic(dir / "relax.csv", relax.str());
    write_atomic(dir / "schedule.csv", schedule.str());
    return 0;
}

// ---- calibrate --------------------------------------------------------------

struct CalibrateArgs {
    std::string schedule, out;
    std::vector<double> slack;
    int steps = 26;
};

int run_calibrate(const CalibrateArgs& a) {
    if (a.slack.size() != 3) throw DomainError("calibrate: --slack-mm needs three values d,v1,v2");
    SlackModel model;
    model.slack_mm = {a.slack[0], a.slack[1], a.slack[2]};
    model.steps = a.steps;
    model.validate();

    std::istringstream in(read_file(a.schedule));
    std::string line;
    if (!std::getline(in, line) || line != "step,cable,shorten_mm") {
        throw DomainError(a.schedule + ": header must be 'step,cable,shorten_mm'");
    }
    std::ostringstream out;
    out << line << '\n';
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cells = detail::split_csv(line);
        if (cells.size() != 3) throw DomainError(a.schedule + ": bad row " + std::to_string(line_no));
        const int step = detail::parse_number<int>(cells[0], line_no, "step");
        if (step < 1) throw DomainError(a.schedule + ": steps are numbered from 1");
        const Cable cable = cable_from_string(cells[1]);
        const double dl = detail::parse_number<double>(cells[2], line_no, "shorten_mm");
        const double c = compensation_factor(model, cable);
        const double adjusted = dl + c * static_cast<double>(step);
        out << step << ',' << cells[1] << ',' << format_double(adjusted) << '\n';
    }
    write_atomic(a.out.empty() ? a.schedule : a.out, out.str());
    return 0;
}

// ---- strategy ---------------------------------------------------------------

struct StrategyArgs {
    std::string spec, name, out_dir, dir;
    bool list = false;
};

int run_strategy(const StrategyArgs& a) {
    const fs::path dir = a.dir.empty() ? default_strategy_dir() : fs::path(a.dir);
    if (a.list) {
        for (const auto& [name, s] : load_strategies(dir)) {
            std::cout << name << '\t' << (s.cls == StrategyClass::bending ? "bending" : "twisting") << '\t'
                      << s.provenance << '\n';
        }
        return 0;
    }
    if (a.name.empty()) throw CLI::RequiredError("--name");
    if (a.out_dir.empty()) throw CLI::RequiredError("--out");
    const auto script = get_strategy(a.name, dir);
    const auto spec = spec_or_default(a.spec);
    const auto frames = playback(script, spec);

    const fs::path out = a.out_dir;
    json manifest;
    manifest["name"] = script.name;
    manifest["provenance"] = script.provenance;
    manifest["class"] = script.cls == StrategyClass::bending ? "bending" : "twisting";
    manifest["object_size_mm"] = script.object_size_mm;
    manifest["arm_length_mm"] = spec.arm_length();
    manifest["keyframes"] = json::array();
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const auto& f = frames[i];
        const auto& k = script.keyframes[i];
        const std::string file = "keyframe_" + two_digit(static_cast<int>(i)) + ".csv";
        write_atomic(out / file, shape_csv(f.shape));
        manifest["keyframes"].push_back({{"index", i},
                                         {"phase", f.phase},
                                         {"file", file},
                                         {"aperture", f.aperture},
                                         {"finger_curl_fraction", 1.0 - f.aperture},
                                         {"dwell_s", k.dwell_s},
                                         {"saturated_joints", f.saturated_joints},
                                         {"planarity_mm", planarity_residual(f.shape.points())}});
    }
    write_atomic(out / "manifest.json", manifest.dump(2) + "\n");
    return 0;
}

// ---- compare ----------------------------------------------------------------

struct CompareArgs {
    std::string model_dir, mapping, out;
    std::vector<std::string> traces;
    bool per_step = false;
};

int run_compare(const CompareArgs& a) {
    if (a.traces.empty() || a.traces.size() > 2) {
        throw DomainError("compare: give one --trace, or two repeat trials to average");
    }
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(a.model_dir)) {
        const auto name = e.path().filename().string();
        if (name.rfind("step_", 0) == 0 && e.path().extension() == ".csv") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw DomainError("compare: no step_*.csv files in " + a.model_dir);
    std::vector<std::vector<Eigen::Vector3d>> model;
    for (const auto& f : files) model.push_back(read_shape_points(f));

    auto load = [](const std::string& p) {
        std::istringstream in(read_file(p));
        return read_trace(in);
    };
    Trace trace = load(a.traces[0]);
    if (a.traces.size() == 2) trace = average_traces(trace, load(a.traces[1]));
    const auto mapping = mapping_from_json(parse_json_file(a.mapping));
    CompareOptions opt;
    opt.per_step_alignment = a.per_step;
    const auto rep = compare(model, trace, mapping, opt);
    for (std::size_t s = 0; s < rep.steps.size(); ++s) {
        if (rep.dropped_markers[s] > 0) {
            spdlog::warn("step {}: {} marker(s) missing, dropped from RMSE", rep.steps[s], rep.dropped_markers[s]);
        }
    }
    emit(a.out, to_json(rep).dump(2) + "\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    setup_logging();
    CLI::App app{"Kinematics of a logarithmic-spiral cable-driven soft manipulator"};
    app.require_subcommand(1);
    const std::vector<std::string> cables{"dorsal", "ventral_left", "ventral_right"};

    DesignArgs design;
    auto* c_design = app.add_subcommand("design", "Solve spiral design parameters");
    c_design->add_option("--m", design.m, "gripper max / base width ratio")->capture_default_str();
    c_design->add_option("--r-rigid", design.r_rigid, "rigid arm end-link radius, mm")->capture_default_str();
    c_design->add_option("--delta-theta", design.delta_theta_deg, "section angle, deg")->capture_default_str();
    c_design->add_option("--theta-span", design.theta_span_deg, "profile span, deg")->capture_default_str();
    c_design->add_option("--density", design.density, "material density, g/cm^3")->capture_default_str();
    c_design->add_option("--E", design.youngs, "Young's modulus, MPa")->capture_default_str();
    c_design->add_option("--joint-fraction", design.joint_fraction, "joint length / link length")->capture_default_str();
    c_design->add_option("--joint-radius-fraction", design.joint_radius_fraction, "joint radius / distal link radius")
        ->capture_default_str();
    c_design->add_option("--out", design.out, "params JSON (stdout if omitted)");
    c_design->add_option("--mesh", design.mesh, "revolved profile as OBJ");
    c_design->add_option("--spec-out", design.spec_out, "manipulator spec JSON");

    ShapeArgs shape;
    auto* c_rest = app.add_subcommand("rest", "Gravity rest shape");
    c_rest->add_option("--spec", shape.spec, "spec JSON (default trunk if omitted)");
    c_rest->add_option("--tilt-deg", shape.tilt_deg, "base tilt from horizontal, deg")->required();
    c_rest->add_option("--out", shape.out, "shape CSV (stdout if omitted)");

    auto* c_bend = app.add_subcommand("bend", "Single-cable bend");
    c_bend->add_option("--spec", shape.spec, "spec JSON (default trunk if omitted)");
    std::vector<std::string> bend_cables = cables;
    bend_cables.push_back("ventral_pair");
    c_bend->add_option("--cable", shape.cable, "dorsal, ventral_left, ventral_right or ventral_pair")
        ->required()
        ->check(CLI::IsMember(bend_cables));
    c_bend->add_option("--shorten-mm", shape.d1, "cable shortening, mm")->required();
    c_bend->add_option("--tilt-deg", shape.tilt_deg, "base tilt for a gravity rest state, deg");
    c_bend->add_option("--out", shape.out, "shape CSV (stdout if omitted)");

    auto* c_twist = app.add_subcommand("twist", "Two-cable twist");
    c_twist->add_option("--spec", shape.spec, "spec JSON (default trunk if omitted)");
    c_twist->add_option("--cable1", shape.cable, "first cable")->required()->check(CLI::IsMember(cables));
    c_twist->add_option("--d1", shape.d1, "first cable shortening, mm")->required();
    c_twist->add_option("--cable2", shape.cable2, "second cable")->required()->check(CLI::IsMember(cables));
    c_twist->add_option("--d2", shape.d2, "second cable shortening, mm")->required();
    c_twist->add_option("--tilt-deg", shape.tilt_deg, "base tilt for a gravity rest state, deg");
    c_twist->add_option("--out", shape.out, "shape CSV (stdout if omitted)");

    SweepArgs sweep;
    auto* c_sweep = app.add_subcommand("sweep", "Stepwise bending protocol");
    c_sweep->add_option("--spec", sweep.spec, "spec JSON (default trunk if omitted)");
    c_sweep->add_option("--cable", sweep.cable, "active cable")->check(CLI::IsMember(cables))->capture_default_str();
    c_sweep->add_option("--steps", sweep.steps, "number of steps")->capture_default_str();
    c_sweep->add_option("--step-mm", sweep.step_mm, "shortening per step, mm")->capture_default_str();
    c_sweep->add_option("--tilt-deg", sweep.tilt_deg, "base tilt for a gravity rest state, deg");
    c_sweep->add_option("--out-dir", sweep.out_dir, "output directory")->capture_default_str();

    CalibrateArgs cal;
    auto* c_cal = app.add_subcommand("calibrate", "Apply slack compensation to a schedule");
    c_cal->add_option("--schedule", cal.schedule, "schedule CSV from sweep")->required();
    c_cal->add_option("--slack-mm", cal.slack, "residual slack d,v1,v2 in mm")->required()->delimiter(',');
    c_cal->add_option("--steps", cal.steps, "steps the slack is spread over")->capture_default_str();
    c_cal->add_option("--out", cal.out, "output CSV (rewrites the schedule if omitted)");

    StrategyArgs strat;
    auto* c_strat = app.add_subcommand("strategy", "Play back a grasping strategy");
    c_strat->add_option("--spec", strat.spec, "spec JSON (default trunk if omitted)");
    c_strat->add_option("--name", strat.name, "strategy name");
    c_strat->add_option("--out", strat.out_dir, "output directory");
    c_strat->add_option("--dir", strat.dir, "strategy script directory");
    c_strat->add_flag("--list", strat.list, "list available strategies");

    CompareArgs cmp;
    auto* c_cmp = app.add_subcommand("compare", "Compare model shapes with a marker trace");
    c_cmp->add_option("--model-dir", cmp.model_dir, "directory of step_*.csv shapes")->required();
    c_cmp->add_option("--trace", cmp.traces, "trace CSV; give twice to average two trials")->required();
    c_cmp->add_option("--mapping", cmp.mapping, "JSON: marker frame id -> model point index")->required();
    c_cmp->add_option("--out", cmp.out, "report JSON (stdout if omitted)");
    c_cmp->add_flag("--per-step-align", cmp.per_step, "align each step separately");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "spirokin: usage error: " << one_line(e.what()) << '\n';
        if (argc <= 1) std::cerr << app.help();
        return 1;
    }

    try {
        if (*c_design) return run_design(design);
        if (*c_rest) return run_rest(shape);
        if (*c_bend) return run_bend(shape);
        if (*c_twist) return run_twist(shape);
        if (*c_sweep) return run_sweep(sweep);
        if (*c_cal) return run_calibrate(cal);
        if (*c_strat) return run_strategy(strat);
        if (*c_cmp) return run_compare(cmp);
    } catch (const CLI::ParseError& e) {
        std::cerr << "spirokin: usage error: " << one_line(e.what()) << '\n';
        return 1;
    } catch (const SolverError& e) {
        std::cerr << "spirokin: solver error: " << one_line(e.what()) << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "spirokin: error: " << one_line(e.what()) << '\n';
        return 2;
    }
    return 1;
}
