#pragma once
/**
 * @file validation.hpp
 * @brief Marker-trace comparison: rigid registration, RMSE, per-section errors.
 *
 * Trace CSV: header `step,frame,x_mm,y_mm,z_mm`, one marker frame per row.
 * The mapping sends each marker frame id to an index into the model's backbone
 * points (0 = base frame).
 */

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "spirokin/errors.hpp"

namespace spirokin {

struct TraceSample {
    int step = 0;
    int frame = 0;
    Eigen::Vector3d position = Eigen::Vector3d::Zero();
};

struct Trace {
    std::vector<TraceSample> samples;

    std::vector<int> steps() const {
        std::set<int> s;
        for (const auto& m : samples) s.insert(m.step);
        return {s.begin(), s.end()};
    }

    /// Samples of one step keyed by marker frame.
    std::map<int, Eigen::Vector3d> step_samples(int step) const {
        std::map<int, Eigen::Vector3d> out;
        for (const auto& m : samples) {
            if (m.step == step) out[m.frame] = m.position;
        }
        return out;
    }
};

inline constexpr const char* kTraceHeader = "step,frame,x_mm,y_mm,z_mm";

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

template <typename T>
T parse_number(const std::string& s, std::size_t line_no, const char* field) {
    T v{};
    const auto* first = s.data();
    const auto* last = s.data() + s.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last) {
        std::ostringstream os;
        os << "trace line " << line_no << ": bad " << field << " '" << s << "'";
        throw DomainError(os.str());
    }
    return v;
}

}  // namespace detail

inline Trace read_trace(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw DomainError("trace: empty input");
    if (line != kTraceHeader) {
        throw DomainError(std::string("trace: header must be '") + kTraceHeader + "'");
    }
    Trace t;
    std::set<std::pair<int, int>> seen;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line.back() == '\r') throw DomainError("trace: CRLF line endings are not accepted");
        const auto cells = detail::split_csv(line);
        if (cells.size() != 5) {
            throw DomainError("trace line " + std::to_string(line_no) + ": expected 5 fields");
        }
        TraceSample s;
        s.step = detail::parse_number<int>(cells[0], line_no, "step");
        s.frame = detail::parse_number<int>(cells[1], line_no, "frame");
        for (int k = 0; k < 3; ++k) {
            s.position[k] = detail::parse_number<double>(cells[static_cast<std::size_t>(2 + k)],
                                                         line_no, "coordinate");
        }
        if (!s.position.allFinite()) {
            throw DomainError("trace line " + std::to_string(line_no) + ": non-finite position");
        }
        if (!seen.insert({s.step, s.frame}).second) {
            throw DomainError("trace line " + std::to_string(line_no) + ": duplicate step/frame");
        }
        t.samples.push_back(s);
    }
    return t;
}

/// Element-wise mean of two repeat trials with identical step/frame sets.
inline Trace average_traces(const Trace& a, const Trace& b) {
    std::map<std::pair<int, int>, Eigen::Vector3d> mb;
    for (const auto& s : b.samples) mb[{s.step, s.frame}] = s.position;
    if (mb.size() != a.samples.size()) throw DomainError("average: traces cover different markers");
    Trace out;
    for (const auto& s : a.samples) {
        auto it = mb.find({s.step, s.frame});
        if (it == mb.end()) {
            throw DomainError("average: step " + std::to_string(s.step) + " frame " +
                              std::to_string(s.frame) + " missing from second trace");
        }
        out.samples.push_back({s.step, s.frame, 0.5 * (s.position + it->second)});
    }
    return out;
}

/// Proper rigid motion x -> R x + t.
struct RigidTransform {
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();
    double rmse = 0.0;  ///< residual after alignment, mm

    Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation * p + translation; }
};

/**
 * Least-squares rigid motion carrying @p trace_points onto @p model_points (Kabsch).
 * Throws on count mismatch, fewer than 3 points, or collinear input.
 */
inline RigidTransform rigid_align(const std::vector<Eigen::Vector3d>& model_points,
                                  const std::vector<Eigen::Vector3d>& trace_points) {
    const std::size_t n = model_points.size();
    if (n != trace_points.size()) throw DomainError("align: point counts differ");
    if (n < 3) throw DomainError("align: need at least 3 point pairs");

    Eigen::Vector3d cm = Eigen::Vector3d::Zero(), ct = Eigen::Vector3d::Zero();
    for (std::size_t i = 0; i < n; ++i) {
        cm += model_points[i];
        ct += trace_points[i];
    }
    cm /= static_cast<double>(n);
    ct /= static_cast<double>(n);

    Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
    Eigen::MatrixXd pm(n, 3), pt(n, 3);
    for (std::size_t i = 0; i < n; ++i) {
        const Eigen::Vector3d a = trace_points[i] - ct;
        const Eigen::Vector3d b = model_points[i] - cm;
        pt.row(static_cast<Eigen::Index>(i)) = a.transpose();
        pm.row(static_cast<Eigen::Index>(i)) = b.transpose();
        h += a * b.transpose();
    }
    auto collinear = [](const Eigen::MatrixXd& p) {
        const Eigen::JacobiSVD<Eigen::MatrixXd> s(p);
        const auto& sv = s.singularValues();
        return !(sv(0) > 0.0) || sv(1) <= 1e-9 * sv(0);
    };
    if (collinear(pm) || collinear(pt)) throw DomainError("align: degenerate (collinear) point set");

    const Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
    if ((svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0) d(2, 2) = -1.0;

    RigidTransform tf;
    tf.rotation = svd.matrixV() * d * svd.matrixU().transpose();
    tf.translation = cm - tf.rotation * ct;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) ss += (model_points[i] - tf.apply(trace_points[i])).squaredNorm();
    tf.rmse = std::sqrt(ss / static_cast<double>(n));
    return tf;
}

struct CompareOptions {
    bool per_step_alignment = false;
};

struct ComparisonReport {
    std::vector<int> steps;               ///< trace step ids, ascending
    std::vector<double> step_rmse;        ///< mm
    std::vector<int> dropped_markers;     ///< mapped frames missing from each step
    std::map<int, std::vector<double>> section_errors;  ///< section index -> |error| per step, mm
    double mean_rmse = 0.0;
    double max_deviation = 0.0;
    std::vector<RigidTransform> alignments;  ///< one entry, or one per step
};

/**
 * Compare model backbone points (one vector per step, in trace-step order) with a
 * marker trace. @p mapping sends marker frame id -> model point index.
 */
inline ComparisonReport compare(const std::vector<std::vector<Eigen::Vector3d>>& model_steps,
                                const Trace& trace, const std::map<int, int>& mapping,
                                const CompareOptions& opt = {}) {
    if (mapping.empty()) throw DomainError("compare: empty marker mapping");
    ComparisonReport rep;
    rep.steps = trace.steps();
    if (rep.steps.size() != model_steps.size()) {
        std::ostringstream os;
        os << "compare: trace has " << rep.steps.size() << " steps (";
        for (std::size_t i = 0; i < rep.steps.size(); ++i) os << (i ? " " : "") << rep.steps[i];
        os << ") but model has " << model_steps.size();
        throw DomainError(os.str());
    }

    struct Pair {
        int section;
        Eigen::Vector3d model, measured;
    };
    std::vector<std::vector<Pair>> pairs(rep.steps.size());
    for (std::size_t s = 0; s < rep.steps.size(); ++s) {
        const auto samples = trace.step_samples(rep.steps[s]);
        int dropped = 0;
        for (const auto& [frame, section] : mapping) {
            if (section < 0 || static_cast<std::size_t>(section) >= model_steps[s].size()) {
                throw DomainError("compare: frame " + std::to_string(frame) + " maps to section " +
                                  std::to_string(section) + " outside the model");
            }
            auto it = samples.find(frame);
            if (it == samples.end()) {
                ++dropped;
                continue;
            }
            pairs[s].push_back({section, model_steps[s][static_cast<std::size_t>(section)], it->second});
        }
        rep.dropped_markers.push_back(dropped);
    }

    auto align = [](const std::vector<const Pair*>& ps) {
        std::vector<Eigen::Vector3d> m, t;
        for (const auto* p : ps) {
            m.push_back(p->model);
            t.push_back(p->measured);
        }
        return rigid_align(m, t);
    };
    if (!opt.per_step_alignment) {
        std::vector<const Pair*> all;
        for (const auto& ps : pairs) {
            for (const auto& p : ps) all.push_back(&p);
        }
        rep.alignments.push_back(align(all));
    }

    double rmse_sum = 0.0;
    for (std::size_t s = 0; s < pairs.size(); ++s) {
        if (pairs[s].empty()) {
            throw DomainError("compare: step " + std::to_string(rep.steps[s]) + " has no mapped markers");
        }
        if (opt.per_step_alignment) {
            std::vector<const Pair*> ps;
            for (const auto& p : pairs[s]) ps.push_back(&p);
            rep.alignments.push_back(align(ps));
        }
        const auto& tf = rep.alignments.back();
        double ss = 0.0;
        for (const auto& p : pairs[s]) {
            const double e = (p.model - tf.apply(p.measured)).norm();
            ss += e * e;
            rep.section_errors[p.section].push_back(e);
            rep.max_deviation = std::max(rep.max_deviation, e);
        }
        const double rmse = std::sqrt(ss / static_cast<double>(pairs[s].size()));
        rep.step_rmse.push_back(rmse);
        rmse_sum += rmse;
    }
    rep.mean_rmse = rmse_sum / static_cast<double>(rep.step_rmse.size());
    return rep;
}

}  // namespace spirokin
