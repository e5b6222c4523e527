#pragma once
/**
 * @file statics.hpp
 * @brief Resting shape of the unactuated arm under gravity.
 *
 * Bending is planar, in the vertical plane containing the base axis. Each joint
 * balances its elastic torque K_n theta_n against the gravity moment of every
 * section distal to it. Joints that hit the limit are held there and the
 * sections on either side move as one rigid body.
 */

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "spirokin/errors.hpp"
#include "spirokin/manipulator.hpp"

namespace spirokin {

struct RestState {
    double theta_0 = kPi / 2.0;  ///< nominal base tilt from horizontal, radians
    /// Elevation of the base axis below horizontal used by the planar solve, in [-pi/2, pi/2].
    double elevation = kPi / 2.0;
    /// Cross-section angle (local y-z) of the side the arm sags toward.
    double bend_direction = 3.0 * kPi / 2.0;
    std::vector<double> joint_angles;
    std::vector<bool> saturated;

    int saturated_count() const {
        return static_cast<int>(std::count(saturated.begin(), saturated.end(), true));
    }
};

struct StaticsOptions {
    double tolerance = 1e-9;  ///< N*mm
    int max_iterations = 500;  ///< cap for each solver phase
    double relaxation = 0.5;
};

namespace detail {

// Force in N of a mass in grams.
inline double weight(const ManipulatorSpec& spec, double grams) {
    return grams * 1e-3 * spec.material.gravity;
}

struct PlanarChain {
    std::vector<double> joint_x;  // x of joint n, n = 0 (base) .. N+1 (tip)
    std::vector<double> cg_x;     // x of CG of section j, j = 1 .. N+1 (index j-1)
    std::vector<double> cg_y;
};

// Horizontal x runs along the base axis' horizontal projection, y is up.
inline PlanarChain planar_chain(const ManipulatorSpec& spec, double elevation,
                                const std::vector<double>& angles) {
    const std::size_t n_sec = spec.sections.size();
    PlanarChain c;
    c.joint_x.assign(n_sec + 1, 0.0);
    c.cg_x.assign(n_sec, 0.0);
    c.cg_y.assign(n_sec, 0.0);
    double phi = elevation;
    double x = 0.0, y = 0.0;
    for (std::size_t j = 0; j < n_sec; ++j) {
        if (j > 0) phi += angles[j - 1];
        const auto& s = spec.sections[j];
        const double dx = s.link_length * std::cos(phi);
        const double dy = -s.link_length * std::sin(phi);
        c.cg_x[j] = x + s.cg_fraction * dx;
        c.cg_y[j] = y + s.cg_fraction * dy;
        x += dx;
        y += dy;
        c.joint_x[j + 1] = x;
    }
    return c;
}

inline std::vector<double> gravity_moments(const ManipulatorSpec& spec, double elevation,
                                           const std::vector<double>& angles) {
    const auto chain = planar_chain(spec, elevation, angles);
    const int n_joints = spec.joint_count();
    std::vector<double> moments(static_cast<std::size_t>(n_joints), 0.0);
    for (int n = 1; n <= n_joints; ++n) {
        const double xn = chain.joint_x[static_cast<std::size_t>(n)];
        double m = 0.0;
        for (std::size_t j = static_cast<std::size_t>(n); j < spec.sections.size(); ++j) {
            m += weight(spec, spec.sections[j].mass) * (chain.cg_x[j] - xn);
        }
        moments[static_cast<std::size_t>(n - 1)] = m;
    }
    return moments;
}

inline RestState make_rest(double theta_0, double elevation, double direction, int joints) {
    RestState r;
    r.theta_0 = theta_0;
    r.elevation = elevation;
    r.bend_direction = direction;
    r.joint_angles.assign(static_cast<std::size_t>(joints), 0.0);
    r.saturated.assign(static_cast<std::size_t>(joints), false);
    return r;
}

}  // namespace detail

/// Moment about joint n (1-based) of all distal sections, N*mm. Positive sags the arm.
inline double gravity_moment(const ManipulatorSpec& spec, const RestState& state, int n) {
    spec.joint(n);
    return detail::gravity_moments(spec, state.elevation, state.joint_angles)
        [static_cast<std::size_t>(n - 1)];
}

/// Elastic plus gravitational potential energy of a planar configuration, N*mm.
inline double potential_energy(const ManipulatorSpec& spec, double elevation,
                               const std::vector<double>& angles) {
    double u = 0.0;
    for (int n = 1; n <= spec.joint_count(); ++n) {
        const double th = angles[static_cast<std::size_t>(n - 1)];
        u += 0.5 * bending_stiffness(spec, n) * th * th;
    }
    const auto chain = detail::planar_chain(spec, elevation, angles);
    for (std::size_t j = 0; j < spec.sections.size(); ++j) {
        u += detail::weight(spec, spec.sections[j].mass) * chain.cg_y[j];
    }
    return u;
}

/// K_n theta_n - M_n for every joint strictly inside (0, limit); zero elsewhere.
inline std::vector<double> equilibrium_residuals(const ManipulatorSpec& spec, const RestState& s) {
    const auto moments = detail::gravity_moments(spec, s.elevation, s.joint_angles);
    std::vector<double> r(moments.size(), 0.0);
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double th = s.joint_angles[i];
        if (th > 0.0 && th < spec.joint_limit) {
            r[i] = bending_stiffness(spec, static_cast<int>(i) + 1) * th - moments[i];
        }
    }
    return r;
}

namespace detail {

// Projected optimality error: distance of each angle from its clamped torque target.
inline double kkt_error(const ManipulatorSpec& spec, const std::vector<double>& th,
                        const std::vector<double>& moments, const std::vector<double>& stiff) {
    double worst = 0.0;
    for (std::size_t i = 0; i < th.size(); ++i) {
        const double target = std::clamp(moments[i] / stiff[i], 0.0, spec.joint_limit);
        worst = std::max(worst, stiff[i] * std::abs(th[i] - target));
    }
    return worst;
}

// Projected Newton on the potential energy over [0, limit]^N. Joints pinned at a
// bound by their torque take a scaled gradient step; the rest take a Newton step
// with a finite-difference Hessian of the gravity moments.
inline std::vector<double> minimize_energy(const ManipulatorSpec& spec, double elevation,
                                           std::vector<double> th, const std::vector<double>& stiff,
                                           double tol, int max_iter) {
    const double limit = spec.joint_limit;
    const auto n = static_cast<Eigen::Index>(th.size());
    auto project = [limit](std::vector<double> v) {
        for (double& x : v) x = std::clamp(x, 0.0, limit);
        return v;
    };
    auto gradient = [&](const std::vector<double>& t) {
        const auto m = gravity_moments(spec, elevation, t);
        Eigen::VectorXd g(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto k = static_cast<std::size_t>(i);
            g(i) = stiff[k] * t[k] - m[k];
        }
        return g;
    };
    auto kkt = [&](const std::vector<double>& t) {
        return kkt_error(spec, t, gravity_moments(spec, elevation, t), stiff);
    };

    th = project(std::move(th));
    double u = potential_energy(spec, elevation, th);
    double err = kkt(th);
    for (int it = 0; it < max_iter && err >= tol; ++it) {
        const Eigen::VectorXd g = gradient(th);
        std::vector<bool> pinned(th.size(), false);
        for (std::size_t i = 0; i < th.size(); ++i) {
            pinned[i] = (th[i] <= 1e-12 && g(static_cast<Eigen::Index>(i)) > 0.0) ||
                        (th[i] >= limit - 1e-12 && g(static_cast<Eigen::Index>(i)) < 0.0);
        }

        // Hessian of U: diag(K) minus the Jacobian of the moments.
        constexpr double h = 1e-6;
        Eigen::MatrixXd hess(n, n);
        for (Eigen::Index k = 0; k < n; ++k) {
            auto plus = th, minus = th;
            plus[static_cast<std::size_t>(k)] += h;
            minus[static_cast<std::size_t>(k)] -= h;
            hess.col(k) = (gradient(plus) - gradient(minus)) / (2.0 * h);
        }
        hess = 0.5 * (hess + hess.transpose()).eval();

        Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
        std::vector<Eigen::Index> free_idx;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (pinned[static_cast<std::size_t>(i)]) d(i) = -g(i) / stiff[static_cast<std::size_t>(i)];
            else free_idx.push_back(i);
        }
        if (!free_idx.empty()) {
            const auto nf = static_cast<Eigen::Index>(free_idx.size());
            Eigen::MatrixXd hf(nf, nf);
            Eigen::VectorXd gf(nf);
            for (Eigen::Index a = 0; a < nf; ++a) {
                gf(a) = g(free_idx[static_cast<std::size_t>(a)]);
                for (Eigen::Index b = 0; b < nf; ++b) {
                    hf(a, b) = hess(free_idx[static_cast<std::size_t>(a)], free_idx[static_cast<std::size_t>(b)]);
                }
            }
            const Eigen::LDLT<Eigen::MatrixXd> ldlt(hf);
            Eigen::VectorXd df = ldlt.solve(-gf);
            if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || !(df.dot(gf) < 0.0)) {
                for (Eigen::Index a = 0; a < nf; ++a) {
                    df(a) = -gf(a) / stiff[static_cast<std::size_t>(free_idx[static_cast<std::size_t>(a)])];
                }
            }
            for (Eigen::Index a = 0; a < nf; ++a) d(free_idx[static_cast<std::size_t>(a)]) = df(a);
        }

        bool accepted = false;
        double alpha = 1.0;
        for (int ls = 0; ls < 60; ++ls, alpha *= 0.5) {
            std::vector<double> trial(th.size());
            for (std::size_t i = 0; i < th.size(); ++i) trial[i] = th[i] + alpha * d(static_cast<Eigen::Index>(i));
            trial = project(std::move(trial));
            const double ut = potential_energy(spec, elevation, trial);
            const double et = kkt(trial);
            // Near the optimum the energy change drowns in rounding; fall back on the KKT error.
            if (ut < u || (ut <= u + 1e-12 * std::abs(u) && et < err)) {
                th = std::move(trial);
                u = ut;
                err = et;
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
    }
    return th;
}

inline RestState solve_planar(const ManipulatorSpec& spec, RestState state,
                              const StaticsOptions& opt) {
    const int n = spec.joint_count();
    const double limit = spec.joint_limit;
    std::vector<double> stiff(static_cast<std::size_t>(n));
    for (int i = 1; i <= n; ++i) stiff[static_cast<std::size_t>(i - 1)] = bending_stiffness(spec, i);
    for (double k : stiff) {
        if (!(k > 0.0)) throw DomainError("statics: zero joint stiffness");
    }

    auto& th = state.joint_angles;
    double omega = opt.relaxation;
    double prev_err = std::numeric_limits<double>::infinity();
    int grew = 0;
    bool converged = false;
    // Cheap damped sweeps first; Newton finishes whatever they leave.
    const int sweeps = opt.max_iterations;
    for (int it = 0; it < sweeps; ++it) {
        const auto moments = gravity_moments(spec, state.elevation, th);
        const double err = kkt_error(spec, th, moments, stiff);
        if (err < opt.tolerance) {
            converged = true;
            break;
        }
        if (err > prev_err) {
            if (++grew > 3) {
                omega *= 0.5;
                grew = 0;
            }
        } else {
            grew = 0;
        }
        prev_err = err;
        for (std::size_t i = 0; i < th.size(); ++i) {
            const double target = std::clamp(moments[i] / stiff[i], 0.0, limit);
            th[i] = target == limit ? (omega >= 1.0 ? limit : (1.0 - omega) * th[i] + omega * limit)
                                    : (1.0 - omega) * th[i] + omega * target;
        }
        if (omega < 1e-6) break;
    }

    if (!converged) {
        th = minimize_energy(spec, state.elevation, th, stiff, opt.tolerance, opt.max_iterations);
    }

    // Snap joints sitting on a bound whose torque pushes past it.
    const auto moments = gravity_moments(spec, state.elevation, th);
    for (std::size_t i = 0; i < th.size(); ++i) {
        const double target = moments[i] / stiff[i];
        if (target >= limit && std::abs(th[i] - limit) < 1e-9) th[i] = limit;
        if (target <= 0.0 && std::abs(th[i]) < 1e-9) th[i] = 0.0;
        th[i] = std::clamp(th[i], 0.0, limit);
        state.saturated[i] = (th[i] == limit);
    }

    const double err = kkt_error(spec, th, gravity_moments(spec, state.elevation, th), stiff);
    if (!(err < 10.0 * opt.tolerance)) {
        auto res = equilibrium_residuals(spec, state);
        std::ostringstream os;
        os << "statics: no equilibrium within tolerance, residual " << err << " N*mm";
        throw SolverError(os.str(), std::move(res));
    }
    return state;
}

}  // namespace detail

/**
 * Rest shape for a base tilted theta_0 from horizontal within the sagittal plane,
 * dorsal side up. theta_0 in [0, pi]; past vertical the arm sags dorsally.
 */
inline RestState solve_rest_shape(const ManipulatorSpec& spec, double theta_0,
                                  const StaticsOptions& opt = {}) {
    spec.validate();
    if (!(theta_0 >= 0.0 && theta_0 <= kPi)) {
        throw DomainError("statics: tilt must lie in [0, 180] degrees");
    }
    const bool past_vertical = theta_0 > kPi / 2.0;
    const double elevation = past_vertical ? kPi - theta_0 : theta_0;
    const double direction = past_vertical ? kPi / 2.0 : 3.0 * kPi / 2.0;
    auto state = detail::make_rest(theta_0, elevation, direction, spec.joint_count());
    return detail::solve_planar(spec, std::move(state), opt);
}

/**
 * Rest shape for an arbitrary base orientation (columns: arm axis, local y, dorsal
 * z, expressed in a world frame with +z up).
 */
inline RestState solve_rest_shape(const ManipulatorSpec& spec, const Eigen::Matrix3d& base,
                                  const StaticsOptions& opt = {}) {
    spec.validate();
    const Eigen::Vector3d down_local = base.transpose() * Eigen::Vector3d(0.0, 0.0, -1.0);
    const double along = std::clamp(down_local.x(), -1.0, 1.0);
    const double elevation = std::asin(along);
    const double side = std::hypot(down_local.y(), down_local.z());
    double direction = 3.0 * kPi / 2.0;
    if (side > 1e-12) {
        direction = std::atan2(down_local.z(), down_local.y());
        if (direction < 0.0) direction += 2.0 * kPi;
    }
    // Nominal tilt in the sagittal convention: past vertical when sagging dorsally.
    const double theta_0 =
        std::abs(direction - kPi / 2.0) < 1e-9 ? kPi - elevation : elevation;
    auto state = detail::make_rest(theta_0, elevation, direction, spec.joint_count());
    return detail::solve_planar(spec, std::move(state), opt);
}

}  // namespace spirokin
