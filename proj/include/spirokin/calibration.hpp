#pragma once
/**
 * @file calibration.hpp
 * @brief Stepwise slack compensation for commanded cable lengths.
 *
 * The residual slack L_slack of each cable is measured once at full wrap. Spread
 * over N steps it gives a per-step factor C = L_slack / N, and step i (1-based)
 * is lengthened by C * i.
 */

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "spirokin/errors.hpp"
#include "spirokin/manipulator.hpp"

namespace spirokin {

struct SlackModel {
    std::array<double, 3> slack_mm{0.0, 0.0, 0.0};  ///< per cable, indexed by Cable
    int steps = 1;

    void validate() const {
        for (double s : slack_mm) {
            if (!(s >= 0.0) || !std::isfinite(s)) throw DomainError("calibration: slack must be >= 0 mm");
        }
        if (steps < 1) throw DomainError("calibration: step count must be >= 1");
    }

    double slack(Cable c) const { return slack_mm[static_cast<std::size_t>(index_of(c))]; }
};

/// Per-step compensation C = L_slack / N_steps, mm/step.
inline double compensation_factor(const SlackModel& model, Cable cable) {
    model.validate();
    return model.slack(cable) / static_cast<double>(model.steps);
}

/// Adjusted shortening per step: dL'_i = dL_i + C * i with i starting at 1.
inline std::vector<double> adjusted_schedule(const std::vector<double>& theoretical, double c) {
    if (theoretical.empty()) throw DomainError("calibration: empty schedule");
    std::vector<double> out(theoretical.size());
    for (std::size_t i = 0; i < theoretical.size(); ++i) {
        out[i] = theoretical[i] + c * static_cast<double>(i + 1);
    }
    return out;
}

}  // namespace spirokin
