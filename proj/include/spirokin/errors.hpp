#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace spirokin {

/// Precondition or input-range violation (bad angle, negative shortening, malformed file).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A numerical solve that did not meet its tolerance. Carries the last residuals.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, std::vector<double> residuals = {})
        : std::runtime_error(what), residuals_(std::move(residuals)) {}

    const std::vector<double>& residuals() const noexcept { return residuals_; }

private:
    std::vector<double> residuals_;
};

}  // namespace spirokin
