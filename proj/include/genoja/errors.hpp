#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace genoja {

/// B is not symmetric positive definite where one is required.
struct NonPositiveDefinite : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A zero (or numerically zero) vector was used as a direction.
struct DegenerateDirection : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidDimension : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Joint covariance fails PSD / marginal SPD requirements.
struct InvalidCovariance : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Step-schedule parameters would produce nonpositive or infinite steps.
struct InvalidSchedule : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// NaN/Inf appeared in the iterates; carries the iteration index.
struct NumericalDivergence : std::runtime_error {
    std::int64_t iteration;
    NumericalDivergence(std::int64_t t, const std::string& what)
        : std::runtime_error(what), iteration(t) {}
};

/// Chain-probe step size outside (0, 2/R^2].
struct StepOutOfRange : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Averaged iterate requested before any step was taken.
struct NotStarted : std::logic_error {
    using std::logic_error::logic_error;
};

/// Slope fit impossible (zero, negative or divergent errors in window).
struct NotFittable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace genoja
