#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "genoja/core.hpp"
#include "genoja/solvers.hpp"
#include "genoja/streams.hpp"

namespace genoja {

/// xi_t = w_t - B^{-1} A v_{t-1}, the Markovian perturbation seen by the
/// slow iterate.
struct PredictionError {
    BVector xi;
    double norm = 0.0;
    std::int64_t t = 0;
};

PredictionError make_prediction_error(const BVector& w, const BVector& v_prev,
                                      const ProblemSpec& population,
                                      std::int64_t t);

/// Fixed-v chain w_t = w_{t-1} - alpha (B_t w_{t-1} - A_t v): replicated
/// simulation against the stationary mean B^{-1} A v.
struct ChainProbe {
    BVector v_fixed;
    double alpha = 0.0;
    std::int64_t horizon = 0;
    int replicas = 1;
    std::uint64_t seed = 0;
};

struct StationaryMeanReport {
    BVector empirical_mean;
    BVector target;
    double rel_err = 0.0;
};

/// Runs `replicas` independent chains for `horizon` steps, discards a
/// horizon/2 burn-in, and averages retained iterates across time and
/// replicas. Replicas run in parallel; the reduction is ordered by replica
/// index so serial and parallel agree bit-for-bit.
/// Throws StepOutOfRange unless alpha is in (0, 2/R^2].
StationaryMeanReport stationary_mean_check(const ChainProbe& probe,
                                           const StreamSpec& stream,
                                           bool parallel = true);

struct MixingPoint {
    std::int64_t k = 0;
    double mean_distance = 0.0;
};

/// Distance of the replica-averaged iterate from B^{-1} A v at geometrically
/// spaced chain times (k = 0, 1, 2, 4, ... <= horizon).
std::vector<MixingPoint> mixing_decay_probe(const ChainProbe& probe,
                                            const StreamSpec& stream,
                                            bool parallel = true);

/// Least-squares slope of log(distance) against k over points with distance
/// above `floor`. Throws NotFittable with fewer than two usable points.
double fit_decay_slope(const std::vector<MixingPoint>& points, double floor);

struct PredictionErrorReport {
    std::vector<std::int64_t> steps;
    std::vector<double> norms;
    double first_half_mean = 0.0;
    double second_half_mean = 0.0;
};

/// Per-step ||xi_t|| along a Gen-Oja run (or a frozen-v chain when
/// `freeze_v` is set, which zeroes the slow update).
PredictionErrorReport prediction_error_trace(const StreamSpec& stream,
                                             const StepSchedule& schedule,
                                             std::int64_t horizon,
                                             std::uint64_t seed,
                                             bool freeze_v = false);

}  // namespace genoja
