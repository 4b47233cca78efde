#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "genoja/core.hpp"
#include "genoja/streams.hpp"

namespace genoja {

enum class AlphaRule { Constant, LogDecay };
enum class BetaRule { InverseT, InverseSqrtT, Constant };

/// Produces (alpha_t, beta_t) per iteration. alpha: constant(alpha) or
/// c / max(1, ln(offset + t)); beta: b/(offset+t), b/sqrt(offset+t) or
/// constant(beta). All parameters are validated at construction.
struct StepSchedule {
    AlphaRule alpha_rule = AlphaRule::Constant;
    double alpha_param = 0.0;  // alpha for constant, c for log-decay
    BetaRule beta_rule = BetaRule::InverseT;
    double beta_param = 0.0;   // b = gamma / gap, or the constant beta
    double offset = 0.0;       // the additive offset inside log/1e rules
};

StepSchedule make_schedule(AlphaRule ar, double alpha_param, BetaRule br,
                           double beta_param, double offset);

struct StepSizes {
    double alpha;
    double beta;
};

/// Evaluate the schedule at iteration t >= 1.
StepSizes schedule_at(const StepSchedule& schedule, std::int64_t t);

/// Coupled iterates of the two-time-scale recursion. `v` stays unit-norm in
/// the Euclidean sense; `w` is carried unnormalized. `v_bar` is the running
/// uniform average of the normalized slow iterates when averaging is on.
struct SolverState {
    BVector w;
    BVector v;
    std::optional<BVector> v_bar;
    std::int64_t t = 0;
};

enum class AverageMode { None, UniformTail };

/// Fresh state with w0, v0 drawn independently and uniformly on the unit
/// sphere (w0 first, then v0).
SolverState init_state(int dim, std::uint64_t seed, AverageMode mode);

/// One coupled update:
///   w <- w - alpha (B_t w - A_t v)
///   v' <- v + beta w
///   v <- v' / ||v'||_2
/// Throws DegenerateDirection when v' vanishes and NumericalDivergence (with
/// iteration index) when a NaN/Inf appears.
void gen_oja_step(SolverState& state, const MatrixSample& sample, double alpha,
                  double beta);

/// One normalized Oja update v <- (v + beta A_t v) / ||.||.
BVector oja_step(const BVector& v, const Matrix& A_t, double beta);

/// Averaged direction v_bar / ||v_bar||_2. Throws NotStarted before any step
/// when mode != None.
BVector streaming_average(const SolverState& state, AverageMode mode);

/// Alternating baseline: per outer step, tau inner SGD iterations
/// w <- w - alpha_inner (B_t w - A_t v) on fresh samples, then one Oja step
/// on the average of the tau inner iterates. Consumes exactly tau samples
/// per outer step. By default the inner iterate is re-zeroed each outer
/// round; `warm_start` carries it over instead.
struct TwoStepState {
    BVector w;
    BVector v;
    std::int64_t outer = 0;
    std::int64_t samples = 0;
};

TwoStepState init_two_step(int dim, std::uint64_t seed);

void two_step_outer(TwoStepState& state, StreamSampler& sampler, int tau,
                    double alpha_inner, double beta, bool warm_start = false);

enum class SolverKind { GenOja, Oja, TwoStep, GenOjaAveraged };

std::string to_string(SolverKind k);
SolverKind solver_kind_from_string(const std::string& s);

struct RunConfig {
    SolverKind solver = SolverKind::GenOja;
    StepSchedule schedule;
    std::int64_t horizon = 0;
    std::uint64_t seed = 0;
    int tau = 1;                      // two-step only
    double alpha_inner = 0.0;         // two-step inner step size
    bool two_step_warm_start = false;
    bool record_prediction_error = false;
};

/// Checkpointed error trace of a single run. Rows hold sin^2_B(u1, v_t)
/// against the reference principal vector; `avg_error` is populated for the
/// averaged solver. After a divergence the remaining checkpoints are not
/// produced and `diverged_at` records the failing iteration.
struct RunTrace {
    std::vector<std::int64_t> steps;
    std::vector<double> error;
    std::vector<double> avg_error;   // empty unless averaging
    std::vector<double> xi_norm;     // empty unless record_prediction_error
    std::int64_t samples_consumed = 0;
    std::optional<std::int64_t> diverged_at;
};

/// Drives a solver over the stream for `horizon` samples, evaluating the
/// error at the given checkpoints (sorted, within [1, horizon]).
RunTrace run(const RunConfig& config, const StreamSpec& stream,
             const EigenReference& reference,
             const std::vector<std::int64_t>& checkpoints);

}  // namespace genoja
