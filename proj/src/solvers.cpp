#include "genoja/solvers.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "genoja/rng.hpp"

namespace genoja {

namespace {

constexpr std::uint64_t kInitTag = 0x696E6974;
constexpr std::uint64_t kSampleTag = 0x73616D70;

bool finite(const BVector& v) { return v.allFinite(); }

void check_positive(double x, const char* what) {
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw InvalidSchedule(std::string(what) + " must be positive and finite");
    }
}

}  // namespace

StepSchedule make_schedule(AlphaRule ar, double alpha_param, BetaRule br,
                           double beta_param, double offset) {
    check_positive(alpha_param, "alpha parameter");
    check_positive(beta_param, "beta parameter");
    if (!(offset >= 0.0) || !std::isfinite(offset)) {
        throw InvalidSchedule("offset must be nonnegative and finite");
    }
    return {ar, alpha_param, br, beta_param, offset};
}

StepSizes schedule_at(const StepSchedule& schedule, std::int64_t t) {
    double shifted = schedule.offset + static_cast<double>(t);
    double alpha = schedule.alpha_param;
    if (schedule.alpha_rule == AlphaRule::LogDecay) {
        alpha = schedule.alpha_param / std::max(1.0, std::log(shifted));
    }
    double beta = schedule.beta_param;
    switch (schedule.beta_rule) {
        case BetaRule::InverseT: beta = schedule.beta_param / shifted; break;
        case BetaRule::InverseSqrtT:
            beta = schedule.beta_param / std::sqrt(shifted);
            break;
        case BetaRule::Constant: break;
    }
    return {alpha, beta};
}

SolverState init_state(int dim, std::uint64_t seed, AverageMode mode) {
    Rng rng(derive_seed(seed, kInitTag));
    SolverState state;
    state.w = rng.unit_sphere(dim);
    state.v = rng.unit_sphere(dim);
    if (mode == AverageMode::UniformTail) state.v_bar = state.v;
    return state;
}

void gen_oja_step(SolverState& state, const MatrixSample& sample, double alpha,
                  double beta) {
    // Grouped as w - alpha*(B_t w) + alpha*(A_t v) so the B_t = I, alpha = 1
    // case reduces to the plain Oja update exactly.
    BVector bw = sample.B * state.w;
    BVector av = sample.A * state.v;
    state.w = state.w - alpha * bw + alpha * av;
    if (!finite(state.w)) {
        throw NumericalDivergence(state.t + 1, "w iterate diverged");
    }
    BVector v_prime = state.v + beta * state.w;
    double nrm = v_prime.norm();
    if (!std::isfinite(nrm)) {
        throw NumericalDivergence(state.t + 1, "v iterate diverged");
    }
    if (nrm == 0.0) {
        throw DegenerateDirection("v' vanished in gen_oja_step");
    }
    state.v = v_prime / nrm;
    state.t += 1;
    if (state.v_bar) {
        double inv_t = 1.0 / static_cast<double>(state.t);
        *state.v_bar = (1.0 - inv_t) * (*state.v_bar) + inv_t * state.v;
    }
}

BVector oja_step(const BVector& v, const Matrix& A_t, double beta) {
    BVector av = A_t * v;
    BVector u = v + beta * av;
    double nrm = u.norm();
    if (!std::isfinite(nrm)) {
        throw NumericalDivergence(0, "oja iterate diverged");
    }
    if (nrm == 0.0) throw DegenerateDirection("oja update vanished");
    return u / nrm;
}

BVector streaming_average(const SolverState& state, AverageMode mode) {
    if (mode == AverageMode::None) return state.v;
    if (state.t == 0) throw NotStarted("streaming average before first step");
    if (!state.v_bar) throw NotStarted("averaging was not enabled for this run");
    double nrm = state.v_bar->norm();
    if (nrm == 0.0) throw DegenerateDirection("averaged iterate vanished");
    return *state.v_bar / nrm;
}

TwoStepState init_two_step(int dim, std::uint64_t seed) {
    Rng rng(derive_seed(seed, kInitTag));
    TwoStepState state;
    state.w = rng.unit_sphere(dim);
    state.v = rng.unit_sphere(dim);
    return state;
}

void two_step_outer(TwoStepState& state, StreamSampler& sampler, int tau,
                    double alpha_inner, double beta) {
    if (tau < 1) throw InvalidSchedule("two-step baseline needs tau >= 1");
    BVector w_sum = BVector::Zero(state.w.size());
    for (int i = 0; i < tau; ++i) {
        MatrixSample sample = sampler.next();
        BVector bw = sample.B * state.w;
        BVector av = sample.A * state.v;
        state.w = state.w - alpha_inner * bw + alpha_inner * av;
        if (!finite(state.w)) {
            throw NumericalDivergence(state.samples + i + 1,
                                      "two-step inner iterate diverged");
        }
        w_sum += state.w;
    }
    BVector w_avg = w_sum / static_cast<double>(tau);
    BVector v_prime = state.v + beta * w_avg;
    double nrm = v_prime.norm();
    if (!std::isfinite(nrm)) {
        throw NumericalDivergence(state.samples + tau, "two-step v diverged");
    }
    if (nrm == 0.0) throw DegenerateDirection("two-step update vanished");
    state.v = v_prime / nrm;
    state.outer += 1;
    state.samples += tau;
}

std::string to_string(SolverKind k) {
    switch (k) {
        case SolverKind::GenOja: return "gen-oja";
        case SolverKind::Oja: return "oja";
        case SolverKind::TwoStep: return "two-step";
        case SolverKind::GenOjaAveraged: return "gen-oja-averaged";
    }
    return "unknown";
}

SolverKind solver_kind_from_string(const std::string& s) {
    if (s == "gen-oja") return SolverKind::GenOja;
    if (s == "oja") return SolverKind::Oja;
    if (s == "two-step") return SolverKind::TwoStep;
    if (s == "gen-oja-averaged") return SolverKind::GenOjaAveraged;
    throw ConfigError("unknown solver kind: " + s);
}

namespace {

double checkpoint_error(const EigenReference& reference, const BVector& v,
                        const Matrix& B) {
    return sin2_b(reference.right_vectors.col(0), v, B);
}

RunTrace run_coupled(const RunConfig& config, const StreamSpec& stream,
                     const EigenReference& reference,
                     const std::vector<std::int64_t>& checkpoints) {
    const bool averaged = config.solver == SolverKind::GenOjaAveraged;
    AverageMode mode = averaged ? AverageMode::UniformTail : AverageMode::None;
    SolverState state = init_state(stream.dim, config.seed, mode);
    StreamSampler sampler(stream, derive_seed(config.seed, kSampleTag));

    Eigen::LLT<Matrix> b_llt;
    BVector v_prev;
    if (config.record_prediction_error) {
        b_llt.compute(stream.population.B);
    }

    RunTrace trace;
    std::size_t next_cp = 0;
    for (std::int64_t t = 1; t <= config.horizon; ++t) {
        MatrixSample sample = sampler.next();
        StepSizes step = schedule_at(config.schedule, t);
        if (config.record_prediction_error) v_prev = state.v;
        try {
            gen_oja_step(state, sample, step.alpha, step.beta);
        } catch (const NumericalDivergence& e) {
            trace.diverged_at = e.iteration;
            trace.samples_consumed = t;
            return trace;
        } catch (const DegenerateDirection&) {
            trace.diverged_at = t;
            trace.samples_consumed = t;
            return trace;
        }
        if (next_cp < checkpoints.size() && checkpoints[next_cp] == t) {
            trace.steps.push_back(t);
            trace.error.push_back(
                checkpoint_error(reference, state.v, stream.population.B));
            if (averaged) {
                trace.avg_error.push_back(checkpoint_error(
                    reference, streaming_average(state, mode),
                    stream.population.B));
            }
            if (config.record_prediction_error) {
                BVector xi = state.w - b_llt.solve(stream.population.A * v_prev);
                trace.xi_norm.push_back(xi.norm());
            }
            ++next_cp;
        }
    }
    trace.samples_consumed = config.horizon;
    return trace;
}

RunTrace run_oja(const RunConfig& config, const StreamSpec& stream,
                 const EigenReference& reference,
                 const std::vector<std::int64_t>& checkpoints) {
    Rng init(derive_seed(config.seed, kInitTag));
    init.unit_sphere(stream.dim);  // discard the w0 slot so v0 matches gen-oja
    BVector v = init.unit_sphere(stream.dim);
    StreamSampler sampler(stream, derive_seed(config.seed, kSampleTag));

    RunTrace trace;
    std::size_t next_cp = 0;
    for (std::int64_t t = 1; t <= config.horizon; ++t) {
        MatrixSample sample = sampler.next();
        StepSizes step = schedule_at(config.schedule, t);
        try {
            v = oja_step(v, sample.A, step.beta);
        } catch (const NumericalDivergence&) {
            trace.diverged_at = t;
            trace.samples_consumed = t;
            return trace;
        } catch (const DegenerateDirection&) {
            trace.diverged_at = t;
            trace.samples_consumed = t;
            return trace;
        }
        if (next_cp < checkpoints.size() && checkpoints[next_cp] == t) {
            trace.steps.push_back(t);
            trace.error.push_back(
                checkpoint_error(reference, v, stream.population.B));
            ++next_cp;
        }
    }
    trace.samples_consumed = config.horizon;
    return trace;
}

RunTrace run_two_step(const RunConfig& config, const StreamSpec& stream,
                      const EigenReference& reference,
                      const std::vector<std::int64_t>& checkpoints) {
    TwoStepState state = init_two_step(stream.dim, config.seed);
    StreamSampler sampler(stream, derive_seed(config.seed, kSampleTag));
    const std::int64_t tau = config.tau;

    // Measurements land on the first outer completion at or after each
    // requested checkpoint, deduplicated.
    std::vector<std::int64_t> marks;
    for (std::int64_t c : checkpoints) {
        std::int64_t m = ((c + tau - 1) / tau) * tau;
        if (m <= config.horizon && (marks.empty() || marks.back() != m)) {
            marks.push_back(m);
        }
    }

    RunTrace trace;
    std::size_t next_mark = 0;
    const std::int64_t outer_total = config.horizon / tau;
    for (std::int64_t k = 1; k <= outer_total; ++k) {
        StepSizes step = schedule_at(config.schedule, k);
        try {
            two_step_outer(state, sampler, static_cast<int>(tau),
                           config.alpha_inner, step.beta);
        } catch (const NumericalDivergence& e) {
            trace.diverged_at = e.iteration;
            trace.samples_consumed = state.samples;
            return trace;
        } catch (const DegenerateDirection&) {
            trace.diverged_at = state.samples;
            trace.samples_consumed = state.samples;
            return trace;
        }
        if (next_mark < marks.size() && marks[next_mark] == state.samples) {
            trace.steps.push_back(state.samples);
            trace.error.push_back(
                checkpoint_error(reference, state.v, stream.population.B));
            ++next_mark;
        }
    }
    trace.samples_consumed = state.samples;
    return trace;
}

}  // namespace

RunTrace run(const RunConfig& config, const StreamSpec& stream,
             const EigenReference& reference,
             const std::vector<std::int64_t>& checkpoints) {
    if (config.horizon < 1) {
        throw InvalidSchedule("run horizon must be >= 1");
    }
    switch (config.solver) {
        case SolverKind::GenOja:
        case SolverKind::GenOjaAveraged:
            return run_coupled(config, stream, reference, checkpoints);
        case SolverKind::Oja:
            return run_oja(config, stream, reference, checkpoints);
        case SolverKind::TwoStep:
            return run_two_step(config, stream, reference, checkpoints);
    }
    throw std::logic_error("unreachable solver kind");
}

}  // namespace genoja
