#include "genoja/diagnostics.hpp"

#include <cmath>

#include <Eigen/Dense>
#include <omp.h>

#include "genoja/parallel.hpp"
#include "genoja/rng.hpp"

namespace genoja {

namespace {

constexpr std::uint64_t kChainInitTag = 0x6369;
constexpr std::uint64_t kChainSampleTag = 0x6373;

void validate_probe(const ChainProbe& probe, const StreamSpec& stream) {
    double limit = 2.0 / stream.radius_sq;
    if (!(probe.alpha > 0.0) || probe.alpha > limit) {
        throw StepOutOfRange("chain step size must lie in (0, 2/R^2]");
    }
    if (probe.horizon < 1 || probe.replicas < 1) {
        throw InvalidDimension("chain probe needs horizon >= 1, replicas >= 1");
    }
}

BVector chain_target(const ChainProbe& probe, const StreamSpec& stream) {
    Eigen::LLT<Matrix> llt(stream.population.B);
    return llt.solve(stream.population.A * probe.v_fixed);
}

double relative_error(const BVector& value, const BVector& target) {
    double tn = target.norm();
    double diff = (value - target).norm();
    return tn > 0.0 ? diff / tn : diff;
}

}  // namespace

PredictionError make_prediction_error(const BVector& w, const BVector& v_prev,
                                      const ProblemSpec& population,
                                      std::int64_t t) {
    Eigen::LLT<Matrix> llt(population.B);
    PredictionError pe;
    pe.xi = w - llt.solve(population.A * v_prev);
    pe.norm = pe.xi.norm();
    pe.t = t;
    return pe;
}

StationaryMeanReport stationary_mean_check(const ChainProbe& probe,
                                           const StreamSpec& stream,
                                           bool parallel) {
    validate_probe(probe, stream);
    const std::int64_t burn = probe.horizon / 2;
    const std::int64_t kept = probe.horizon - burn;
    const int dim = stream.dim;

    std::vector<BVector> replica_sums(probe.replicas);
    const int threads = parallel ? thread_cap() : 1;
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (int r = 0; r < probe.replicas; ++r) {
        Rng init(derive_seed(probe.seed, kChainInitTag + 2 * r));
        StreamSampler sampler(stream,
                              derive_seed(probe.seed, kChainSampleTag + 2 * r));
        BVector w = init.unit_sphere(dim);
        BVector sum = BVector::Zero(dim);
        for (std::int64_t t = 1; t <= probe.horizon; ++t) {
            MatrixSample s = sampler.next();
            w = w - probe.alpha * (s.B * w) + probe.alpha * (s.A * probe.v_fixed);
            if (t > burn) sum += w;
        }
        replica_sums[r] = sum;
    }

    BVector total = BVector::Zero(dim);
    for (const BVector& s : replica_sums) total += s;  // ordered reduction

    StationaryMeanReport report;
    report.empirical_mean =
        total / static_cast<double>(kept * probe.replicas);
    report.target = chain_target(probe, stream);
    report.rel_err = relative_error(report.empirical_mean, report.target);
    return report;
}

std::vector<MixingPoint> mixing_decay_probe(const ChainProbe& probe,
                                            const StreamSpec& stream,
                                            bool parallel) {
    validate_probe(probe, stream);
    const int dim = stream.dim;

    std::vector<std::int64_t> ks{0};
    for (std::int64_t k = 1; k <= probe.horizon; k *= 2) ks.push_back(k);
    if (ks.back() != probe.horizon) ks.push_back(probe.horizon);

    std::vector<std::vector<BVector>> snapshots(probe.replicas);
    const int threads = parallel ? thread_cap() : 1;
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (int r = 0; r < probe.replicas; ++r) {
        Rng init(derive_seed(probe.seed, kChainInitTag + 2 * r));
        StreamSampler sampler(stream,
                              derive_seed(probe.seed, kChainSampleTag + 2 * r));
        BVector w = init.unit_sphere(dim);
        std::vector<BVector> snaps;
        snaps.reserve(ks.size());
        std::size_t next = 0;
        if (ks[next] == 0) {
            snaps.push_back(w);
            ++next;
        }
        for (std::int64_t t = 1; t <= probe.horizon && next < ks.size(); ++t) {
            MatrixSample s = sampler.next();
            w = w - probe.alpha * (s.B * w) + probe.alpha * (s.A * probe.v_fixed);
            if (ks[next] == t) {
                snaps.push_back(w);
                ++next;
            }
        }
        snapshots[r] = std::move(snaps);
    }

    BVector target = chain_target(probe, stream);
    std::vector<MixingPoint> points;
    points.reserve(ks.size());
    for (std::size_t i = 0; i < ks.size(); ++i) {
        BVector mean = BVector::Zero(dim);
        for (int r = 0; r < probe.replicas; ++r) mean += snapshots[r][i];
        mean /= static_cast<double>(probe.replicas);
        points.push_back({ks[i], (mean - target).norm()});
    }
    return points;
}

double fit_decay_slope(const std::vector<MixingPoint>& points, double floor) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const MixingPoint& p : points) {
        if (!(p.mean_distance > floor) || !std::isfinite(p.mean_distance)) {
            continue;
        }
        double x = static_cast<double>(p.k);
        double y = std::log(p.mean_distance);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 2) throw NotFittable("fewer than two points above the floor");
    double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw NotFittable("degenerate abscissa in slope fit");
    return (n * sxy - sx * sy) / denom;
}

PredictionErrorReport prediction_error_trace(const StreamSpec& stream,
                                             const StepSchedule& schedule,
                                             std::int64_t horizon,
                                             std::uint64_t seed,
                                             bool freeze_v) {
    SolverState state = init_state(stream.dim, seed, AverageMode::None);
    StreamSampler sampler(stream, derive_seed(seed, kChainSampleTag));
    Eigen::LLT<Matrix> llt(stream.population.B);

    PredictionErrorReport report;
    report.steps.reserve(horizon);
    report.norms.reserve(horizon);
    for (std::int64_t t = 1; t <= horizon; ++t) {
        MatrixSample sample = sampler.next();
        StepSizes step = schedule_at(schedule, t);
        BVector v_prev = state.v;
        gen_oja_step(state, sample, step.alpha, freeze_v ? 0.0 : step.beta);
        BVector xi = state.w - llt.solve(stream.population.A * v_prev);
        report.steps.push_back(t);
        report.norms.push_back(xi.norm());
    }

    const std::int64_t half = horizon / 2;
    double first = 0.0, second = 0.0;
    for (std::int64_t i = 0; i < horizon; ++i) {
        if (i < half) {
            first += report.norms[static_cast<std::size_t>(i)];
        } else {
            second += report.norms[static_cast<std::size_t>(i)];
        }
    }
    report.first_half_mean = half > 0 ? first / static_cast<double>(half) : 0.0;
    report.second_half_mean =
        horizon - half > 0 ? second / static_cast<double>(horizon - half) : 0.0;
    return report;
}

}  // namespace genoja
