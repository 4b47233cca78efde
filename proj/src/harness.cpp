#include "genoja/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include <omp.h>

#include "genoja/diagnostics.hpp"
#include "genoja/parallel.hpp"
#include "genoja/rng.hpp"

namespace genoja {

int thread_cap() {
    int n = omp_get_max_threads();
    if (const char* env = std::getenv("GENOJA_THREADS")) {
        char* end = nullptr;
        long cap = std::strtol(env, &end, 10);
        if (end != env && cap > 0) n = std::min<long>(n, cap);
    }
    return std::max(1, n);
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

double parse_double(const RawConfig& cfg, const std::string& key,
                    const std::string& value) {
    try {
        std::size_t pos = 0;
        double d = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing junk");
        return d;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected a number, got '" +
                          value + "'");
    }
}

std::int64_t parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        long long i = std::stoll(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing junk");
        return i;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected an integer, got '" +
                          value + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "on" || value == "true" || value == "1") return true;
    if (value == "off" || value == "false" || value == "0") return false;
    throw ConfigError("key '" + key + "': expected on/off, got '" + value + "'");
}

Eigen::VectorXd parse_vector(const std::string& value) {
    std::istringstream in(value);
    std::vector<double> vals;
    double x;
    while (in >> x) vals.push_back(x);
    return Eigen::Map<Eigen::VectorXd>(vals.data(),
                                       static_cast<Eigen::Index>(vals.size()));
}

StreamSpec build_stream(const RawConfig& cfg) {
    std::string kind = cfg.get_or("stream.kind", "gaussian-gev");
    std::uint64_t seed = static_cast<std::uint64_t>(
        parse_int("stream.seed", cfg.get_or("stream.seed", "7")));
    switch (stream_kind_from_string(kind)) {
        case StreamKind::GaussianGev: {
            int dim = static_cast<int>(
                parse_int("stream.dim", cfg.get_or("stream.dim", "20")));
            bool clip = parse_bool("stream.clip", cfg.get_or("stream.clip", "on"));
            return make_gaussian_gev_stream(dim, seed, clip).first;
        }
        case StreamKind::Deterministic: {
            auto a_path = cfg.get("stream.a_path");
            auto b_path = cfg.get("stream.b_path");
            if (!a_path || !b_path) {
                throw ConfigError(
                    "deterministic stream needs stream.a_path and stream.b_path");
            }
            return make_deterministic_stream(
                make_problem(load_matrix(*a_path), load_matrix(*b_path)));
        }
        case StreamKind::CcaGaussian: {
            int dx = static_cast<int>(
                parse_int("stream.dx", cfg.get_or("stream.dx", "2")));
            int dy = static_cast<int>(
                parse_int("stream.dy", cfg.get_or("stream.dy", "2")));
            Eigen::VectorXd rhos =
                parse_vector(cfg.get_or("stream.rho", "0.9 0.3"));
            return make_cca_stream(make_cca_identity_joint(dx, dy, rhos), seed)
                .first;
        }
        case StreamKind::Pca: {
            auto a_path = cfg.get("stream.a_path");
            if (!a_path) throw ConfigError("pca stream needs stream.a_path");
            bool clip =
                parse_bool("stream.clip", cfg.get_or("stream.clip", "off"));
            return make_pca_stream(load_matrix(*a_path), seed, clip).first;
        }
    }
    throw ConfigError("unknown stream kind: " + kind);
}

double resolve_auto(const RawConfig& cfg, const std::string& key,
                    const std::string& fallback, double auto_value) {
    std::string v = cfg.get_or(key, fallback);
    if (v == "auto") return auto_value;
    return parse_double(cfg, key, v);
}

}  // namespace

ExperimentSetup resolve_experiment(const RawConfig& cfg) {
    ExperimentSetup setup;
    setup.stream = build_stream(cfg);
    setup.reference = solve_reference(setup.stream.population);

    const double r_sq = setup.stream.radius_sq;
    const double gamma =
        parse_double(cfg, "schedule.gamma", cfg.get_or("schedule.gamma", "6"));

    setup.solver =
        solver_kind_from_string(cfg.get_or("solver.kind", "gen-oja"));
    setup.tau = static_cast<int>(
        parse_int("solver.tau", cfg.get_or("solver.tau", "1")));
    if (setup.solver == SolverKind::TwoStep && setup.tau < 1) {
        throw ConfigError("solver.tau must be >= 1");
    }
    setup.alpha_inner = resolve_auto(cfg, "solver.alpha_inner", "auto",
                                     1.0 / (2.0 * r_sq));

    std::string alpha_kind = cfg.get_or("schedule.alpha", "log-decay");
    AlphaRule ar;
    if (alpha_kind == "constant") {
        ar = AlphaRule::Constant;
    } else if (alpha_kind == "log-decay") {
        ar = AlphaRule::LogDecay;
    } else {
        throw ConfigError("key 'schedule.alpha': expected constant|log-decay, got '" +
                          alpha_kind + "'");
    }
    double alpha_value =
        resolve_auto(cfg, "schedule.alpha_value", "auto", 1.0 / (2.0 * r_sq));

    std::string beta_kind = cfg.get_or("schedule.beta", "inverse-t");
    BetaRule br;
    if (beta_kind == "inverse-t") {
        br = BetaRule::InverseT;
    } else if (beta_kind == "inverse-sqrt-t") {
        br = BetaRule::InverseSqrtT;
    } else if (beta_kind == "constant") {
        br = BetaRule::Constant;
    } else {
        throw ConfigError(
            "key 'schedule.beta': expected inverse-t|inverse-sqrt-t|constant, got '" +
            beta_kind + "'");
    }
    std::string beta_raw = cfg.get_or("schedule.beta_value", "auto");
    double beta_value;
    if (beta_raw == "auto") {
        if (!setup.reference.gap_usable) {
            throw InvalidSchedule(
                "gap-dependent beta rejected: eigengap is degenerate");
        }
        beta_value = gamma / setup.reference.gap;
    } else {
        beta_value = parse_double(cfg, "schedule.beta_value", beta_raw);
    }
    double offset = parse_double(cfg, "schedule.offset",
                                 cfg.get_or("schedule.offset", "0"));
    setup.schedule = make_schedule(ar, alpha_value, br, beta_value, offset);

    setup.horizon = parse_int("run.horizon", cfg.get_or("run.horizon", "100000"));
    if (setup.horizon < 1) throw ConfigError("run.horizon must be >= 1");
    setup.trials = static_cast<int>(
        parse_int("run.trials", cfg.get_or("run.trials", "1")));
    if (setup.trials < 1) throw ConfigError("run.trials must be >= 1");
    setup.base_seed = static_cast<std::uint64_t>(
        parse_int("run.base_seed", cfg.get_or("run.base_seed", "1")));
    setup.checkpoint_count = static_cast<int>(
        parse_int("run.checkpoints", cfg.get_or("run.checkpoints", "200")));
    if (setup.checkpoint_count < 1) {
        throw ConfigError("run.checkpoints must be >= 1");
    }
    setup.out_path = cfg.get_or("run.out", "trace.csv");

    setup.meta = cfg.entries;
    setup.meta.emplace_back("resolved.radius_sq", format_double(r_sq));
    setup.meta.emplace_back("resolved.lambda1",
                            format_double(setup.reference.eigenvalues[0]));
    setup.meta.emplace_back("resolved.gap", format_double(setup.reference.gap));
    setup.meta.emplace_back("resolved.alpha_param",
                            format_double(setup.schedule.alpha_param));
    setup.meta.emplace_back("resolved.beta_param",
                            format_double(setup.schedule.beta_param));
    setup.meta.emplace_back("resolved.alpha_inner",
                            format_double(setup.alpha_inner));
    return setup;
}

std::vector<std::int64_t> log_spaced_checkpoints(std::int64_t horizon,
                                                 int count) {
    if (horizon < 1) throw InvalidDimension("horizon must be >= 1");
    if (count < 1) throw InvalidDimension("checkpoint count must be >= 1");
    std::vector<std::int64_t> grid;
    if (horizon == 1 || count == 1) return {horizon};
    double log_t = std::log(static_cast<double>(horizon));
    for (int i = 0; i < count; ++i) {
        double u = log_t * static_cast<double>(i) / (count - 1);
        auto t = static_cast<std::int64_t>(std::llround(std::exp(u)));
        t = std::clamp<std::int64_t>(t, 1, horizon);
        if (grid.empty() || t > grid.back()) grid.push_back(t);
    }
    if (grid.back() != horizon) grid.push_back(horizon);
    return grid;
}

bool Trace::all_diverged() const {
    for (const auto& d : diverged_at) {
        if (!d) return false;
    }
    return !diverged_at.empty();
}

double Trace::final_mean_error() const {
    for (auto it = mean.rbegin(); it != mean.rend(); ++it) {
        if (std::isfinite(*it)) return *it;
    }
    return kNaN;
}

namespace {

// Two-step measurements land on outer-step completions; align the requested
// grid so every trial shares the same rows.
std::vector<std::int64_t> align_grid(const ExperimentSetup& setup,
                                     std::vector<std::int64_t> grid) {
    if (setup.solver != SolverKind::TwoStep) return grid;
    const std::int64_t tau = setup.tau;
    std::vector<std::int64_t> marks;
    for (std::int64_t c : grid) {
        std::int64_t m = ((c + tau - 1) / tau) * tau;
        if (m <= setup.horizon && (marks.empty() || marks.back() != m)) {
            marks.push_back(m);
        }
    }
    return marks;
}

}  // namespace

Trace run_experiment(const ExperimentSetup& setup, bool parallel) {
    auto t0 = std::chrono::steady_clock::now();
    std::vector<std::int64_t> grid =
        align_grid(setup, log_spaced_checkpoints(setup.horizon,
                                                 setup.checkpoint_count));

    const bool averaged = setup.solver == SolverKind::GenOjaAveraged;
    std::vector<RunTrace> runs(setup.trials);
    const int threads = parallel ? thread_cap() : 1;
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (int i = 0; i < setup.trials; ++i) {
        RunConfig rc;
        rc.solver = setup.solver;
        rc.schedule = setup.schedule;
        rc.horizon = setup.horizon;
        rc.seed = setup.base_seed + static_cast<std::uint64_t>(i);
        rc.tau = setup.tau;
        rc.alpha_inner = setup.alpha_inner;
        runs[i] = run(rc, setup.stream, setup.reference, grid);
    }

    Trace trace;
    trace.steps = grid;
    trace.meta = setup.meta;
    trace.per_trial.assign(setup.trials,
                           std::vector<double>(grid.size(), kNaN));
    if (averaged) {
        trace.per_trial_avg.assign(setup.trials,
                                   std::vector<double>(grid.size(), kNaN));
    }
    trace.diverged_at.resize(setup.trials);
    trace.samples_consumed = 0;
    for (int i = 0; i < setup.trials; ++i) {
        const RunTrace& rt = runs[i];
        trace.diverged_at[i] = rt.diverged_at;
        trace.samples_consumed =
            std::max(trace.samples_consumed, rt.samples_consumed);
        for (std::size_t j = 0; j < rt.steps.size(); ++j) {
            trace.per_trial[i][j] = rt.error[j];
            if (averaged) trace.per_trial_avg[i][j] = rt.avg_error[j];
        }
    }

    trace.mean.assign(grid.size(), kNaN);
    if (averaged) trace.avg_mean.assign(grid.size(), kNaN);
    for (std::size_t j = 0; j < grid.size(); ++j) {
        double sum = 0.0, asum = 0.0;
        int n = 0;
        for (int i = 0; i < setup.trials; ++i) {
            if (std::isfinite(trace.per_trial[i][j])) {
                sum += trace.per_trial[i][j];
                if (averaged) asum += trace.per_trial_avg[i][j];
                ++n;
            }
        }
        if (n > 0) {
            trace.mean[j] = sum / n;
            if (averaged) trace.avg_mean[j] = asum / n;
        }
    }

    auto t1 = std::chrono::steady_clock::now();
    trace.wallclock_sec = std::chrono::duration<double>(t1 - t0).count();
    return trace;
}

double fit_tail_slope(std::span<const std::int64_t> steps,
                      std::span<const double> errors, double tail_fraction) {
    if (steps.size() != errors.size()) {
        throw NotFittable("steps/errors size mismatch");
    }
    if (!(tail_fraction > 0.0) || tail_fraction > 1.0) {
        throw NotFittable("tail_fraction must lie in (0, 1]");
    }
    const std::size_t n = steps.size();
    auto window = static_cast<std::size_t>(
        std::llround(tail_fraction * static_cast<double>(n)));
    window = std::min(window, n);
    if (window < 10) {
        throw NotFittable("tail window needs at least 10 checkpoints");
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = n - window; i < n; ++i) {
        double e = errors[i];
        if (!(e > 0.0) || !std::isfinite(e)) {
            throw NotFittable("nonpositive or divergent error in tail window");
        }
        double x = std::log(static_cast<double>(steps[i]));
        double y = std::log(e);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double m = static_cast<double>(window);
    double denom = m * sxx - sx * sx;
    if (denom <= 0.0) throw NotFittable("degenerate abscissa in tail window");
    return (m * sxy - sx * sy) / denom;
}

double fit_tail_slope(const Trace& trace, double tail_fraction) {
    return fit_tail_slope(trace.steps, trace.mean, tail_fraction);
}

double fit_tail_slope_avg(const Trace& trace, double tail_fraction) {
    if (!trace.averaged()) throw NotFittable("trace has no averaged column");
    return fit_tail_slope(trace.steps, trace.avg_mean, tail_fraction);
}

namespace {

void write_cell(std::ostream& out, double x) {
    if (std::isfinite(x)) {
        out << format_double(x);
    } else {
        out << "div";
    }
}

}  // namespace

void write_trace_csv(std::ostream& out, const Trace& trace) {
    for (const auto& [k, v] : trace.meta) {
        out << "# meta: " << k << " = " << v << "\n";
    }
    out << "# meta: wallclock_sec = " << format_double(trace.wallclock_sec)
        << "\n";
    out << "t";
    for (std::size_t i = 0; i < trace.per_trial.size(); ++i) {
        out << ",trial_" << i;
    }
    out << ",mean";
    if (trace.averaged()) out << ",avg_mean";
    out << "\n";
    for (std::size_t j = 0; j < trace.steps.size(); ++j) {
        out << trace.steps[j];
        for (std::size_t i = 0; i < trace.per_trial.size(); ++i) {
            out << ",";
            write_cell(out, trace.per_trial[i][j]);
        }
        out << ",";
        write_cell(out, trace.mean[j]);
        if (trace.averaged()) {
            out << ",";
            write_cell(out, trace.avg_mean[j]);
        }
        out << "\n";
    }
}

void write_trace_csv(const std::string& path, const Trace& trace) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write trace file: " + path);
    write_trace_csv(out, trace);
}

std::vector<SweepPointResult> run_sweep(const RawConfig& base,
                                        const std::string& key,
                                        const std::vector<std::string>& values,
                                        const std::string& out_stem,
                                        bool parallel) {
    if (values.empty()) throw ConfigError("sweep grid is empty");
    std::vector<SweepPointResult> results;
    for (const std::string& value : values) {
        SweepPointResult r;
        r.value = value;
        try {
            RawConfig cfg = base;
            cfg.set(key, value);
            ExperimentSetup setup = resolve_experiment(cfg);
            Trace trace = run_experiment(setup, parallel);
            std::string sanitized = value;
            for (char& c : sanitized) {
                if (!std::isalnum(static_cast<unsigned char>(c))) c = '_';
            }
            write_trace_csv(out_stem + "_" + sanitized + ".csv", trace);
            r.final_error = trace.final_mean_error();
            r.samples = trace.samples_consumed;
            try {
                r.tail_slope = fit_tail_slope(trace, 0.5);
            } catch (const NotFittable&) {
                r.tail_slope = kNaN;
            }
            if (trace.all_diverged()) {
                r.failed = true;
                r.error_text = "all trials diverged";
            }
        } catch (const std::exception& e) {
            r.failed = true;
            r.error_text = e.what();
        }
        results.push_back(std::move(r));
    }
    return results;
}

DiagnoseSetup resolve_diagnose(const RawConfig& cfg) {
    DiagnoseSetup setup;
    setup.stream = build_stream(cfg);
    setup.alpha = resolve_auto(cfg, "diagnose.alpha", "auto",
                               1.0 / (2.0 * setup.stream.radius_sq));
    setup.horizon =
        parse_int("diagnose.horizon", cfg.get_or("diagnose.horizon", "100000"));
    setup.replicas = static_cast<int>(
        parse_int("diagnose.replicas", cfg.get_or("diagnose.replicas", "16")));
    setup.seed = static_cast<std::uint64_t>(
        parse_int("diagnose.seed", cfg.get_or("diagnose.seed", "1")));

    std::string v = cfg.get_or("diagnose.v", "random");
    if (v == "random") {
        Rng rng(derive_seed(setup.seed, 0x7666));  // 'vf'
        setup.v_fixed = rng.unit_sphere(setup.stream.dim);
    } else if (v == "e1") {
        setup.v_fixed = BVector::Zero(setup.stream.dim);
        setup.v_fixed[0] = 1.0;
    } else {
        setup.v_fixed = parse_vector(v);
        if (setup.v_fixed.size() != setup.stream.dim) {
            throw ConfigError("diagnose.v has wrong dimension");
        }
    }
    setup.meta = cfg.entries;
    setup.meta.emplace_back("resolved.radius_sq",
                            format_double(setup.stream.radius_sq));
    setup.meta.emplace_back("resolved.alpha", format_double(setup.alpha));
    return setup;
}

void write_diagnose_csv(std::ostream& out, const DiagnoseSetup& setup,
                        bool parallel) {
    ChainProbe probe;
    probe.v_fixed = setup.v_fixed;
    probe.alpha = setup.alpha;
    probe.horizon = setup.horizon;
    probe.replicas = setup.replicas;
    probe.seed = setup.seed;

    StationaryMeanReport stat =
        stationary_mean_check(probe, setup.stream, parallel);
    std::vector<MixingPoint> mixing =
        mixing_decay_probe(probe, setup.stream, parallel);

    for (const auto& [k, v] : setup.meta) {
        out << "# meta: " << k << " = " << v << "\n";
    }
    out << "# section: stationary-mean\n";
    out << "field,value\n";
    out << "rel_err," << format_double(stat.rel_err) << "\n";
    out << "target_norm," << format_double(stat.target.norm()) << "\n";
    out << "empirical_norm," << format_double(stat.empirical_mean.norm())
        << "\n";
    out << "# section: mixing-decay\n";
    out << "k,mean_distance\n";
    for (const MixingPoint& p : mixing) {
        out << p.k << "," << format_double(p.mean_distance) << "\n";
    }
}

}  // namespace genoja
