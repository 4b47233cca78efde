#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "genoja/core.hpp"
#include "genoja/solvers.hpp"
#include "genoja/streams.hpp"

namespace genoja {

/// Flat `key = value` config with `[section]` headers. Keys are stored
/// section-qualified ("run.horizon") in file order for the CSV meta echo.
struct RawConfig {
    std::vector<std::pair<std::string, std::string>> entries;

    static RawConfig parse_file(const std::string& path);
    static RawConfig parse_string(const std::string& text,
                                  const std::string& origin = "<string>");

    std::optional<std::string> get(const std::string& key) const;
    std::string get_or(const std::string& key, const std::string& fallback) const;
    /// Insert or replace (CLI overrides, sweep grid points).
    void set(const std::string& key, const std::string& value);
};

/// Fully resolved, runnable experiment.
struct ExperimentSetup {
    StreamSpec stream;
    EigenReference reference;
    SolverKind solver = SolverKind::GenOja;
    StepSchedule schedule;
    int tau = 1;
    double alpha_inner = 0.0;
    std::int64_t horizon = 0;
    int trials = 1;
    std::uint64_t base_seed = 0;
    int checkpoint_count = 200;
    std::string out_path;
    std::vector<std::pair<std::string, std::string>> meta;
};

ExperimentSetup resolve_experiment(const RawConfig& config);

/// Multi-trial error trace. Cells are NaN where a trial had already
/// diverged; the CSV writer emits the literal token `div` there.
struct Trace {
    std::vector<std::int64_t> steps;
    std::vector<std::vector<double>> per_trial;      // [trial][row]
    std::vector<std::vector<double>> per_trial_avg;  // averaged solver only
    std::vector<double> mean;
    std::vector<double> avg_mean;
    std::vector<std::optional<std::int64_t>> diverged_at;  // per trial
    std::int64_t samples_consumed = 0;
    std::vector<std::pair<std::string, std::string>> meta;
    double wallclock_sec = 0.0;

    bool averaged() const { return !avg_mean.empty(); }
    bool all_diverged() const;
    double final_mean_error() const;
};

/// Log-spaced integer grid over [1, horizon]: includes both endpoints,
/// strictly increasing, duplicates removed after rounding.
std::vector<std::int64_t> log_spaced_checkpoints(std::int64_t horizon,
                                                 int count);

/// Trial i runs with seed base_seed + i. Trials execute in parallel
/// (OpenMP) or serially; both orders produce bit-identical traces.
Trace run_experiment(const ExperimentSetup& setup, bool parallel = true);

/// OLS slope of log(error) vs log(t) over the last tail_fraction of the
/// checkpoints. Throws NotFittable when the window has fewer than 10 points
/// or contains nonpositive/nonfinite errors.
double fit_tail_slope(std::span<const std::int64_t> steps,
                      std::span<const double> errors, double tail_fraction);
double fit_tail_slope(const Trace& trace, double tail_fraction = 0.5);
double fit_tail_slope_avg(const Trace& trace, double tail_fraction = 0.5);

/// CSV: `# meta:` block, then header `t,trial_0,...,mean[,avg_mean]`.
void write_trace_csv(std::ostream& out, const Trace& trace);
void write_trace_csv(const std::string& path, const Trace& trace);

/// Named experiment collections reproducing the benchmark figures at desk
/// scale (d=20, T=1e5, 10 trials by default).
struct PresetCurve {
    std::string label;
    ExperimentSetup setup;
};

std::vector<std::string> preset_names();
std::vector<PresetCurve> make_preset(const std::string& name,
                                     std::int64_t horizon = 100000,
                                     int trials = 10,
                                     std::uint64_t base_seed = 1000,
                                     std::uint64_t problem_seed = 7);

struct SweepPointResult {
    std::string value;
    double final_error = 0.0;
    double tail_slope = 0.0;
    std::int64_t samples = 0;
    bool failed = false;
    std::string error_text;
};

/// One run per grid value of `key`; per-point CSVs land next to `out` with
/// the value appended. Failures are recorded and the sweep continues.
std::vector<SweepPointResult> run_sweep(const RawConfig& base,
                                        const std::string& key,
                                        const std::vector<std::string>& values,
                                        const std::string& out_stem,
                                        bool parallel = true);

struct DiagnoseSetup {
    StreamSpec stream;
    BVector v_fixed;
    double alpha = 0.0;
    std::int64_t horizon = 0;
    int replicas = 1;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, std::string>> meta;
};

DiagnoseSetup resolve_diagnose(const RawConfig& config);

/// Runs the stationary-mean and mixing-decay probes; emits a sectioned CSV.
void write_diagnose_csv(std::ostream& out, const DiagnoseSetup& setup,
                        bool parallel = true);

}  // namespace genoja
