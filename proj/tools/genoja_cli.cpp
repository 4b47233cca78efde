#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "genoja/harness.hpp"

namespace {

namespace fs = std::filesystem;
using namespace genoja;

struct CommonFlags {
    std::string config_path;
    std::string out;
    std::int64_t seed = -1;
    std::int64_t trials = -1;
    std::int64_t horizon = -1;
    bool quiet = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool config_required) {
    auto* opt = cmd->add_option("--config", flags.config_path, "config file");
    if (config_required) opt->required();
    cmd->add_option("--seed", flags.seed, "override run.base_seed");
    cmd->add_option("--out", flags.out, "override output path");
    cmd->add_option("--trials", flags.trials, "override run.trials");
    cmd->add_option("--horizon", flags.horizon, "override run.horizon");
    cmd->add_flag("--quiet", flags.quiet, "suppress the summary line");
}

void apply_overrides(RawConfig& cfg, const CommonFlags& flags) {
    if (flags.seed >= 0) cfg.set("run.base_seed", std::to_string(flags.seed));
    if (!flags.out.empty()) cfg.set("run.out", flags.out);
    if (flags.trials >= 0) cfg.set("run.trials", std::to_string(flags.trials));
    if (flags.horizon >= 0) {
        cfg.set("run.horizon", std::to_string(flags.horizon));
    }
}

std::string describe(const Trace& trace) {
    std::ostringstream os;
    os << "final mean error = " << trace.final_mean_error();
    try {
        os << ", tail slope = " << fit_tail_slope(trace, 0.5);
    } catch (const NotFittable&) {
        os << ", tail slope = n/a";
    }
    if (trace.averaged()) {
        try {
            os << ", averaged tail slope = " << fit_tail_slope_avg(trace, 0.5);
        } catch (const NotFittable&) {
        }
    }
    return os.str();
}

int cmd_run(const CommonFlags& flags) {
    RawConfig cfg = RawConfig::parse_file(flags.config_path);
    apply_overrides(cfg, flags);
    ExperimentSetup setup = resolve_experiment(cfg);
    Trace trace = run_experiment(setup);
    write_trace_csv(setup.out_path, trace);
    if (!flags.quiet) {
        std::cout << setup.out_path << ": " << describe(trace) << "\n";
    }
    if (trace.all_diverged()) {
        std::cerr << "error: all trials diverged (partial CSV retained)\n";
        return 2;
    }
    return 0;
}

int cmd_sweep(const CommonFlags& flags) {
    RawConfig cfg = RawConfig::parse_file(flags.config_path);
    apply_overrides(cfg, flags);
    auto key = cfg.get("sweep.key");
    auto values_raw = cfg.get("sweep.values");
    if (!key || !values_raw) {
        throw ConfigError("sweep needs sweep.key and sweep.values");
    }
    std::vector<std::string> values;
    std::istringstream in(*values_raw);
    std::string v;
    while (in >> v) values.push_back(v);

    std::string out = cfg.get_or("run.out", "sweep.csv");
    std::string stem = out;
    if (stem.size() > 4 && stem.substr(stem.size() - 4) == ".csv") {
        stem = stem.substr(0, stem.size() - 4);
    }
    auto results = run_sweep(cfg, *key, values, stem);

    std::ofstream summary(stem + "_summary.csv");
    summary << "key,value,final_mean_error,tail_slope,samples,status\n";
    bool any_ok = false;
    for (const auto& r : results) {
        summary << *key << "," << r.value << ",";
        if (r.failed) {
            summary << "div,div," << r.samples << "," << r.error_text << "\n";
        } else {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.17g", r.final_error);
            summary << buf << ",";
            std::snprintf(buf, sizeof(buf), "%.17g", r.tail_slope);
            summary << buf << "," << r.samples << ",ok\n";
            any_ok = true;
        }
        if (!flags.quiet) {
            std::cout << *key << " = " << r.value << ": "
                      << (r.failed ? r.error_text
                                   : "final error " + std::to_string(r.final_error))
                      << "\n";
        }
    }
    return any_ok ? 0 : 2;
}

int cmd_diagnose(const CommonFlags& flags) {
    RawConfig cfg = RawConfig::parse_file(flags.config_path);
    if (!flags.out.empty()) cfg.set("diagnose.out", flags.out);
    DiagnoseSetup setup = resolve_diagnose(cfg);
    std::string out = cfg.get_or("diagnose.out", "diagnose.csv");
    std::ofstream os(out);
    if (!os) throw ConfigError("cannot write " + out);
    write_diagnose_csv(os, setup);
    if (!flags.quiet) std::cout << "diagnostics written to " << out << "\n";
    return 0;
}

int cmd_preset(const std::string& name, const CommonFlags& flags) {
    std::int64_t horizon = flags.horizon >= 0 ? flags.horizon : 100000;
    int trials = flags.trials >= 0 ? static_cast<int>(flags.trials) : 10;
    std::uint64_t base_seed =
        flags.seed >= 0 ? static_cast<std::uint64_t>(flags.seed) : 1000;
    fs::path out_dir = flags.out.empty() ? fs::path(".") : fs::path(flags.out);
    fs::create_directories(out_dir);

    auto curves = make_preset(name, horizon, trials, base_seed);
    std::ofstream summary(out_dir / "summary.csv");
    summary << "curve,final_mean_error,tail_slope,final_avg_error,avg_tail_slope,"
               "samples\n";
    for (const PresetCurve& curve : curves) {
        Trace trace = run_experiment(curve.setup);
        write_trace_csv((out_dir / (curve.label + ".csv")).string(), trace);
        char buf[64];
        summary << curve.label << ",";
        std::snprintf(buf, sizeof(buf), "%.17g", trace.final_mean_error());
        summary << buf << ",";
        double slope = std::nan("");
        try {
            slope = fit_tail_slope(trace, 0.5);
        } catch (const NotFittable&) {
        }
        std::snprintf(buf, sizeof(buf), "%.17g", slope);
        summary << buf << ",";
        if (trace.averaged()) {
            std::size_t last = trace.avg_mean.size() - 1;
            std::snprintf(buf, sizeof(buf), "%.17g", trace.avg_mean[last]);
            summary << buf << ",";
            double aslope = std::nan("");
            try {
                aslope = fit_tail_slope_avg(trace, 0.5);
            } catch (const NotFittable&) {
            }
            std::snprintf(buf, sizeof(buf), "%.17g", aslope);
            summary << buf << ",";
        } else {
            summary << ",,";
        }
        summary << trace.samples_consumed << "\n";
        if (!flags.quiet) {
            std::cout << name << "/" << curve.label << ": " << describe(trace)
                      << "\n";
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"streaming generalized eigenvector / CCA benchmark harness"};
    app.require_subcommand(1);

    CommonFlags run_flags, sweep_flags, diag_flags, preset_flags;
    std::string preset_name;

    CLI::App* run_cmd = app.add_subcommand("run", "run one experiment config");
    add_common(run_cmd, run_flags, true);

    CLI::App* sweep_cmd =
        app.add_subcommand("sweep", "run a parameter grid from a config");
    add_common(sweep_cmd, sweep_flags, true);

    CLI::App* diag_cmd = app.add_subcommand(
        "diagnose", "stationary-mean and mixing probes for a stream");
    add_common(diag_cmd, diag_flags, true);

    CLI::App* preset_cmd =
        app.add_subcommand("preset", "run a named benchmark preset");
    preset_cmd->add_option("name", preset_name, "preset name")
        ->required()
        ->check(CLI::IsMember(genoja::preset_names()));
    add_common(preset_cmd, preset_flags, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) return cmd_run(run_flags);
        if (sweep_cmd->parsed()) return cmd_sweep(sweep_flags);
        if (diag_cmd->parsed()) return cmd_diagnose(diag_flags);
        if (preset_cmd->parsed()) return cmd_preset(preset_name, preset_flags);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
