#include <cmath>
#include <cstdio>

#include "genoja/harness.hpp"

namespace genoja {

namespace {

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

ExperimentSetup base_setup(const StreamSpec& stream,
                           const EigenReference& reference,
                           std::int64_t horizon, int trials,
                           std::uint64_t base_seed) {
    ExperimentSetup s;
    s.stream = stream;
    s.reference = reference;
    s.horizon = horizon;
    s.trials = trials;
    s.base_seed = base_seed;
    s.checkpoint_count = 200;
    return s;
}

void stamp_meta(PresetCurve& curve, const std::string& preset) {
    ExperimentSetup& s = curve.setup;
    s.meta.clear();
    s.meta.emplace_back("preset.name", preset);
    s.meta.emplace_back("preset.curve", curve.label);
    s.meta.emplace_back("stream.kind", to_string(s.stream.kind));
    s.meta.emplace_back("stream.dim", std::to_string(s.stream.dim));
    s.meta.emplace_back("stream.seed", std::to_string(s.stream.seed));
    s.meta.emplace_back("solver.kind", to_string(s.solver));
    if (s.solver == SolverKind::TwoStep) {
        s.meta.emplace_back("solver.tau", std::to_string(s.tau));
        s.meta.emplace_back("solver.alpha_inner", fmt(s.alpha_inner));
    }
    s.meta.emplace_back("schedule.alpha",
                        s.schedule.alpha_rule == AlphaRule::Constant
                            ? "constant"
                            : "log-decay");
    s.meta.emplace_back("schedule.alpha_value", fmt(s.schedule.alpha_param));
    s.meta.emplace_back("schedule.beta",
                        s.schedule.beta_rule == BetaRule::InverseT
                            ? "inverse-t"
                            : (s.schedule.beta_rule == BetaRule::InverseSqrtT
                                   ? "inverse-sqrt-t"
                                   : "constant"));
    s.meta.emplace_back("schedule.beta_value", fmt(s.schedule.beta_param));
    s.meta.emplace_back("schedule.offset", fmt(s.schedule.offset));
    s.meta.emplace_back("run.horizon", std::to_string(s.horizon));
    s.meta.emplace_back("run.trials", std::to_string(s.trials));
    s.meta.emplace_back("run.base_seed", std::to_string(s.base_seed));
    s.meta.emplace_back("resolved.radius_sq", fmt(s.stream.radius_sq));
    s.meta.emplace_back("resolved.lambda1", fmt(s.reference.eigenvalues[0]));
    s.meta.emplace_back("resolved.gap", fmt(s.reference.gap));
}

}  // namespace

std::vector<std::string> preset_names() {
    return {"fig1-left", "fig1-middle", "fig1-right"};
}

std::vector<PresetCurve> make_preset(const std::string& name,
                                     std::int64_t horizon, int trials,
                                     std::uint64_t base_seed,
                                     std::uint64_t problem_seed) {
    constexpr int kDim = 20;
    auto [stream, population] = make_gaussian_gev_stream(kDim, problem_seed);
    EigenReference reference = solve_reference(population);
    if (!reference.gap_usable) {
        throw InvalidSchedule("preset problem has a degenerate eigengap");
    }

    const double r_sq = stream.radius_sq;
    const double alpha_ls = 1.0 / (2.0 * r_sq);  // least-squares step scale
    const double alpha_star = 1.0 / r_sq;
    const double beta_star = 6.0 / reference.gap;
    const double offset = static_cast<double>(kDim) * kDim;

    std::vector<PresetCurve> curves;
    if (name == "fig1-left") {
        PresetCurve gen{"gen-oja",
                        base_setup(stream, reference, horizon, trials, base_seed)};
        gen.setup.solver = SolverKind::GenOja;
        gen.setup.schedule = make_schedule(AlphaRule::LogDecay, alpha_ls,
                                           BetaRule::InverseT, beta_star, offset);
        curves.push_back(std::move(gen));
        for (int tau : {10, 1000, 10000}) {
            PresetCurve c{"two-step-tau" + std::to_string(tau),
                          base_setup(stream, reference, horizon, trials,
                                     base_seed)};
            c.setup.solver = SolverKind::TwoStep;
            c.setup.tau = tau;
            c.setup.alpha_inner = alpha_ls;
            c.setup.schedule = make_schedule(AlphaRule::Constant, alpha_ls,
                                             BetaRule::InverseT, beta_star,
                                             offset);
            curves.push_back(std::move(c));
        }
    } else if (name == "fig1-middle") {
        const std::pair<const char*, double> grid[] = {
            {"alpha-star", alpha_star},
            {"alpha-star-over-8", alpha_star / 8.0},
            {"alpha-star-over-16", alpha_star / 16.0},
        };
        for (const auto& [label, alpha] : grid) {
            PresetCurve c{label, base_setup(stream, reference, horizon, trials,
                                            base_seed)};
            c.setup.solver = SolverKind::GenOja;
            c.setup.schedule = make_schedule(AlphaRule::Constant, alpha,
                                             BetaRule::InverseT, beta_star,
                                             offset);
            curves.push_back(std::move(c));
        }
    } else if (name == "fig1-right") {
        struct Variant {
            const char* label;
            BetaRule rule;
            double scale;
        };
        const Variant grid[] = {
            {"beta-inv-t", BetaRule::InverseT, 1.0},
            {"beta-inv-t-over-16", BetaRule::InverseT, 1.0 / 16.0},
            {"beta-inv-sqrt-t", BetaRule::InverseSqrtT, 1.0},
            {"beta-inv-sqrt-t-over-16", BetaRule::InverseSqrtT, 1.0 / 16.0},
        };
        for (const Variant& v : grid) {
            PresetCurve c{v.label, base_setup(stream, reference, horizon,
                                              trials, base_seed)};
            c.setup.solver = SolverKind::GenOjaAveraged;
            c.setup.schedule = make_schedule(AlphaRule::Constant, alpha_ls,
                                             v.rule, beta_star * v.scale, 0.0);
            curves.push_back(std::move(c));
        }
    } else {
        throw ConfigError("unknown preset: " + name);
    }

    for (PresetCurve& c : curves) stamp_meta(c, name);
    return curves;
}

}  // namespace genoja
