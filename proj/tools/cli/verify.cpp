#include "cli/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <optional>

#include "cli/commands.hpp"
#include "leedecay/errors.hpp"

namespace leedecay::cli {
namespace {

using json = nlohmann::ordered_json;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

double rel_diff(double a, double b) {
    if (a == b) return 0.0;
    return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

struct Context {
    const RunConfig& config;
    unsigned threads;
    ArtifactMeta meta;
    std::vector<Artifact> artifacts;

    // Results shared between criteria.
    std::optional<PoleResult> langevin_pole;
    std::optional<LangevinRun> langevin;
    std::string master_rows;
    RunConfig master_config;
};

void set(CriterionResult& r, bool ok, std::string detail) {
    r.status = ok ? Status::Pass : Status::Fail;
    r.detail = std::move(detail);
}

void skip(CriterionResult& r, std::string why) {
    r.status = Status::Skip;
    r.detail = std::move(why);
}

std::string strip_header(const std::string& csv) {
    // Drop the '#' block so row content can be compared across configs.
    std::size_t pos = 0;
    while (pos < csv.size() && csv[pos] == '#') pos = csv.find('\n', pos) + 1;
    return csv.substr(pos);
}

void kernel_identities(Context& ctx, CriterionResult& r) {
    const RunConfig& c = ctx.config;
    const double half = std::max(std::abs(c.kernels.e_min), std::abs(c.kernels.e_max));
    KernelSettings symmetric = c.kernels;
    symmetric.e_min = -half;
    symmetric.e_max = half;
    std::vector<double> E = kernel_energies(symmetric);
    for (std::size_t i = 0; i < E.size() / 2; ++i) E[E.size() - 1 - i] = -E[i];
    const KernelTable t = kernel_table(c.model, grid_for(c, c.grid.n_modes), E, ctx.threads);
    double odd_defect = 0.0, below = 0.0, min_b = 0.0;
    for (std::size_t i = 0; i < E.size(); ++i) {
        const double sign = E[i] > 0 ? 1.0 : (E[i] < 0 ? -1.0 : 0.0);
        odd_defect = std::max(odd_defect, std::abs(t.A[i] - sign * t.B[i]));
        if (E[i] <= c.model.threshold()) below = std::max(below, std::abs(t.B[i]));
        min_b = std::min(min_b, t.B[i]);
    }
    ctx.artifacts.push_back({"kernels.csv", kernels_csv(ctx.meta, t)});
    r.metrics = {{"points", E.size()}, {"max_odd_defect", odd_defect}, {"max_B_below_threshold", below},
                 {"min_B", min_b}};
    set(r, odd_defect == 0.0 && below == 0.0 && min_b >= 0.0,
        "max|A - sign(E) B| = " + fmt(odd_defect) + ", max B below threshold = " + fmt(below) +
            ", min B = " + fmt(min_b));
}

void width_cross_check(Context& ctx, CriterionResult& r) {
    const SectorRun run = run_sector(ctx.config, ctx.threads);
    ctx.artifacts.push_back({"survival.csv", survival_csv(ctx.meta, run.survival)});
    if (!run.fit) return skip(r, "stable regime: no decay width");
    const double err = std::abs(run.fit->rate - run.pole.Gamma) / run.pole.Gamma;
    r.metrics = {{"n_modes", ctx.config.sector.n_modes},
                 {"Gamma_pole", run.pole.Gamma},
                 {"Gamma_fit", run.fit->rate},
                 {"relative_error", err}};
    set(r, err < 0.05, "pole " + fmt(run.pole.Gamma) + " vs fit " + fmt(run.fit->rate) + ", rel err " + fmt(err));
}

void stable_bound_state(Context& ctx, CriterionResult& r) {
    ModelParams p = ctx.config.model;
    p.m_V0 = p.threshold() - 0.6 * p.mu;  // 10.4 for the default model
    RunConfig below = ctx.config;
    below.model = p;
    const MomentumGrid grid = grid_for(below, ctx.config.sector.n_modes);
    const StableState s = diagonalize_stable(build_sector(p, grid));
    const double root = physical_mass(p, grid);
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.n_modes(); ++i) {
        const double w = omega(grid.k_values[i], p);
        const double expected = p.lambda0 * form_factor(w, p) / std::sqrt(2.0 * w) / (s.m_V - p.m_N - w);
        if (expected == 0.0) {
            worst = std::max(worst, s.g[i] == 0.0 ? 0.0 : 1.0);
        } else {
            worst = std::max(worst, std::abs(s.g[i] - expected) / std::abs(expected));
        }
    }
    const double gap = std::abs(s.m_V - root);
    r.metrics = {{"bare_mass_v", p.m_V0}, {"eigenvalue", s.m_V},  {"dispersive_root", root},
                 {"difference", gap},     {"max_weight_deviation", worst}, {"Z_V_discrete", s.Z_V_discrete}};
    set(r, gap < 1e-4 && worst < 1e-6,
        "|eigenvalue - root| = " + fmt(gap) + ", max weight deviation " + fmt(worst));
}

void master_run(Context& ctx, CriterionResult& conservation, CriterionResult& entropy) {
    RunConfig c = ctx.config;
    c.master.variant = DissipatorVariant::Hermitized;
    c.master.initial_state = InitialState::ExcitedV;
    ctx.master_config = c;

    std::vector<double> S{-1.0};
    std::vector<double> times{0.0};
    std::vector<std::pair<std::size_t, double>> production;
    std::size_t expected_steps = 0;
    std::size_t next_sample = 0;
    std::size_t sample_every = 0;
    GeneratorSpec gen;
    {
        // Dry layout pass: the step count decides which steps to sample.
        const MomentumGrid grid = grid_for(c, c.master.n_modes);
        const PoleResult pole = find_pole(c.model, grid);
        gen = build_generator(c.model, grid, pole, c.master.variant);
        if (c.master.decoherence_rate) gen.kappa = *c.master.decoherence_rate;
        const double t_max = c.master.t_max.value_or(3.0 * decay_time(pole));
        const double dt = c.master.dt.value_or(max_stable_step(gen));
        const auto t_grid = linspace(0.0, t_max, c.master.t_points);
        for (std::size_t i = 1; i < t_grid.size(); ++i) {
            expected_steps += static_cast<std::size_t>(std::ceil((t_grid[i] - t_grid[i - 1]) / dt - 1e-9));
        }
        sample_every = std::max<std::size_t>(1, expected_steps / 9);
        next_sample = sample_every;
    }
    EvolutionOptions options;
    options.on_step = [&](std::size_t step, double t, const Eigen::MatrixXcd& rho) {
        const DensityMatrix m(rho);
        S.push_back(linear_entropy(m));
        times.push_back(t);
        if (step == next_sample && step + 2 < expected_steps) {
            production.emplace_back(step, entropy_production(gen, m));
            next_sample += sample_every;
        }
    };
    const MasterRun run = run_master(c, options);
    const EvolutionResult& e = run.evolution;
    const std::string csv = master_csv(ctx.meta, run);
    ctx.master_rows = strip_header(csv);
    ctx.artifacts.push_back({"master.csv", csv});

    conservation.metrics = {{"n_modes", c.master.n_modes}, {"steps", e.steps}, {"dt", run.dt},
                            {"t_end", e.times.back()},     {"max_trace_defect", e.max_trace_defect},
                            {"max_hermiticity_defect", e.max_hermiticity_defect}};
    set(conservation, e.max_trace_defect < 1e-10,
        "max |Tr rho - 1| = " + fmt(e.max_trace_defect) + " over " + std::to_string(e.steps) + " steps");

    double worst_rate = 0.0;
    json samples = json::array();
    for (const auto& [step, rate] : production) {
        const double h = times[step + 1] - times[step];
        const double slope = (S[step - 2] - 8.0 * S[step - 1] + 8.0 * S[step + 1] - S[step + 2]) / (12.0 * h);
        const double err = rate > 0.0 ? std::abs(slope - rate) / rate : std::abs(slope);
        worst_rate = std::max(worst_rate, err);
        samples.push_back({{"t", times[step]}, {"finite_difference", slope}, {"production", rate}});
    }
    double worst_drop = 0.0;
    for (std::size_t i = 1; i < S.size(); ++i) worst_drop = std::max(worst_drop, S[i - 1] - S[i]);
    const double s0 = linear_entropy(e.snapshots.front());
    entropy.metrics = {{"entropy_initial", s0},
                       {"entropy_final", S.back()},
                       {"max_step_decrease", worst_drop},
                       {"max_rate_relative_error", worst_rate},
                       {"samples", samples}};
    set(entropy, s0 == -1.0 && worst_drop <= 1e-12 && worst_rate < 1e-6 && !production.empty(),
        "S(0) = " + fmt(s0) + ", max step decrease " + fmt(worst_drop) + ", dS/dt vs production rel err " +
            fmt(worst_rate) + " at " + std::to_string(production.size()) + " steps");
}

void two_level_dephasing(Context& ctx, CriterionResult& r) {
    const MomentumGrid grid = grid_for(ctx.config, ctx.config.master.n_modes);
    const PoleResult pole = find_pole(ctx.config.model, grid);
    double kappa = ctx.config.master.decoherence_rate.value_or(pole.gamma_friction * pole.m_V);
    std::string note;
    if (!(kappa > 0.0)) {
        kappa = 1.0;
        note = " (model has no friction; unit rate used)";
    }
    GeneratorSpec gen;
    gen.diagonal = Eigen::VectorXd::Zero(2);
    gen.couplings = Eigen::VectorXd::Zero(2);
    gen.kappa = kappa;
    gen.variant = DissipatorVariant::Hermitized;
    const auto t = linspace(0.0, 5.0 / kappa, 201);
    const DensityMatrix rho0 = make_initial_state(InitialState::VacuumVSuperposition, 2);
    const EvolutionResult e = evolve_density(gen, rho0, t, 0.01 / kappa);
    double worst = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const std::complex<double> exact = rho0(kVacuum, kExcited) * std::exp(-kappa * t[i]);
        worst = std::max(worst, std::abs(e.snapshots[i](kVacuum, kExcited) - exact));
    }
    r.metrics = {{"kappa", kappa}, {"max_abs_error", worst}};
    set(r, worst < 1e-8, "max |rho_0V - rho_0V(0) exp(-kappa t)| = " + fmt(worst) + note);
}

void langevin_mean_decay(Context& ctx, CriterionResult& r) {
    const PoleResult pole = find_pole(ctx.config.model, grid_for(ctx.config, ctx.config.grid.n_modes));
    ctx.langevin_pole = pole;
    if (!(pole.gamma_friction > 0.0)) return skip(r, "stable regime: no friction");
    ctx.langevin = run_langevin(ctx.config, ctx.threads, pole);
    const LangevinRun& run = *ctx.langevin;
    ctx.artifacts.push_back({"langevin.csv", langevin_csv(ctx.meta, run.ensemble)});
    const ExponentialFit& fit = run.ensemble.mean_decay;
    const double expected = run.coefficients.mean_decay_rate();
    const double dev = std::abs(fit.rate - expected);
    r.metrics = {{"n_trajectories", run.ensemble.n_trajectories},
                 {"rate", fit.rate},
                 {"rate_stderr", fit.rate_stderr},
                 {"expected_rate", expected},
                 {"deviation_in_stderr", fit.rate_stderr > 0.0 ? dev / fit.rate_stderr : 0.0}};
    set(r, !fit.degenerate && fit.rate_stderr > 0.0 && dev < 3.0 * fit.rate_stderr,
        "rate " + fmt(fit.rate) + " +- " + fmt(fit.rate_stderr) + " vs " + fmt(expected));
}

void fluctuation_dissipation(Context& ctx, CriterionResult& r) {
    if (!ctx.langevin) return skip(r, "stable regime: no friction");
    RunConfig second = ctx.config;
    second.model.lambda0 *= 1.5;
    second.model.m_V0 += 0.5 * second.model.mu;
    const PoleResult other = find_pole(second.model, grid_for(second, second.grid.n_modes));
    if (!(other.gamma_friction > 0.0)) return skip(r, "second setting is stable");
    const LangevinRun run2 = run_langevin(second, ctx.threads, other);

    json settings = json::array();
    bool ok = true;
    std::string detail;
    for (const LangevinRun* run : {static_cast<const LangevinRun*>(&*ctx.langevin), &run2}) {
        const double v = run->ensemble.mean_sq.back();
        const double err = run->ensemble.stderr_sq.back();
        ok = ok && std::abs(v - 0.5) < 3.0 * err;
        settings.push_back({{"gamma_friction", run->pole.gamma_friction},
                            {"m_V", run->pole.m_V},
                            {"stationary_mean_sq", v},
                            {"stderr", err}});
        detail += (detail.empty() ? "" : "; ") + std::string("<|phi|^2> = ") + fmt(v) + " +- " + fmt(err) +
                  " (gamma " + fmt(run->pole.gamma_friction) + ", m_V " + fmt(run->pole.m_V) + ")";
    }
    const bool distinct = rel_diff(run2.pole.gamma_friction, ctx.langevin->pole.gamma_friction) > 1e-3 &&
                          rel_diff(run2.pole.m_V, ctx.langevin->pole.m_V) > 1e-3;
    r.metrics = {{"settings", settings}};
    set(r, ok && distinct, detail);
}

void coupling_scaling(Context& ctx, CriterionResult& r) {
    const ModelParams p = ctx.config.model;
    ModelParams q = p;
    q.lambda0 = 2.0 * p.lambda0;
    const MomentumGrid grid = grid_for(ctx.config, ctx.config.grid.n_modes);
    const double w_max = omega(grid.k_max, p);
    double worst = 0.0;
    auto check = [&](double a, double b) { worst = std::max(worst, rel_diff(b, 4.0 * a)); };
    for (double frac : {-0.5, 0.25, 0.5, 0.75}) {
        const double E = p.m_N + p.mu + frac * (w_max - p.mu);
        const auto s1 = self_energy(E, p, grid), s2 = self_energy(E, q, grid);
        check(s1.real(), s2.real());
        check(s1.imag(), s2.imag());
        check(noise_kernel(E, p), noise_kernel(E, q));
        const RenormConstants r1 = renorm_constants(p, grid, E), r2 = renorm_constants(q, grid, E);
        check(r1.C0, r2.C0);
        check(r1.C1, r2.C1);
    }
    const PoleResult pole1 = find_pole(p, grid), pole2 = find_pole(q, grid);
    // gamma carries the form factor at each pole's own on-shell energy.
    const double f1 = form_factor(pole1.m_V - p.m_N, p), f2 = form_factor(pole2.m_V - q.m_N, q);
    if (pole1.unstable && pole2.unstable && f1 > 0.0 && f2 > 0.0) {
        check(pole1.gamma_friction / f1, pole2.gamma_friction / f2);
    }

    ModelParams free = p;
    free.lambda0 = 0.0;
    const PoleResult fp = find_pole(free, grid);
    RunConfig free_config = ctx.config;
    free_config.model = free;
    free_config.master.n_modes = 16;
    free_config.master.t_points = 11;
    free_config.master.t_max = 50.0;
    free_config.master.decoherence_rate.reset();
    free_config.master.variant = DissipatorVariant::Hermitized;
    free_config.master.initial_state = InitialState::ExcitedV;
    double drift = 0.0;
    EvolutionOptions options;
    options.on_step = [&](std::size_t, double, const Eigen::MatrixXcd& rho) {
        drift = std::max(drift, std::abs(linear_entropy(DensityMatrix(rho)) + 1.0));
    };
    run_master(free_config, options);
    const bool free_ok = fp.Gamma == 0.0 && fp.Z_V == 1.0 && fp.m_V == free.m_V0 && drift <= 1e-12;

    r.metrics = {{"max_relative_deviation_from_4x", worst},
                 {"free_Gamma", fp.Gamma},
                 {"free_Z_V", fp.Z_V},
                 {"free_entropy_drift", drift}};
    set(r, worst < 1e-12 && free_ok,
        "max rel deviation from 4x = " + fmt(worst) + "; free theory Gamma = " + fmt(fp.Gamma) +
            ", Z_V = " + fmt(fp.Z_V) + ", S drift " + fmt(drift));
}

void recurrence_scaling(Context& ctx, CriterionResult& r) {
    const ModelParams& p = ctx.config.model;
    json runs = json::array();
    std::vector<double> times;
    for (std::size_t n : {128u, 256u, 512u}) {
        const MomentumGrid grid = grid_for(ctx.config, n);
        const PoleResult pole = find_pole(p, grid);
        if (!pole.unstable || !(pole.Gamma > 0.0)) return skip(r, "stable regime: no decay to revive from");
        RecurrenceOptions options;
        options.threshold = 0.5 * pole.Z_V * pole.Z_V;
        const auto t = recurrence_estimate(build_sector(p, grid), pole.Gamma, options);
        runs.push_back({{"n_modes", n}, {"recurrence_time", t ? json(*t) : json(nullptr)}});
        if (!t) {
            r.metrics = {{"runs", runs}};
            return set(r, false, "no recurrence found for n_modes = " + std::to_string(n));
        }
        times.push_back(*t);
    }
    const double r1 = times[1] / times[0], r2 = times[2] / times[1];
    r.metrics = {{"runs", runs}, {"ratios", {r1, r2}}};
    set(r, std::abs(r1 - 2.0) <= 0.3 && std::abs(r2 - 2.0) <= 0.3,
        "t_rec = " + fmt(times[0]) + ", " + fmt(times[1]) + ", " + fmt(times[2]) + "; ratios " + fmt(r1) + ", " +
            fmt(r2));
}

void determinism(Context& ctx, CriterionResult& r) {
    // Rerender every artifact with a different thread count and compare bytes.
    const unsigned other = ctx.threads == 1 ? 3 : 1;
    std::vector<std::string> mismatched;
    std::size_t compared = 0;
    auto compare = [&](const std::string& name, const std::string& again) {
        ++compared;
        for (const Artifact& a : ctx.artifacts) {
            if (a.name == name && a.content != again) mismatched.push_back(name);
        }
    };
    Context again{ctx.config, other, ctx.meta, {}, {}, {}, {}, ctx.config};
    CriterionResult scratch;
    kernel_identities(again, scratch);
    width_cross_check(again, scratch);
    for (const Artifact& a : again.artifacts) compare(a.name, a.content);
    if (ctx.langevin) {
        const LangevinRun run = run_langevin(ctx.config, other, ctx.langevin_pole);
        compare("langevin.csv", langevin_csv(ctx.meta, run.ensemble));
    }
    if (!ctx.master_rows.empty()) {
        // Re-evolve the opening tenth of the master run; RK4 steps per segment
        // are fixed by the grid, so the prefix must agree bit for bit.
        const std::size_t limit = std::max<std::size_t>(2, ctx.master_config.master.t_points / 10);
        const std::string prefix = strip_header(master_csv(ctx.meta, run_master(ctx.master_config, {}, limit)));
        ++compared;
        if (ctx.master_rows.compare(0, prefix.size(), prefix) != 0) mismatched.push_back("master.csv");
    }
    std::string names;
    for (const auto& m : mismatched) names += (names.empty() ? "" : ", ") + m;
    r.metrics = {{"artifacts_compared", compared}, {"mismatched", mismatched}};
    set(r, mismatched.empty(),
        mismatched.empty() ? std::to_string(compared) + " artifacts byte-identical on rerun"
                           : "differs on rerun: " + names);
}

}  // namespace

std::string to_string(Status s) {
    switch (s) {
        case Status::Pass:
            return "pass";
        case Status::Fail:
            return "fail";
        case Status::Skip:
            return "skip";
    }
    return "?";
}

bool VerifyReport::passed() const {
    return std::none_of(criteria.begin(), criteria.end(),
                        [](const CriterionResult& r) { return r.status == Status::Fail; });
}

std::string format_line(const CriterionResult& r) {
    std::string tag = r.status == Status::Pass ? "[PASS]" : (r.status == Status::Fail ? "[FAIL]" : "[SKIP]");
    char timing[64];
    if (r.budget_seconds > 0.0) {
        std::snprintf(timing, sizeof timing, " (%.2f s, budget %.0f s)", r.seconds, r.budget_seconds);
    } else {
        std::snprintf(timing, sizeof timing, " (%.2f s)", r.seconds);
    }
    return tag + " " + std::to_string(r.id) + " " + r.name + ": " + r.detail + timing;
}

VerifyReport run_verify(const RunConfig& config, unsigned threads,
                        const std::function<void(const CriterionResult&)>& on_result) {
    Context ctx{config, threads, meta_for(config), {}, {}, {}, {}, config};
    VerifyReport report;
    report.criteria.resize(11);
    const std::pair<const char*, double> names[] = {
        {"kernel_identities", 1},       {"width_cross_check", 60},  {"stable_bound_state", 30},
        {"probability_conservation", 0}, {"entropy_monotonicity", 0}, {"two_level_dephasing", 1},
        {"langevin_mean_decay", 60},    {"fluctuation_dissipation", 0}, {"coupling_scaling", 0},
        {"recurrence_scaling", 120},    {"determinism", 0}};
    for (int i = 0; i < 11; ++i) {
        report.criteria[i].id = i + 1;
        report.criteria[i].name = names[i].first;
        report.criteria[i].budget_seconds = names[i].second;
    }

    using clock = std::chrono::steady_clock;
    auto guarded = [&](CriterionResult& r, auto&& body) {
        const auto start = clock::now();
        try {
            body(r);
        } catch (const std::exception& e) {
            r.status = Status::Fail;
            r.detail = std::string("error: ") + e.what();
        }
        r.seconds = std::chrono::duration<double>(clock::now() - start).count();
    };
    auto finish = [&](const CriterionResult& r) {
        if (on_result) on_result(r);
    };
    auto& c = report.criteria;

    guarded(c[0], [&](CriterionResult& r) { kernel_identities(ctx, r); });
    finish(c[0]);
    guarded(c[1], [&](CriterionResult& r) { width_cross_check(ctx, r); });
    finish(c[1]);
    guarded(c[2], [&](CriterionResult& r) { stable_bound_state(ctx, r); });
    finish(c[2]);
    {
        // Criteria 4 and 5 share one master run.
        const auto start = clock::now();
        try {
            master_run(ctx, c[3], c[4]);
        } catch (const std::exception& e) {
            for (CriterionResult* r : {&c[3], &c[4]}) {
                r->status = Status::Fail;
                r->detail = std::string("error: ") + e.what();
            }
        }
        c[3].seconds = c[4].seconds = std::chrono::duration<double>(clock::now() - start).count();
        finish(c[3]);
        finish(c[4]);
    }
    guarded(c[5], [&](CriterionResult& r) { two_level_dephasing(ctx, r); });
    finish(c[5]);
    guarded(c[6], [&](CriterionResult& r) { langevin_mean_decay(ctx, r); });
    finish(c[6]);
    guarded(c[7], [&](CriterionResult& r) { fluctuation_dissipation(ctx, r); });
    finish(c[7]);
    guarded(c[8], [&](CriterionResult& r) { coupling_scaling(ctx, r); });
    finish(c[8]);
    guarded(c[9], [&](CriterionResult& r) { recurrence_scaling(ctx, r); });
    finish(c[9]);
    guarded(c[10], [&](CriterionResult& r) { determinism(ctx, r); });
    finish(c[10]);

    json criteria = json::array();
    for (const CriterionResult& r : report.criteria) {
        criteria.push_back({{"id", r.id},
                            {"name", r.name},
                            {"status", to_string(r.status)},
                            {"detail", r.detail},
                            {"metrics", r.metrics}});
    }
    json body{{"passed", report.passed()}, {"criteria", criteria}};
    report.artifacts = std::move(ctx.artifacts);
    report.artifacts.push_back({"report.json", json_document(ctx.meta, "verify", std::move(body))});
    return report;
}

}  // namespace leedecay::cli
