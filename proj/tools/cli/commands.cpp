#include "cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "leedecay/errors.hpp"

namespace leedecay::cli {
namespace {

using json = nlohmann::ordered_json;

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::vector<Artifact> single(std::string name, std::string content) {
    std::vector<Artifact> out;
    out.push_back({std::move(name), std::move(content)});
    return out;
}

}  // namespace

MomentumGrid grid_for(const RunConfig& config, std::size_t n_modes) {
    return make_grid(config.model, n_modes, config.grid.k_max.value_or(default_k_max(config.model)));
}

std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) {
        t[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    t.back() = b;
    return t;
}

double decay_time(const PoleResult& pole) { return pole.Gamma > 0.0 ? 1.0 / pole.Gamma : 100.0; }

std::vector<double> kernel_energies(const KernelSettings& settings) {
    return linspace(settings.e_min, settings.e_max, settings.points);
}

SectorRun run_sector(const RunConfig& config, unsigned threads) {
    const MomentumGrid grid = grid_for(config, config.sector.n_modes);
    SectorRun run;
    run.pole = find_pole(config.model, grid);
    const double tau = decay_time(run.pole);
    const double t_max = config.sector.t_max.value_or(2.5 * tau);
    const SectorHamiltonian H = build_sector(config.model, grid);
    const SectorSpectrum spectrum = decompose(H);
    run.survival = evolve_survival(spectrum, linspace(0.0, t_max, config.sector.t_points), threads);

    run.fit_t_lo = config.sector.fit_t_lo.value_or(0.2 * tau);
    run.fit_t_hi = config.sector.fit_t_hi.value_or(2.0 * tau);
    run.recurrence_threshold =
        config.sector.recurrence_threshold.value_or(0.5 * run.pole.Z_V * run.pole.Z_V);
    if (run.pole.unstable && run.pole.Gamma > 0.0) {
        run.fit = fit_exponential_decay(run.survival.times, run.survival.probability, run.fit_t_lo,
                                        run.fit_t_hi);
        RecurrenceOptions options;
        options.threshold = run.recurrence_threshold;
        run.recurrence = recurrence_estimate(H, run.pole.Gamma, options);
    }
    return run;
}

MasterRun run_master(const RunConfig& config, const EvolutionOptions& options, std::size_t snapshot_limit) {
    const MomentumGrid grid = grid_for(config, config.master.n_modes);
    MasterRun run;
    run.pole = find_pole(config.model, grid);
    run.generator = build_generator(config.model, grid, run.pole, config.master.variant);
    if (config.master.decoherence_rate) run.generator.kappa = *config.master.decoherence_rate;
    const double t_max = config.master.t_max.value_or(3.0 * decay_time(run.pole));
    run.dt = config.master.dt.value_or(max_stable_step(run.generator));
    const DensityMatrix rho0 = make_initial_state(config.master.initial_state, run.generator.basis_dim());
    std::vector<double> t_grid = linspace(0.0, t_max, config.master.t_points);
    if (snapshot_limit > 0 && snapshot_limit < t_grid.size()) t_grid.resize(snapshot_limit);
    run.evolution = evolve_density(run.generator, rho0, t_grid, run.dt, options);
    run.min_eigenvalue = std::numeric_limits<double>::infinity();
    for (const DensityMatrix& rho : run.evolution.snapshots) {
        run.max_purity_defect = std::max(run.max_purity_defect, std::abs(1.0 - rho.purity()));
        run.min_eigenvalue = std::min(run.min_eigenvalue, rho.min_eigenvalue());
    }
    return run;
}

LangevinRun run_langevin(const RunConfig& config, unsigned threads, const std::optional<PoleResult>& pole) {
    LangevinRun run;
    run.pole = pole ? *pole : find_pole(config.model, grid_for(config, config.grid.n_modes));
    run.coefficients = langevin_coefficients(run.pole, config.langevin.momentum);
    const double rate = run.coefficients.mean_decay_rate();
    const double dt = config.langevin.dt.value_or(0.05 / std::abs(run.coefficients.drift));
    const double t_max = config.langevin.t_max.value_or(rate > 0.0 ? 8.0 / rate : 100.0);

    run.noise.B_loc = local_kernels(run.pole, config.model).B_loc;
    run.noise.dt = dt;
    run.noise.seed = config.seed;
    run.noise.n_trajectories = config.langevin.n_trajectories;
    const auto wanted = static_cast<std::size_t>(std::ceil(t_max / dt - 1e-9));
    const std::size_t intervals = config.langevin.record_points - 1;
    run.noise.record_stride = std::max<std::size_t>(1, (wanted + intervals - 1) / intervals);
    run.noise.n_steps = run.noise.record_stride * intervals;

    const auto paths = simulate_ensemble(config.langevin.phi0, run.pole, run.noise, config.langevin.momentum,
                                         threads);
    run.ensemble = ensemble_stats(paths, recorded_times(run.noise), config.seed);
    return run;
}

json pole_json(const PoleResult& pole, const LocalKernels& local) {
    return json{{"m_V", pole.m_V},
                {"Gamma", pole.Gamma},
                {"gamma_friction", pole.gamma_friction},
                {"Z_V", pole.Z_V},
                {"lambda_ren", pole.lambda_ren},
                {"C0", pole.C0},
                {"C1", pole.C1},
                {"sigma_imag", pole.sigma_imag},
                {"unstable", pole.unstable},
                {"newton_iterations", pole.newton_iterations},
                {"A_slope", local.A_slope},
                {"B_loc", local.B_loc}};
}

std::string kernels_csv(const ArtifactMeta& meta, const KernelTable& table) {
    CsvTable csv(meta, "kernels", {"E", "D", "B", "A"});
    for (std::size_t i = 0; i < table.energies.size(); ++i) {
        csv.row({table.energies[i], table.D[i], table.B[i], table.A[i]});
    }
    return csv.str();
}

std::string survival_csv(const ArtifactMeta& meta, const SurvivalRecord& record) {
    CsvTable csv(meta, "survival", {"t", "re_c", "im_c", "abs_c_sq"});
    for (std::size_t i = 0; i < record.times.size(); ++i) {
        csv.row({record.times[i], record.amplitude[i].real(), record.amplitude[i].imag(), record.probability[i]});
    }
    return csv.str();
}

std::string master_csv(const ArtifactMeta& meta, const MasterRun& run) {
    CsvTable csv(meta, "master", {"t", "trace", "entropy", "rho_vv", "abs_rho_0v", "hermiticity_defect"});
    for (std::size_t i = 0; i < run.evolution.times.size(); ++i) {
        const DensityMatrix& rho = run.evolution.snapshots[i];
        csv.row({run.evolution.times[i], rho.trace().real(), linear_entropy(rho), rho(kExcited, kExcited).real(),
                 std::abs(rho(kVacuum, kExcited)), rho.hermiticity_defect()});
    }
    return csv.str();
}

json master_summary(const RunConfig& config, const MasterRun& run) {
    const EvolutionResult& e = run.evolution;
    return json{{"n_modes", config.master.n_modes},
                {"basis_dim", run.generator.basis_dim()},
                {"variant", to_string(run.generator.variant)},
                {"initial_state", to_string(config.master.initial_state)},
                {"kappa", run.generator.kappa},
                {"hamiltonian_norm", run.generator.hamiltonian_norm()},
                {"dt", run.dt},
                {"steps", e.steps},
                {"t_end", e.times.back()},
                {"max_trace_defect", e.max_trace_defect},
                {"max_hermiticity_defect", e.max_hermiticity_defect},
                {"max_entropy_decrease", e.max_entropy_decrease},
                {"max_purity_defect", run.max_purity_defect},
                {"min_eigenvalue", run.min_eigenvalue},
                {"entropy_initial", linear_entropy(e.snapshots.front())},
                {"entropy_final", linear_entropy(e.snapshots.back())}};
}

std::string langevin_csv(const ArtifactMeta& meta, const TrajectoryEnsemble& ens) {
    CsvTable csv(meta, "langevin",
                 {"t", "re_mean", "im_mean", "mean_sq", "stderr_re", "stderr_im", "stderr_sq"});
    for (std::size_t i = 0; i < ens.times.size(); ++i) {
        csv.row({ens.times[i], ens.mean_field[i].real(), ens.mean_field[i].imag(), ens.mean_sq[i],
                 ens.stderr_re[i], ens.stderr_im[i], ens.stderr_sq[i]});
    }
    return csv.str();
}

json langevin_summary(const LangevinRun& run) {
    const TrajectoryEnsemble& ens = run.ensemble;
    const ExponentialFit& fit = ens.mean_decay;
    const double expected_rate = run.coefficients.mean_decay_rate();
    const double rate_z = fit.rate_stderr > 0.0 ? (fit.rate - expected_rate) / fit.rate_stderr : 0.0;
    const double stationary = ens.mean_sq.back();
    const double stationary_err = ens.stderr_sq.back();
    // Complex OU stationary variance: |b|^2 B / (2 Re a) = B / (2 gamma m_V).
    const double expected_stationary =
        expected_rate > 0.0 ? std::norm(run.coefficients.noise_gain) * run.noise.B_loc / (2.0 * expected_rate) : 0.0;
    return json{{"gamma_friction", run.pole.gamma_friction},
                {"m_V", run.pole.m_V},
                {"m_eff", run.coefficients.m_eff},
                {"B_loc", run.noise.B_loc},
                {"drift_re", run.coefficients.drift.real()},
                {"drift_im", run.coefficients.drift.imag()},
                {"dt", run.noise.dt},
                {"n_steps", run.noise.n_steps},
                {"record_stride", run.noise.record_stride},
                {"t_end", ens.times.back()},
                {"n_trajectories", ens.n_trajectories},
                {"seed", ens.seed},
                {"mean_decay",
                 {{"rate", fit.rate},
                  {"rate_stderr", fit.rate_stderr},
                  {"expected_rate", expected_rate},
                  {"z_score", rate_z},
                  {"fit_points", fit.points},
                  {"degenerate", fit.degenerate}}},
                {"stationary",
                 {{"mean_sq", stationary},
                  {"stderr", stationary_err},
                  {"expected", expected_stationary}}}};
}

std::vector<Artifact> cmd_pole(const RunConfig& config) {
    const PoleResult pole = find_pole(config.model, grid_for(config, config.grid.n_modes));
    json body = pole_json(pole, local_kernels(pole, config.model));
    body["n_modes"] = config.grid.n_modes;
    body["k_max"] = grid_for(config, config.grid.n_modes).k_max;
    return single("pole.json", json_document(meta_for(config), "pole", std::move(body)));
}

std::vector<Artifact> cmd_kernels(const RunConfig& config, unsigned threads) {
    const KernelTable table =
        kernel_table(config.model, grid_for(config, config.grid.n_modes), kernel_energies(config.kernels), threads);
    return single("kernels.csv", kernels_csv(meta_for(config), table));
}

std::vector<Artifact> cmd_sector(const RunConfig& config, unsigned threads) {
    const SectorRun run = run_sector(config, threads);
    const ArtifactMeta meta = meta_for(config);
    json fit = nullptr;
    if (run.fit) {
        fit = json{{"rate", run.fit->rate},
                   {"points", run.fit->points},
                   {"relative_error", std::abs(run.fit->rate - run.pole.Gamma) / run.pole.Gamma}};
    }
    json body{{"n_modes", config.sector.n_modes},
              {"Gamma", run.pole.Gamma},
              {"m_V", run.pole.m_V},
              {"Z_V", run.pole.Z_V},
              {"fit_t_lo", run.fit_t_lo},
              {"fit_t_hi", run.fit_t_hi},
              {"fit", fit},
              {"recurrence_threshold", run.recurrence_threshold},
              {"recurrence_time", optional_number(run.recurrence)}};
    std::vector<Artifact> out;
    out.push_back({"survival.csv", survival_csv(meta, run.survival)});
    out.push_back({"sector.json", json_document(meta, "sector", std::move(body))});
    return out;
}

std::vector<Artifact> cmd_master(const RunConfig& config) {
    const MasterRun run = run_master(config);
    const ArtifactMeta meta = meta_for(config);
    std::vector<Artifact> out;
    out.push_back({"master.csv", master_csv(meta, run)});
    out.push_back({"master.json", json_document(meta, "master", master_summary(config, run))});
    return out;
}

std::vector<Artifact> cmd_langevin(const RunConfig& config, unsigned threads) {
    const LangevinRun run = run_langevin(config, threads);
    const ArtifactMeta meta = meta_for(config);
    std::vector<Artifact> out;
    out.push_back({"langevin.csv", langevin_csv(meta, run.ensemble)});
    out.push_back({"langevin.json", json_document(meta, "langevin", langevin_summary(run))});
    return out;
}

}  // namespace leedecay::cli
