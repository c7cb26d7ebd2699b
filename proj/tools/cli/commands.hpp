#pragma once

#include <optional>
#include <vector>

#include "cli/artifacts.hpp"
#include "cli/config.hpp"
#include "leedecay/langevin.hpp"
#include "leedecay/master.hpp"
#include "leedecay/sector.hpp"
#include "leedecay/spectral.hpp"

namespace leedecay::cli {

MomentumGrid grid_for(const RunConfig& config, std::size_t n_modes);
std::vector<double> linspace(double a, double b, std::size_t n);

// Time scale used for "auto" windows: 1 / Gamma, or 100 in the stable regime.
double decay_time(const PoleResult& pole);

std::vector<double> kernel_energies(const KernelSettings& settings);

struct SectorRun {
    PoleResult pole;
    SurvivalRecord survival;
    std::optional<DecayFit> fit;  // absent in the stable regime
    double fit_t_lo = 0.0;
    double fit_t_hi = 0.0;
    double recurrence_threshold = 0.0;
    std::optional<double> recurrence;  // first revival; absent if none or stable
};

SectorRun run_sector(const RunConfig& config, unsigned threads);

struct MasterRun {
    PoleResult pole;
    GeneratorSpec generator;
    double dt = 0.0;
    EvolutionResult evolution;
    double max_purity_defect = 0.0;  // max |1 - Tr rho^2| over snapshots
    double min_eigenvalue = 0.0;     // over snapshots
};

// snapshot_limit > 0 stops after that many points of the configured time
// grid; the snapshots produced are bit-identical to the full run's prefix.
MasterRun run_master(const RunConfig& config, const EvolutionOptions& options = {},
                     std::size_t snapshot_limit = 0);

struct LangevinRun {
    PoleResult pole;
    LangevinCoefficients coefficients;
    NoiseSpec noise;
    TrajectoryEnsemble ensemble;
};

// Ensemble for the given pole (computed from the config when omitted).
LangevinRun run_langevin(const RunConfig& config, unsigned threads,
                         const std::optional<PoleResult>& pole = std::nullopt);

nlohmann::ordered_json pole_json(const PoleResult& pole, const LocalKernels& local);
std::string kernels_csv(const ArtifactMeta& meta, const KernelTable& table);
std::string survival_csv(const ArtifactMeta& meta, const SurvivalRecord& record);
std::string master_csv(const ArtifactMeta& meta, const MasterRun& run);
nlohmann::ordered_json master_summary(const RunConfig& config, const MasterRun& run);
std::string langevin_csv(const ArtifactMeta& meta, const TrajectoryEnsemble& ensemble);
nlohmann::ordered_json langevin_summary(const LangevinRun& run);

std::vector<Artifact> cmd_pole(const RunConfig& config);
std::vector<Artifact> cmd_kernels(const RunConfig& config, unsigned threads);
std::vector<Artifact> cmd_sector(const RunConfig& config, unsigned threads);
std::vector<Artifact> cmd_master(const RunConfig& config);
std::vector<Artifact> cmd_langevin(const RunConfig& config, unsigned threads);

}  // namespace leedecay::cli
