#pragma once

#include <complex>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "leedecay/model.hpp"

namespace leedecay {

// Hamiltonian restricted to span{|V>, |N theta_k>} on the discretized grid.
// Arrowhead form: H[0][0] = hub_energy, H[0][i] = couplings[i-1],
// H[i][i] = continuum[i-1].
struct SectorHamiltonian {
    double hub_energy = 0.0;
    std::vector<double> continuum;
    std::vector<double> couplings;  // lambda0 f(omega_i) sqrt(weight_i / (2 omega_i))
    std::vector<double> weights;    // grid quadrature weights
    double band_edge = 0.0;         // m_N + mu, bottom of the continuum limit

    std::size_t dim() const noexcept { return continuum.size() + 1; }
    Eigen::MatrixXd dense() const;
    double coupling_norm_sq() const noexcept;  // sum_i h_i^2
};

SectorHamiltonian build_sector(const ModelParams& params, const MomentumGrid& grid);

struct StableState {
    double m_V = 0.0;
    std::vector<double> g;    // continuum-normalized weights g(k_i)
    double Z_V_discrete = 1.0;  // |<V|eigvec>|^2
    Eigen::VectorXd eigenvector;  // sign fixed so that <V|eigvec> >= 0
};

// Isolated eigenstate below the band. Throws RegimeError if the lowest
// eigenvalue is not below band_edge.
StableState diagonalize_stable(const SectorHamiltonian& H);

// Eigenvalues and V-overlaps |<V|a>|^2 of the sector Hamiltonian.
struct SectorSpectrum {
    Eigen::VectorXd energies;
    Eigen::VectorXd v_weights;
};

SectorSpectrum decompose(const SectorHamiltonian& H);

struct SurvivalRecord {
    std::vector<double> times;
    std::vector<std::complex<double>> amplitude;  // <V| exp(-iHt) |V>
    std::vector<double> probability;
};

SurvivalRecord evolve_survival(const SectorSpectrum& spectrum, std::span<const double> times,
                               unsigned threads = 1);
SurvivalRecord evolve_survival(const SectorHamiltonian& H, std::span<const double> times,
                               unsigned threads = 1);

struct DecayFit {
    double rate = 0.0;  // -slope of log(probability)
    double intercept = 0.0;
    std::size_t points = 0;
};

// Least-squares line through log(probability) for times in [t_lo, t_hi].
DecayFit fit_exponential_decay(std::span<const double> times, std::span<const double> probability,
                               double t_lo, double t_hi);

struct RecurrenceOptions {
    double threshold = 0.5;    // callers normally pass 0.5 Z_V^2
    double horizon = 0.0;      // 0: three revival periods 2 pi / spacing
    double scan_step = 0.0;    // 0: 2 pi / (20 bandwidth)
};

// Level spacing of the continuum nearest to the hub energy.
double resonant_spacing(const SectorHamiltonian& H);

// First t > 2/width with |c(t)|^2 > threshold. std::nullopt when no revival
// occurs before the horizon. Throws RegimeError unless the hub is coupled and
// sits above the band edge with width > 0.
std::optional<double> recurrence_estimate(const SectorHamiltonian& H, double width,
                                          const RecurrenceOptions& options = {});

}  // namespace leedecay
